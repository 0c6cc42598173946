//! Sigmoidal reward predictor with a frozen readout layer.

use rand::Rng;

use crate::actor::sigmoid;
use crate::error::{Error, Result};
use crate::num::{sign0, Float};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticConfig<T = f64> {
    pub n_in: usize,
    pub n_hidden: usize,
    pub lr: T,
    pub l1_coeff: T,
    /// Presentations per update. Only 1 is supported.
    pub batch_size: usize,
}

impl<T: Float> Default for CriticConfig<T> {
    fn default() -> Self {
        Self { n_in: 2, n_hidden: 20, lr: T::ONE, l1_coeff: T::lit(0.001), batch_size: 1 }
    }
}

impl<T: Float> CriticConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(format!("critic: {m}")));
        if self.n_in == 0 || self.n_hidden == 0 {
            return bad("layer sizes must be >= 1");
        }
        if !(self.lr > T::ZERO && self.lr.is_finite()) {
            return bad("lr must be > 0");
        }
        if !(self.l1_coeff >= T::ZERO && self.l1_coeff.is_finite()) {
            return bad("l1_coeff must be >= 0");
        }
        if self.batch_size != 1 {
            return bad("only batch_size = 1 is supported");
        }
        Ok(())
    }
}

/// Activations from one forward pass, reused by [`CriticNetwork::update`].
#[derive(Debug, Clone, PartialEq)]
pub struct CriticForward<T = f64> {
    pub hidden: Vec<T>,
    pub output: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticNetwork<T = f64> {
    pub config: CriticConfig<T>,
    /// Row-major, `n_hidden × n_in`.
    pub w_hidden: Vec<T>,
    pub b_hidden: Vec<T>,
    w_out: Vec<T>,
    b_out: T,
}

impl<T: Float> CriticNetwork<T> {
    /// Hidden weights uniform in `[-1/sqrt(n_in), 1/sqrt(n_in)]`, hidden
    /// biases 0, readout weights uniform in `[-1.25, 1.25]`, readout bias 0.5.
    pub fn init<R: Rng + ?Sized>(config: CriticConfig<T>, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let bound = 1.0 / (config.n_in as f64).sqrt();
        let w_hidden = (0..config.n_hidden * config.n_in).map(|_| T::lit(rng.gen_range(-bound..=bound))).collect();
        let w_out = (0..config.n_hidden).map(|_| T::lit(rng.gen_range(-1.25..=1.25))).collect();
        Ok(Self { config, w_hidden, b_hidden: vec![T::ZERO; config.n_hidden], w_out, b_out: T::HALF })
    }

    pub fn from_parameters(config: CriticConfig<T>, w_hidden: Vec<T>, b_hidden: Vec<T>, w_out: Vec<T>, b_out: T) -> Result<Self> {
        config.validate()?;
        if w_hidden.len() != config.n_hidden * config.n_in || b_hidden.len() != config.n_hidden || w_out.len() != config.n_hidden {
            return Err(Error::InvalidParams("critic parameter shapes do not match config".into()));
        }
        Ok(Self { config, w_hidden, b_hidden, w_out, b_out })
    }

    pub fn w_out(&self) -> &[T] {
        &self.w_out
    }

    pub fn b_out(&self) -> T {
        self.b_out
    }

    /// Panics if `x.len() != n_in`.
    pub fn forward(&self, x: &[bool]) -> CriticForward<T> {
        let n_in = self.config.n_in;
        assert_eq!(x.len(), n_in, "critic input has wrong dimension");
        let hidden: Vec<T> = self
            .b_hidden
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let row = &self.w_hidden[i * n_in..(i + 1) * n_in];
                let z = row.iter().zip(x).fold(b, |a, (&w, &xj)| if xj { a + w } else { a });
                sigmoid(z)
            })
            .collect();
        let z = hidden.iter().zip(&self.w_out).fold(self.b_out, |a, (&y, &w)| a + w * y);
        CriticForward { hidden, output: sigmoid(z) }
    }

    /// Hidden-layer change `lr·[(R - y_out)·y_i·w_out_i·x_j - l1·sign(w_ij)]`;
    /// biases use `x_j = 1` and no L1 term. The readout stays fixed.
    pub fn update(&mut self, x: &[bool], fwd: &CriticForward<T>, reward: T) {
        let n_in = self.config.n_in;
        let (lr, l1) = (self.config.lr, self.config.l1_coeff);
        let err = reward - fwd.output;
        for i in 0..self.config.n_hidden {
            let post = err * fwd.hidden[i] * self.w_out[i];
            for (j, &xj) in x.iter().enumerate() {
                let w = &mut self.w_hidden[i * n_in + j];
                let data = if xj { post } else { T::ZERO };
                *w = *w + lr * (data - l1 * sign0(*w));
            }
            self.b_hidden[i] = self.b_hidden[i] + lr * post;
        }
    }
}
