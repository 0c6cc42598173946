//! Stochastic binary actor network.
//!
//! Every neuron emits a Bernoulli bit with probability `sigmoid(w·y + b)`,
//! which is then flipped with probability `alpha_flip · (1 - r_bar)` where
//! `r_bar` is the critic's reward prediction. Policy-gradient increments are
//! accumulated over a batch and applied either linearly or through the
//! thresholded power law.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::num::Float;

/// How accumulated batch changes are turned into parameter changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateRule {
    /// `Δw = acc`
    Linear,
    /// `Δw = sign(acc)·|acc|^k` if `|acc| > dw_min`, else 0.
    PowerLaw,
}

impl UpdateRule {
    pub const ALL: [UpdateRule; 2] = [UpdateRule::PowerLaw, UpdateRule::Linear];

    pub fn as_str(&self) -> &'static str {
        match self {
            UpdateRule::Linear => "linear",
            UpdateRule::PowerLaw => "powerlaw",
        }
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UpdateRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(UpdateRule::Linear),
            "powerlaw" | "power-law" | "power_law" => Ok(UpdateRule::PowerLaw),
            other => Err(format!("unknown update rule `{other}` (expected linear|powerlaw)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActorConfig<T = f64> {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    pub alpha_flip: T,
    pub lr_hidden: T,
    pub lr_out: T,
    pub batch_size: usize,
    pub dw_min: T,
    pub update_rule: UpdateRule,
    pub power_exponent: T,
}

impl<T: Float> Default for ActorConfig<T> {
    fn default() -> Self {
        let lr_hidden = T::lit(1.1);
        Self {
            n_in: 2,
            n_hidden: 10,
            n_out: 1,
            alpha_flip: T::lit(0.1),
            lr_hidden,
            lr_out: lr_hidden * T::HALF,
            batch_size: 10,
            dw_min: T::lit(0.4),
            update_rule: UpdateRule::PowerLaw,
            power_exponent: T::lit(1.75),
        }
    }
}

impl<T: Float> ActorConfig<T> {
    /// Sets the hidden learning rate and the output rate to half of it.
    pub fn with_learning_rate(mut self, lr_hidden: T) -> Self {
        self.lr_hidden = lr_hidden;
        self.lr_out = lr_hidden * T::HALF;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(format!("actor: {m}")));
        if self.n_in == 0 || self.n_hidden == 0 || self.n_out == 0 {
            return bad("layer sizes must be >= 1");
        }
        if !(self.alpha_flip >= T::ZERO && self.alpha_flip <= T::ONE) {
            return bad("alpha_flip must lie in [0, 1]");
        }
        if !(self.lr_hidden > T::ZERO && self.lr_hidden.is_finite()) {
            return bad("lr_hidden must be > 0");
        }
        if !(self.lr_out > T::ZERO && self.lr_out.is_finite()) {
            return bad("lr_out must be > 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(self.dw_min >= T::ZERO && self.dw_min.is_finite()) {
            return bad("dw_min must be >= 0");
        }
        if !(self.power_exponent > T::ZERO && self.power_exponent.is_finite()) {
            return bad("power_exponent must be > 0");
        }
        Ok(())
    }
}

#[inline]
pub fn sigmoid<T: Float>(z: T) -> T {
    if z >= T::ZERO {
        T::ONE / (T::ONE + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::ONE + e)
    }
}

/// Thresholded, sign-preserving power law applied to an accumulated change.
#[inline]
pub fn power_law_update<T: Float>(acc: T, dw_min: T, exponent: T) -> T {
    let mag = acc.abs();
    if mag > dw_min {
        acc.signum() * mag.powf(exponent)
    } else {
        T::ZERO
    }
}

/// Fully connected layer of stochastic binary neurons with its batch
/// accumulators. Weights are row-major, one row per neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLayer<T = f64> {
    pub n_in: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
    pub acc_weights: Vec<T>,
    pub acc_biases: Vec<T>,
}

impl<T: Float> BinaryLayer<T> {
    fn new(n_in: usize, weights: Vec<T>, biases: Vec<T>) -> Self {
        debug_assert_eq!(weights.len(), n_in * biases.len());
        let n = biases.len();
        Self { n_in, acc_weights: vec![T::ZERO; weights.len()], acc_biases: vec![T::ZERO; n], weights, biases }
    }

    fn uniform<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (n_in as f64).sqrt();
        let weights = (0..n_in * n_out).map(|_| T::lit(rng.gen_range(-bound..=bound))).collect();
        Self::new(n_in, weights, vec![T::ZERO; n_out])
    }

    #[inline]
    pub fn n_neurons(&self) -> usize {
        self.biases.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.weights[i * self.n_in..(i + 1) * self.n_in]
    }

    fn probabilities(&self, input: &[T]) -> Vec<T> {
        (0..self.n_neurons())
            .map(|i| {
                let z = self.row(i).iter().zip(input).fold(self.biases[i], |a, (&w, &y)| a + w * y);
                sigmoid(z)
            })
            .collect()
    }

    fn accumulate(&mut self, trace: &LayerTrace<T>, scale: T) {
        for i in 0..self.n_neurons() {
            let post = scale * (bit::<T>(trace.output[i]) - trace.p[i]);
            let row = &mut self.acc_weights[i * self.n_in..(i + 1) * self.n_in];
            for (acc, &pre) in row.iter_mut().zip(&trace.input) {
                *acc = *acc + post * pre;
            }
            self.acc_biases[i] = self.acc_biases[i] + post;
        }
    }

    fn apply(&mut self, rule: UpdateRule, dw_min: T, exponent: T) {
        let step = |acc: T| match rule {
            UpdateRule::Linear => acc,
            UpdateRule::PowerLaw => power_law_update(acc, dw_min, exponent),
        };
        for (w, acc) in self.weights.iter_mut().zip(self.acc_weights.iter_mut()) {
            *w = *w + step(*acc);
            *acc = T::ZERO;
        }
        for (b, acc) in self.biases.iter_mut().zip(self.acc_biases.iter_mut()) {
            *b = *b + step(*acc);
            *acc = T::ZERO;
        }
    }

    fn accumulators_zero(&self) -> bool {
        self.acc_weights.iter().chain(&self.acc_biases).all(|a| *a == T::ZERO)
    }
}

/// What one layer did during a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace<T = f64> {
    /// Presynaptic values `y_j` (0 or 1).
    pub input: Vec<T>,
    pub p: Vec<T>,
    pub proposed: Vec<bool>,
    pub output: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace<T = f64> {
    pub hidden: LayerTrace<T>,
    pub out: LayerTrace<T>,
    pub p_flip: T,
}

#[inline]
fn bit<T: Float>(b: bool) -> T {
    if b {
        T::ONE
    } else {
        T::ZERO
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorNetwork<T = f64> {
    pub config: ActorConfig<T>,
    pub hidden: BinaryLayer<T>,
    pub out: BinaryLayer<T>,
}

impl<T: Float> ActorNetwork<T> {
    /// Weights uniform in `[-1/sqrt(N), 1/sqrt(N)]` with `N` the fan-in,
    /// biases and accumulators zero.
    pub fn init<R: Rng + ?Sized>(config: ActorConfig<T>, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let hidden = BinaryLayer::uniform(config.n_in, config.n_hidden, rng);
        let out = BinaryLayer::uniform(config.n_hidden, config.n_out, rng);
        Ok(Self { config, hidden, out })
    }

    /// Builds a network from explicit row-major weights and biases.
    pub fn from_parameters(
        config: ActorConfig<T>,
        hidden_weights: Vec<T>,
        hidden_biases: Vec<T>,
        out_weights: Vec<T>,
        out_biases: Vec<T>,
    ) -> Result<Self> {
        config.validate()?;
        let shape_ok = hidden_weights.len() == config.n_hidden * config.n_in
            && hidden_biases.len() == config.n_hidden
            && out_weights.len() == config.n_out * config.n_hidden
            && out_biases.len() == config.n_out;
        if !shape_ok {
            return Err(Error::InvalidParams("actor parameter shapes do not match config".into()));
        }
        Ok(Self {
            config,
            hidden: BinaryLayer::new(config.n_in, hidden_weights, hidden_biases),
            out: BinaryLayer::new(config.n_hidden, out_weights, out_biases),
        })
    }

    /// Samples an action for input `x`. `r_bar` is clamped to `[0, 1]`.
    ///
    /// Each neuron consumes exactly two uniforms from `rng` (proposal, then
    /// flip), independent of the probabilities involved.
    ///
    /// Panics if `x.len() != n_in`.
    pub fn forward<R: Rng + ?Sized>(&self, x: &[bool], r_bar: T, rng: &mut R) -> (bool, ForwardTrace<T>) {
        assert_eq!(x.len(), self.config.n_in, "actor input has wrong dimension");
        let r_bar = r_bar.max(T::ZERO).min(T::ONE);
        let p_flip = self.config.alpha_flip * (T::ONE - r_bar);
        let input: Vec<T> = x.iter().map(|&b| bit(b)).collect();
        let hidden = sample_layer(&self.hidden, input, p_flip, rng);
        let hidden_bits: Vec<T> = hidden.output.iter().map(|&b| bit(b)).collect();
        let out = sample_layer(&self.out, hidden_bits, p_flip, rng);
        let y = out.output[0];
        (y, ForwardTrace { hidden, out, p_flip })
    }

    /// Adds `lr·(reward - r_bar)·(y_i - p_i)·y_j` to every accumulator, with
    /// `y_j = 1` for biases. `r_bar` is clamped as in [`forward`](Self::forward).
    pub fn accumulate_update(&mut self, trace: &ForwardTrace<T>, reward: T, r_bar: T) {
        let delta = reward - r_bar.max(T::ZERO).min(T::ONE);
        let (lr_h, lr_o) = (self.config.lr_hidden, self.config.lr_out);
        self.hidden.accumulate(&trace.hidden, lr_h * delta);
        self.out.accumulate(&trace.out, lr_o * delta);
    }

    /// Applies the accumulated changes with the configured rule and zeroes
    /// the accumulators.
    pub fn apply_batch_update(&mut self) {
        let c = self.config;
        self.hidden.apply(c.update_rule, c.dw_min, c.power_exponent);
        self.out.apply(c.update_rule, c.dw_min, c.power_exponent);
    }

    pub fn accumulators_zero(&self) -> bool {
        self.hidden.accumulators_zero() && self.out.accumulators_zero()
    }

    /// Probability of emitting 1 for input `x`, marginalizing over hidden
    /// bits by enumeration. Exponential in `n_hidden`; meant for small nets.
    pub fn output_probability(&self, x: &[bool], r_bar: T) -> T {
        let p_flip = self.config.alpha_flip * (T::ONE - r_bar.max(T::ZERO).min(T::ONE));
        let flip = |p: T| p * (T::ONE - p_flip) + (T::ONE - p) * p_flip;
        let input: Vec<T> = x.iter().map(|&b| bit(b)).collect();
        let ph: Vec<T> = self.hidden.probabilities(&input).into_iter().map(flip).collect();
        let n = ph.len();
        assert!(n < 24, "enumeration is limited to small hidden layers");
        let mut total = T::ZERO;
        for mask in 0u32..(1 << n) {
            let mut weight = T::ONE;
            let mut bits = Vec::with_capacity(n);
            for (i, &p) in ph.iter().enumerate() {
                let on = mask & (1 << i) != 0;
                weight = weight * if on { p } else { T::ONE - p };
                bits.push(bit::<T>(on));
            }
            total = total + weight * flip(self.out.probabilities(&bits)[0]);
        }
        total
    }
}

fn sample_layer<T: Float, R: Rng + ?Sized>(layer: &BinaryLayer<T>, input: Vec<T>, p_flip: T, rng: &mut R) -> LayerTrace<T> {
    let p = layer.probabilities(&input);
    let mut proposed = Vec::with_capacity(p.len());
    let mut output = Vec::with_capacity(p.len());
    for &pi in &p {
        let u_prop: f64 = rng.gen();
        let u_flip: f64 = rng.gen();
        let y = u_prop < pi.as_f64();
        proposed.push(y);
        output.push(y ^ (u_flip < p_flip.as_f64()));
    }
    LayerTrace { input, p, proposed, output }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        // mpmath
        assert_relative_eq!(sigmoid(2.0), 0.880_797_077_977_882_4, max_relative = 1e-15);
        for z in [-30.0, -2.5, -0.1, 0.3, 4.0, 40.0] {
            assert_relative_eq!(sigmoid(z) + sigmoid(-z), 1.0, max_relative = 1e-15);
        }
        assert!(sigmoid(-800.0f64) > 0.0 || sigmoid(-800.0f64) == 0.0);
        assert!(sigmoid(800.0f64) <= 1.0);
    }

    #[test]
    fn power_law_examples() {
        assert_eq!(power_law_update(0.4, 0.4, 1.75), 0.0);
        assert_eq!(power_law_update(1.0, 0.4, 1.75), 1.0);
        assert_eq!(power_law_update(-1.0, 0.4, 1.75), -1.0);
        // mpmath: 0.5^1.75
        assert_relative_eq!(power_law_update(0.5, 0.4, 1.75), 0.297_301_778_750_680_27, max_relative = 1e-14);
    }

    #[test]
    fn zero_network_has_half_probabilities() {
        let cfg = ActorConfig::<f64>::default();
        let net = ActorNetwork::from_parameters(cfg, vec![0.0; 20], vec![0.0; 10], vec![0.0; 10], vec![0.0]).unwrap();
        let (_, trace) = net.forward(&[true, false], 0.3, &mut rng());
        assert!(trace.hidden.p.iter().chain(&trace.out.p).all(|&p| p == 0.5));
    }

    #[test]
    fn full_reward_disables_flips() {
        let cfg = ActorConfig::<f64>::default();
        let mut r = rng();
        let net = ActorNetwork::init(cfg, &mut r).unwrap();
        for _ in 0..2000 {
            let (y, t) = net.forward(&[true, true], 1.0, &mut r);
            assert_eq!(t.p_flip, 0.0);
            assert_eq!(t.hidden.output, t.hidden.proposed);
            assert_eq!(y, t.out.proposed[0]);
        }
        // r_bar above 1 is clamped
        let (_, t) = net.forward(&[true, true], 1.7, &mut r);
        assert_eq!(t.p_flip, 0.0);
    }

    #[test]
    fn flip_enumeration_matches_closed_form() {
        // one hidden neuron saturated on, output neuron with p = 0.9
        let cfg = ActorConfig { n_hidden: 1, ..ActorConfig::<f64>::default() };
        let logit = (0.9f64 / 0.1).ln();
        let net = ActorNetwork::from_parameters(cfg, vec![0.0, 0.0], vec![0.0], vec![0.0], vec![logit]).unwrap();
        let p = net.output_probability(&[false, false], 0.0);
        assert_relative_eq!(p, 0.9 * 0.9 + 0.1 * 0.1, max_relative = 1e-12);
    }

    #[test]
    fn accumulate_examples() {
        let cfg = ActorConfig { n_hidden: 1, lr_hidden: 1.0, lr_out: 1.0, ..ActorConfig::<f64>::default() };
        let mut net = ActorNetwork::from_parameters(cfg, vec![0.0; 2], vec![0.0], vec![0.0], vec![0.0]).unwrap();
        let trace = ForwardTrace {
            hidden: LayerTrace { input: vec![1.0, 0.0], p: vec![0.8], proposed: vec![true], output: vec![true] },
            out: LayerTrace { input: vec![1.0], p: vec![0.8], proposed: vec![true], output: vec![true] },
            p_flip: 0.0,
        };
        net.accumulate_update(&trace, 0.5, 0.5);
        assert!(net.accumulators_zero());
        net.accumulate_update(&trace, 1.0, 0.5);
        assert_relative_eq!(net.hidden.acc_weights[0], 0.1, max_relative = 1e-14);
        assert_eq!(net.hidden.acc_weights[1], 0.0);
        assert_relative_eq!(net.hidden.acc_biases[0], 0.1, max_relative = 1e-14);
        assert_relative_eq!(net.out.acc_weights[0], 0.1, max_relative = 1e-14);
    }

    #[test]
    fn batch_update_rules() {
        let mut cfg = ActorConfig { n_hidden: 1, ..ActorConfig::<f64>::default() };
        let mk = |cfg| ActorNetwork::from_parameters(cfg, vec![0.0; 2], vec![0.0], vec![0.0], vec![0.0]).unwrap();
        let mut net = mk(cfg);
        net.hidden.acc_weights = vec![0.4, 0.5];
        net.hidden.acc_biases = vec![-1.0];
        net.out.acc_weights = vec![1.0];
        net.apply_batch_update();
        assert_eq!(net.hidden.weights[0], 0.0);
        assert_relative_eq!(net.hidden.weights[1], 0.297_301_778_750_680_27, max_relative = 1e-14);
        assert_eq!(net.hidden.biases[0], -1.0);
        assert_eq!(net.out.weights[0], 1.0);
        assert!(net.accumulators_zero());

        cfg.update_rule = UpdateRule::Linear;
        let mut net = mk(cfg);
        net.hidden.acc_weights = vec![0.3, -0.05];
        net.apply_batch_update();
        assert_eq!(net.hidden.weights, vec![0.3, -0.05]);
        assert!(net.accumulators_zero());
    }

    #[test]
    fn init_ranges() {
        let cfg = ActorConfig::<f64>::default();
        let mut r = rng();
        let b_h = 1.0 / 2f64.sqrt();
        let b_o = 1.0 / 10f64.sqrt();
        for _ in 0..50 {
            let net = ActorNetwork::init(cfg, &mut r).unwrap();
            assert!(net.hidden.weights.iter().all(|w| w.abs() <= b_h));
            assert!(net.out.weights.iter().all(|w| w.abs() <= b_o));
            assert!(net.hidden.biases.iter().chain(&net.out.biases).all(|&b| b == 0.0));
            assert!(net.accumulators_zero());
        }
    }

    #[test]
    fn init_weights_are_centered() {
        let cfg = ActorConfig::<f64>::default();
        let mut r = rng();
        let mut samples = Vec::new();
        while samples.len() < 100_000 {
            samples.extend(ActorNetwork::init(cfg, &mut r).unwrap().hidden.weights);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        // Var(U[-b, b]) = b^2 / 3
        let se = ((0.5 / 3.0) / n).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn rejects_bad_config() {
        let bad = ActorConfig { alpha_flip: 1.5, ..ActorConfig::<f64>::default() };
        assert!(bad.validate().is_err());
        let bad = ActorConfig { batch_size: 0, ..ActorConfig::<f64>::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    #[should_panic(expected = "wrong dimension")]
    fn forward_checks_dimension() {
        let net = ActorNetwork::init(ActorConfig::<f64>::default(), &mut rng()).unwrap();
        net.forward(&[true], 0.5, &mut rng());
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("linear".parse::<UpdateRule>().unwrap(), UpdateRule::Linear);
        assert_eq!("PowerLaw".parse::<UpdateRule>().unwrap(), UpdateRule::PowerLaw);
        assert!("cubic".parse::<UpdateRule>().is_err());
    }
}
