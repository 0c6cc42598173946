//! Sample statistics and Welch's unequal-variance t-test.

use crate::error::{Error, Result};
use crate::num::Float;

pub fn mean<T: Float>(xs: &[T]) -> T {
    let n = T::from_usize(xs.len()).expect("length fits scalar");
    xs.iter().fold(T::ZERO, |a, &x| a + x) / n
}

/// Sample variance with the `n - 1` denominator (two-pass).
pub fn sample_variance<T: Float>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::nan();
    }
    let m = mean(xs);
    let ss = xs.iter().fold(T::ZERO, |a, &x| a + (x - m) * (x - m));
    ss / T::from_usize(xs.len() - 1).expect("length fits scalar")
}

pub fn sample_std<T: Float>(xs: &[T]) -> T {
    sample_variance(xs).sqrt()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation, g = 7).
pub fn ln_gamma<T: Float>(x: T) -> T {
    if x < T::HALF {
        // reflection
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::ONE - x);
    }
    let x = x - T::ONE;
    let mut a = T::lit(LANCZOS[0]);
    let t = x + T::lit(LANCZOS_G + 0.5);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + T::lit(c) / (x + T::from_usize(k).unwrap());
    }
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + T::HALF) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta<T: Float>(x: T, a: T, b: T) -> T {
    if x <= T::ZERO {
        return T::ZERO;
    }
    if x >= T::ONE {
        return T::ONE;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (T::ONE - x).ln();
    let front = ln_front.exp();
    // continued fraction converges quickly for x < (a + 1) / (a + b + 2)
    if x < (a + T::ONE) / (a + b + T::TWO) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        T::ONE - front * beta_continued_fraction(T::ONE - x, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction<T: Float>(x: T, a: T, b: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let eps = T::epsilon();
    let qab = a + b;
    let qap = a + T::ONE;
    let qam = a - T::ONE;
    let mut c = T::ONE;
    let mut d = T::ONE - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = d.recip();
    let mut h = d;
    for m in 1..=1000usize {
        let m = T::from_usize(m).unwrap();
        let m2 = T::TWO * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = T::ONE + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = T::ONE + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = T::ONE + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = T::ONE + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let del = d * c;
        h = h * del;
        if (del - T::ONE).abs() <= eps {
            break;
        }
    }
    h
}

/// Student-t cumulative distribution `P(T <= t)` with `nu` degrees of freedom.
pub fn student_t_cdf<T: Float>(t: T, nu: T) -> T {
    if t.is_infinite() {
        return if t > T::ZERO { T::ONE } else { T::ZERO };
    }
    let x = nu / (nu + t * t);
    let tail = T::HALF * regularized_incomplete_beta(x, nu * T::HALF, T::HALF);
    if t > T::ZERO {
        T::ONE - tail
    } else {
        tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult<T = f64> {
    /// `(mean_a - mean_b) / sqrt(s_a²/n_a + s_b²/n_b)`.
    pub t: T,
    /// Welch–Satterthwaite degrees of freedom.
    pub nu: T,
    pub p_two_sided: T,
    /// `P(T <= t)`: evidence that `mean_a < mean_b`.
    pub p_one_sided: T,
}

pub fn welch_t_test<T: Float>(a: &[T], b: &[T]) -> Result<WelchResult<T>> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::UndefinedStatistic(format!(
            "welch test needs at least 2 samples per arm, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let na = T::from_usize(a.len()).unwrap();
    let nb = T::from_usize(b.len()).unwrap();
    let va = sample_variance(a) / na;
    let vb = sample_variance(b) / nb;
    let se2 = va + vb;
    if !(se2 > T::ZERO) {
        return Err(Error::UndefinedStatistic("both samples have zero variance".into()));
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let nu = se2 * se2 / (va * va / (na - T::ONE) + vb * vb / (nb - T::ONE));
    let p_two_sided = if t == T::ZERO {
        T::ONE
    } else {
        regularized_incomplete_beta(nu / (nu + t * t), nu * T::HALF, T::HALF)
    };
    Ok(WelchResult { t, nu, p_two_sided, p_one_sided: student_t_cdf(t, nu) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0f64), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(0.5f64), std::f64::consts::PI.sqrt().ln(), max_relative = 1e-13);
        assert_relative_eq!(ln_gamma(10.0f64), 362_880f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn textbook_example() {
        // mpmath: t = -1.5491933384829668, nu = 2.9411764705882353,
        // p2 = 0.22088084049409593
        let r = welch_t_test(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_relative_eq!(r.t, -1.549_193_338_482_966_8, max_relative = 1e-13);
        assert_relative_eq!(r.nu, 2.941_176_470_588_235_3, max_relative = 1e-13);
        assert_relative_eq!(r.p_two_sided, 0.220_880_840_494_095_93, epsilon = 1e-10);
        assert_relative_eq!(r.p_one_sided, 0.110_440_420_247_047_96, epsilon = 1e-10);
    }

    #[test]
    fn cauchy_case() {
        // nu = 1: P(|T| > 1) = 1 - 2·atan(1)/pi = 0.5
        let p2 = regularized_incomplete_beta(0.5f64, 0.5, 0.5);
        assert_relative_eq!(p2, 0.5, epsilon = 1e-12);
        assert_relative_eq!(student_t_cdf(1.0f64, 1.0), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn identical_samples() {
        let a = [3.0, 5.0, 9.0, 1.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(welch_t_test(&[1.0, 1.0], &[2.0, 2.0]).is_err());
        assert!(welch_t_test(&[1.0], &[2.0, 3.0]).is_err());
        // one arm constant is fine
        assert!(welch_t_test(&[1.0, 1.0], &[2.0, 3.0]).is_ok());
    }

    #[test]
    fn std_two_pass() {
        assert_relative_eq!(sample_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]), (32.0f64 / 7.0).sqrt(), max_relative = 1e-15);
        assert!(sample_std(&[1.0f64]).is_nan());
    }
}
