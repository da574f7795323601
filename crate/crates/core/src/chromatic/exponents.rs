use crate::arith::{q, to_f64, Rational};
use crate::error::{Error, Result};

/// `H(x) = −x log₂ x − (1−x) log₂(1−x)` on `[0, 1]`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param(format!("entropy argument {x} outside [0, 1]")));
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(x) + term(1.0 - x))
}

/// Exponential bases `t` (running time `tⁿ` up to polynomial factors) of
/// each case at slack `d = δn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl ExponentReport {
    pub fn max(&self) -> f64 {
        [self.a, self.b, self.c, self.d, self.e].into_iter().fold(f64::MIN, f64::max)
    }
}

/// Bases of the five cases for slack `δn` and decomposition slack `ε`,
/// given 3- and 4-coloring bases `t3`, `t4`:
///
/// - A: `t3`
/// - B: `2^{H(6δ)} · t4^{1−6δ}`
/// - C: `2^{H(1/2−δ)}`
/// - D: `(2 · 2^{H((1/6 + 7δ/3)/(1/2 + δ))})^{(1/2+δ)(1+ε)}`
/// - E: `2^{H(1/2−δ)(1+ε)}`
///
/// Evaluated in `f64`; relative error is far below `10⁻⁹` here.
pub fn exponent_report(delta: &Rational, epsilon: &Rational, t3: f64, t4: f64) -> Result<ExponentReport> {
    if *delta <= q(0, 1) || *delta >= q(1, 12) {
        return Err(Error::param(format!("delta must lie in (0, 1/12), got {delta}")));
    }
    if *epsilon < q(0, 1) {
        return Err(Error::param(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    if !(t3 > 1.0 && t4 > 1.0 && t3.is_finite() && t4.is_finite()) {
        return Err(Error::param(format!("bases must be finite and > 1, got t3={t3} t4={t4}")));
    }
    let (dl, eps) = (to_f64(delta), to_f64(epsilon));
    let b = binary_entropy(6.0 * dl)?.exp2() * t4.powf(1.0 - 6.0 * dl);
    let h_half = binary_entropy(0.5 - dl)?;
    let c = h_half.exp2();
    let ratio = (1.0 / 6.0 + 7.0 * dl / 3.0) / (0.5 + dl);
    let d = (2.0 * binary_entropy(ratio)?.exp2()).powf((0.5 + dl) * (1.0 + eps));
    let e = (h_half * (1.0 + eps)).exp2();
    Ok(ExponentReport { a: t3, b, c, d, e })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_report() -> ExponentReport {
        exponent_report(&q(1, 145), &q(0, 1), 1.3289, 1.7215).unwrap()
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.25).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-15);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn published_bounds_hold() {
        let r = default_report();
        assert!(r.b <= 1.9998, "{}", r.b);
        assert!(r.d <= 1.98, "{}", r.d);
        assert!(r.c <= 1.99981 && r.e <= 1.99981, "{} {}", r.c, r.e);
        assert!(r.max() <= 1.99982);
        assert!((r.b - 1.999_749_84).abs() < 1e-7, "{}", r.b);
        assert!((r.d - 1.979_269_31).abs() < 1e-7, "{}", r.d);
        assert!((r.e - 1.999_809_75).abs() < 1e-7, "{}", r.e);
    }

    #[test]
    fn epsilon_raises_d_and_e_only() {
        let base = default_report();
        let r = exponent_report(&q(1, 145), &q(1, 1000), 1.3289, 1.7215).unwrap();
        assert!(r.d > base.d && r.e > base.e);
        assert_eq!((r.b, r.c), (base.b, base.c));
    }

    #[test]
    fn e_decreases_with_delta() {
        let mut last = f64::MAX;
        for i in 1..100 {
            let r = exponent_report(&q(i, 1200), &q(0, 1), 1.3289, 1.7215).unwrap();
            assert!(r.e < last);
            last = r.e;
        }
    }

    #[test]
    fn domain_errors() {
        assert!(exponent_report(&q(1, 12), &q(0, 1), 1.3, 1.7).is_err());
        assert!(exponent_report(&q(0, 1), &q(0, 1), 1.3, 1.7).is_err());
        assert!(exponent_report(&q(1, 145), &q(-1, 10), 1.3, 1.7).is_err());
        assert!(exponent_report(&q(1, 145), &q(0, 1), 1.0, 1.7).is_err());
    }
}
