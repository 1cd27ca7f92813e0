//! Special-function kernel: Gamma on the positive reals and the one-parameter
//! Mittag-Leffler function on the non-positive real axis.

use rug::Float;

use crate::error::{Error, Result};
use crate::hp::{self, WORK_PREC};

/// Exponent and rate of a fractional Poisson process.
///
/// `beta` lies in `(0, 1]` and `lambda` is strictly positive; `beta = 1`
/// is the ordinary Poisson process with rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessParams {
    beta: f64,
    lambda: f64,
}

impl ProcessParams {
    pub fn new(beta: f64, lambda: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain(
                "ProcessParams",
                format!("beta must lie in (0, 1], got {beta}"),
            ));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(
                "ProcessParams",
                format!("lambda must be positive and finite, got {lambda}"),
            ));
        }
        Ok(Self { beta, lambda })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `λ t^β`, the argument the whole solution family depends on.
    pub fn scaled_time(&self, t: f64) -> f64 {
        self.lambda * t.powf(self.beta)
    }
}

fn check_positive(x: f64, context: &'static str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            context,
            format!("argument must be positive and finite, got {x}"),
        ))
    }
}

/// Γ(x) for `x > 0`, correctly rounded.
pub fn gamma(x: f64) -> Result<f64> {
    check_positive(x, "gamma")?;
    let g = Float::with_val(53, x).gamma().to_f64();
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::overflow(
            "gamma",
            format!("Γ({x}) exceeds the f64 range; use log_gamma"),
        ))
    }
}

/// ln Γ(x) for `x > 0`, correctly rounded.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive(x, "log_gamma")?;
    Ok(Float::with_val(53, x).ln_gamma().to_f64())
}

/// Infallible ln Γ for arguments the caller has already validated.
pub(crate) fn lgamma(x: f64) -> f64 {
    Float::with_val(53, x).ln_gamma().to_f64()
}

/// Largest validity-governing error tolerated by the series kernels:
/// `max term · ε_work` must not exceed this.
pub(crate) const CANCELLATION_LIMIT: f64 = 1e-12;

/// Natural log of the largest term `x^m / Γ(βm+1)` of the Mittag-Leffler
/// series. The log-term is concave in `m`, so the scan stops at the first
/// decrease.
pub(crate) fn max_log_term(beta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let mut best = 0.0f64;
    let mut m = 1u32;
    loop {
        let v = m as f64 * lx - lgamma(beta * m as f64 + 1.0);
        if v < best {
            return best;
        }
        best = v;
        m += 1;
    }
}

/// Largest `|z|` for which [`mittag_leffler`] meets its accuracy contract
/// at this `beta`.
pub fn mittag_leffler_zmax(beta: f64) -> f64 {
    let target = (CANCELLATION_LIMIT / hp::work_eps()).ln();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while max_log_term(beta, hi) < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if max_log_term(beta, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Result of summing an alternating power series in extended precision.
pub(crate) struct SeriesSum {
    pub value: Float,
    /// Largest absolute term encountered.
    pub max_term: f64,
}

/// `Σ_{m≥0} (−x)^m / Γ(βm+1)` at working precision for `x ≥ 0`.
///
/// Summation stops once the tail is dominated by a geometric series of
/// ratio ≤ 1/2 and is negligible next to `floor`.
pub(crate) fn ml_series(beta: f64, x: f64, floor: f64) -> SeriesSum {
    let xf = hp::float(WORK_PREC, x);
    let mut len = 64usize;
    let mut table = hp::inv_gamma_table(beta, len);
    let mut sum = Float::with_val(WORK_PREC, 0);
    let mut power = Float::with_val(WORK_PREC, 1);
    let mut max_term = 0.0f64;
    let mut m = 0usize;
    loop {
        if m + 1 >= len {
            len *= 2;
            table = hp::inv_gamma_table(beta, len);
        }
        let term = Float::with_val(WORK_PREC, &power * &table[m]);
        let mag = term.to_f64();
        max_term = max_term.max(mag);
        if m.is_multiple_of(2) {
            sum += &term;
        } else {
            sum -= &term;
        }
        power *= &xf;
        // ratio of the next two terms; non-increasing in m
        let next = Float::with_val(WORK_PREC, &power * &table[m + 1]);
        let ratio = Float::with_val(53, &table[m + 1] / &table[m]).to_f64() * x;
        m += 1;
        if ratio <= 0.5 {
            let bound = 2.0 * next.to_f64();
            let scale = sum.to_f64().abs();
            if bound <= floor.max(1e-20 * scale) {
                break;
            }
        }
    }
    SeriesSum {
        value: sum,
        max_term,
    }
}

/// Mittag-Leffler function `E_β(z) = Σ z^m / Γ(βm+1)` for `z ≤ 0`.
///
/// The alternating series is summed in extended precision. The result is
/// accepted only while `max term · ε_work ≤ 1e-12`; beyond that a
/// precision error reports the largest admissible `|z|`.
pub fn mittag_leffler(beta: f64, z: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(
            "mittag_leffler",
            format!("beta must lie in (0, 1], got {beta}"),
        ));
    }
    if !z.is_finite() || z > 0.0 {
        return Err(Error::domain(
            "mittag_leffler",
            format!("only finite z <= 0 is supported, got {z}"),
        ));
    }
    let x = -z;
    if x == 0.0 {
        return Ok(1.0);
    }
    // Reject before paying for a huge series.
    if max_log_term(beta, x) > (CANCELLATION_LIMIT / hp::work_eps()).ln() {
        return Err(Error::precision(
            "mittag_leffler",
            format!(
                "|z| = {x} exceeds the cancellation-safe bound {:.6} for beta = {beta}",
                mittag_leffler_zmax(beta)
            ),
        ));
    }
    let s = ml_series(beta, x, 1e-40);
    if s.max_term * hp::work_eps() > CANCELLATION_LIMIT {
        return Err(Error::precision(
            "mittag_leffler",
            format!(
                "largest term {:e} too large; |z| must stay below {:.6}",
                s.max_term,
                mittag_leffler_zmax(beta)
            ),
        ));
    }
    Ok(s.value.to_f64().clamp(f64::MIN_POSITIVE, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn params_validation() {
        assert!(ProcessParams::new(1.0, 1.0).is_ok());
        assert!(ProcessParams::new(0.0, 1.0).is_err());
        assert!(ProcessParams::new(1.2, 1.0).is_err());
        assert!(ProcessParams::new(0.5, 0.0).is_err());
        assert!(ProcessParams::new(0.5, f64::NAN).is_err());
    }

    #[test]
    fn gamma_at_integers() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
    }

    #[test]
    fn gamma_half_against_quadrature() {
        // ∫₀^∞ s^{-1/2} e^{-s} ds = 2 ∫₀^∞ e^{-u²} du, composite Simpson on [0, 12]
        let n = 200_000;
        let h = 12.0 / n as f64;
        let f = |u: f64| (-u * u).exp();
        // Kahan summation keeps the oracle's rounding below 1e-15
        let mut acc = f(0.0) + f(12.0);
        let mut comp = 0.0;
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            let y = w * f(i as f64 * h) - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        let oracle = 2.0 * acc * h / 3.0;
        assert!(rel(gamma(0.5).unwrap(), oracle) < 1e-14);
        assert!(rel(gamma(0.5).unwrap(), 1.772_453_850_905_516) < 1e-15);
    }

    #[test]
    fn gamma_errors() {
        assert!(matches!(gamma(0.0), Err(Error::Domain { .. })));
        assert!(matches!(gamma(-1.5), Err(Error::Domain { .. })));
        assert!(matches!(gamma(200.0), Err(Error::Overflow { .. })));
        assert!(gamma(170.0).is_ok());
    }

    #[test]
    fn log_gamma_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        // ln(100!) from the exact integer factorial
        let fact = (1u32..=100).fold(num_bigint::BigUint::from(1u32), |a, k| a * k);
        let digits = fact.to_string();
        let lead: f64 = format!("{}.{}", &digits[..1], &digits[1..18])
            .parse()
            .unwrap();
        let oracle = lead.ln() + (digits.len() - 1) as f64 * std::f64::consts::LN_10;
        assert!(rel(log_gamma(101.0).unwrap(), oracle) < 1e-13);
        assert!(rel(log_gamma(101.0).unwrap(), 363.739_375_555_563_49) < 1e-14);
        assert!(log_gamma(-1.0).is_err());
    }

    #[test]
    fn gamma_functional_equation() {
        for i in 1..=500 {
            let x = i as f64 * 0.1;
            let r = gamma(x + 1.0).unwrap() / gamma(x).unwrap();
            assert!(rel(r, x) < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn mittag_leffler_examples() {
        assert_eq!(mittag_leffler(0.7, 0.0).unwrap(), 1.0);
        assert!((mittag_leffler(1.0, -2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        // e·erfc(1)
        assert!((mittag_leffler(0.5, -1.0).unwrap() - 0.427_583_576_155_807).abs() < 1e-14);
    }

    #[test]
    fn mittag_leffler_beta_one_is_exp() {
        for i in 0..=400 {
            let z = -(i as f64) * 0.05;
            assert!((mittag_leffler(1.0, z).unwrap() - z.exp()).abs() <= 1e-12);
        }
    }

    #[test]
    fn mittag_leffler_monotone() {
        for &beta in &[0.3, 0.5, 0.7, 0.9, 1.0] {
            let zmax = mittag_leffler_zmax(beta).min(5.0);
            let zs: Vec<f64> = (0..=1000).map(|i| -(i as f64) * 0.001 * zmax).collect();
            let vals: Vec<f64> = zs
                .iter()
                .map(|&z| mittag_leffler(beta, z).unwrap())
                .collect();
            for w in vals.windows(2) {
                assert!(w[1] < w[0], "beta = {beta}");
            }
        }
    }

    #[test]
    fn mittag_leffler_domain_and_precision_errors() {
        assert!(matches!(
            mittag_leffler(0.5, 0.1),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            mittag_leffler(1.5, -1.0),
            Err(Error::Domain { .. })
        ));
        let zmax = mittag_leffler_zmax(0.5);
        assert!(zmax > 10.0);
        match mittag_leffler(0.5, -2.0 * zmax) {
            Err(Error::Precision { message, .. }) => assert!(message.contains("bound")),
            other => panic!("expected precision error, got {other:?}"),
        }
        assert!(mittag_leffler(0.5, -0.99 * zmax).is_ok());
    }
}
