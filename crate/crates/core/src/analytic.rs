//! Series solution of the fractional Kolmogorov-Feller equations.
//!
//! With `x = λ t^β` the counting probabilities are
//!
//! ```text
//! P(n, t) = (-1)^n Σ_{j≥n} C(j, n) φ(j, t),   φ(j, t) = (-x)^j / Γ(βj + 1)
//! ```
//!
//! Each `P(n, t)` is an alternating series, summed here in extended
//! precision and truncated by a certified geometric remainder bound.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::hp::{self, WORK_PREC};
use crate::quad;
use crate::specfun::{self, lgamma, ProcessParams, CANCELLATION_LIMIT};

/// Rounding noise tolerated below zero before a probability is rejected.
pub const CLAMP_SLACK: f64 = 1e-12;

const MAX_TERMS: usize = 200_000;

/// `φ(j, τ)` together with its index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub index: u32,
    pub value: f64,
}

/// Truncated probability vector `P(0, t), …, P(N-1, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    params: ProcessParams,
    time: f64,
    values: Vec<f64>,
    tail_bound: f64,
}

impl ProbVector {
    pub fn params(&self) -> ProcessParams {
        self.params
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn trunc(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Certified upper bound on `Σ_{n≥N} P(n, t)`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `|Σ values + tail_bound − 1|`.
    pub fn normalization_defect(&self) -> f64 {
        (self.values.iter().sum::<f64>() + self.tail_bound - 1.0).abs()
    }
}

fn check_time(t: f64, context: &'static str) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            context,
            format!("time must be finite and >= 0, got {t}"),
        ))
    }
}

/// `φ(j, τ) = (−λτ)^j / Γ(βj + 1)`, evaluated as a log-magnitude with an
/// explicit sign. Takes transformed time `τ = t^β`.
pub fn phi(j: u32, tau: f64, params: &ProcessParams) -> Result<PhiValue> {
    check_time(tau, "phi")?;
    if j == 0 {
        return Ok(PhiValue {
            index: 0,
            value: 1.0,
        });
    }
    let x = params.lambda() * tau;
    if x == 0.0 {
        return Ok(PhiValue {
            index: j,
            value: 0.0,
        });
    }
    let log_mag = j as f64 * x.ln() - lgamma(params.beta() * j as f64 + 1.0);
    if log_mag > f64::MAX.ln() {
        return Err(Error::overflow(
            "phi",
            format!("|phi({j}, {tau})| = exp({log_mag:.3}) exceeds the f64 range"),
        ));
    }
    let mag = log_mag.exp();
    let value = if j.is_multiple_of(2) { mag } else { -mag };
    Ok(PhiValue { index: j, value })
}

/// One evaluated probability with its error bookkeeping.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesValue {
    pub value: f64,
    /// Truncation remainder bound plus accumulated rounding.
    pub error: f64,
}

/// `P(n)` at scaled time `x = λ t^β`, summed until the certified remainder
/// drops below `tol`.
pub(crate) fn pmf_scaled(n: u32, x: f64, beta: f64, tol: f64) -> Result<SeriesValue> {
    if x == 0.0 {
        let value = if n == 0 { 1.0 } else { 0.0 };
        return Ok(SeriesValue { value, error: 0.0 });
    }
    let n_us = n as usize;
    let xf = hp::float(WORK_PREC, x);
    let mut len = (2 * n_us).max(64);
    let mut table = hp::inv_gamma_table(beta, len);
    let mut binom = Float::with_val(WORK_PREC, 1);
    let mut power = Float::with_val(WORK_PREC, (&xf).pow(n)); // x^j
    let mut sum = Float::with_val(WORK_PREC, 0);
    let mut max_term = 0.0f64;
    let mut j = n_us;
    let remainder;
    loop {
        if j + 1 >= len {
            len *= 2;
            table = hp::inv_gamma_table(beta, len);
        }
        let term = Float::with_val(WORK_PREC, &binom * &power) * &table[j];
        max_term = max_term.max(term.to_f64());
        if (j - n_us).is_multiple_of(2) {
            sum += &term;
        } else {
            sum -= &term;
        }
        // C(j+1, n) = C(j, n) (j+1) / (j+1-n)
        binom *= (j + 1) as u32;
        binom /= (j + 1 - n_us) as u32;
        power *= &xf;
        let next = Float::with_val(WORK_PREC, &binom * &power) * &table[j + 1];
        j += 1;
        // Successive term ratios are non-increasing, so once one is ≤ 1/2
        // the remainder is dominated by a geometric series.
        let ratio = Float::with_val(53, &next / &term).to_f64();
        if ratio <= 0.5 {
            let bound = next.to_f64() / (1.0 - ratio) * (1.0 + 1e-9);
            if bound < tol {
                remainder = bound;
                break;
            }
        }
        if j - n_us > MAX_TERMS {
            return Err(Error::precision(
                "pmf",
                format!(
                    "series for n = {n} did not reach tolerance {tol:e} within {MAX_TERMS} terms"
                ),
            ));
        }
    }
    let terms = (j - n_us) as f64;
    let rounding = max_term * hp::work_eps() * terms;
    if rounding > CANCELLATION_LIMIT.min(tol) {
        return Err(Error::precision(
            "pmf",
            format!(
                "cancellation: largest term {max_term:e} leaves rounding {rounding:e} above tolerance"
            ),
        ));
    }
    let mut value = sum.to_f64();
    let error = remainder + rounding;
    // values within their certified error of [0, 1] are clamped
    let slack = CLAMP_SLACK + error;
    if value < 0.0 {
        if value >= -slack {
            log::debug!("pmf(n = {n}, x = {x}): clamped {value:e} to 0");
            value = 0.0;
        } else {
            return Err(Error::precision(
                "pmf",
                format!("series for n = {n} returned {value:e} < 0"),
            ));
        }
    } else if value > 1.0 {
        if value <= 1.0 + slack {
            value = 1.0;
        } else {
            return Err(Error::precision(
                "pmf",
                format!("series for n = {n} returned {value} > 1"),
            ));
        }
    }
    Ok(SeriesValue { value, error })
}

/// `P(n, t)` of the fractional Poisson process.
///
/// The series is truncated once its certified remainder is below `tol`;
/// the result is clamped to `[0, 1]`.
pub fn pmf(n: u32, t: f64, params: &ProcessParams, tol: f64) -> Result<f64> {
    check_time(t, "pmf")?;
    if !(tol > 0.0) {
        return Err(Error::domain(
            "pmf",
            format!("tolerance must be positive, got {tol}"),
        ));
    }
    pmf_scaled(n, params.scaled_time(t), params.beta(), tol).map(|v| v.value)
}

/// Markov bound on `Σ_{n≥N} P(n)` from the factorial moment of order `k`:
/// `E[(X)_k] / (N)_k`, minimised over `k = 1..=N`.
fn markov_tail_bound(trunc: usize, x: f64, beta: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let mut best = f64::INFINITY;
    for k in 1..=trunc {
        let kf = k as f64;
        let log_moment = lgamma(kf + 1.0) + kf * lx - lgamma(beta * kf + 1.0);
        let log_falling = lgamma(trunc as f64 + 1.0) - lgamma((trunc - k) as f64 + 1.0);
        best = best.min(log_moment - log_falling);
    }
    best.exp()
}

/// `P(0, t), …, P(N-1, t)` with a certified bound on the discarded tail.
///
/// The tail bound is the smaller of the factorial-moment Markov bound and
/// the normalization complement `1 − Σ P + Σ errors`.
pub fn pmf_vector(trunc: usize, t: f64, params: &ProcessParams, tol: f64) -> Result<ProbVector> {
    check_time(t, "pmf_vector")?;
    if trunc == 0 {
        return Err(Error::domain("pmf_vector", "truncation must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(
            "pmf_vector",
            format!("tolerance must be positive, got {tol}"),
        ));
    }
    let x = params.scaled_time(t);
    let beta = params.beta();
    // warm the shared Γ table before fanning out
    hp::inv_gamma_table(beta, 2 * trunc + 64);
    let entries: Vec<SeriesValue> = (0..trunc as u32)
        .into_par_iter()
        .map(|n| pmf_scaled(n, x, beta, tol))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let err: f64 = entries.iter().map(|e| e.error).sum();
    let complement = (1.0 - values.iter().sum::<f64>() + err).max(0.0);
    let tail_bound = markov_tail_bound(trunc, x, beta).min(complement).min(1.0);
    Ok(ProbVector {
        params: *params,
        time: t,
        values,
        tail_bound,
    })
}

/// Probability generating function `G(s, t) = E_β(λ t^β (s − 1))`.
pub fn generating_function(s: f64, t: f64, params: &ProcessParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain(
            "generating_function",
            format!("s must lie in [0, 1], got {s}"),
        ));
    }
    check_time(t, "generating_function")?;
    specfun::mittag_leffler(params.beta(), params.scaled_time(t) * (s - 1.0))
}

/// Factorial moment `E[N(N−1)…(N−k+1)] = k! (λ t^β)^k / Γ(βk + 1)`.
pub fn factorial_moment(k: u32, t: f64, params: &ProcessParams) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain(
            "factorial_moment",
            "order must be at least 1",
        ));
    }
    check_time(t, "factorial_moment")?;
    let x = params.scaled_time(t);
    if x == 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let log_m = lgamma(kf + 1.0) + kf * x.ln() - lgamma(params.beta() * kf + 1.0);
    if log_m > f64::MAX.ln() {
        return Err(Error::overflow(
            "factorial_moment",
            format!("moment of order {k} at t = {t} exceeds the f64 range"),
        ));
    }
    Ok(log_m.exp())
}

fn log_binomial(k: f64, n: f64) -> f64 {
    lgamma(k + 1.0) - lgamma(n + 1.0) - lgamma(k - n + 1.0)
}

/// Upper bound on `|Σ_{j>j_cut} C(j, n) φ(j, t)|`.
///
/// The ratio of consecutive terms is non-increasing in `j` (log-convexity
/// of Γ), so once it is at most 1/2 the remainder is below
/// `T(j_cut+1) / (1 − ratio)`. Returns `+∞` when the ratio is still above
/// 1/2 at `j_cut`; the caller should extend the sum.
pub fn series_tail_bound(n: u32, j_cut: u32, t: f64, params: &ProcessParams) -> Result<f64> {
    if j_cut < n {
        return Err(Error::domain(
            "series_tail_bound",
            format!("cutoff {j_cut} must be >= n = {n}"),
        ));
    }
    check_time(t, "series_tail_bound")?;
    let x = params.scaled_time(t);
    if x == 0.0 {
        return Ok(0.0);
    }
    let beta = params.beta();
    let j = j_cut as f64;
    let nf = n as f64;
    let ratio = (j + 1.0) / (j + 1.0 - nf)
        * x
        * (lgamma(beta * j + 1.0) - lgamma(beta * (j + 1.0) + 1.0)).exp();
    if ratio > 0.5 {
        return Ok(f64::INFINITY);
    }
    let log_next = log_binomial(j + 1.0, nf) + (j + 1.0) * x.ln() - lgamma(beta * (j + 1.0) + 1.0);
    Ok(log_next.exp() / (1.0 - ratio) * (1.0 + 1e-9))
}

/// Coefficients `a_j` of `dP(n)/dτ = Σ_j a_j v^{j-1}` (signs included),
/// truncated where the terms at `v_max` become negligible.
fn tau_derivative_coeffs(n: u32, v_max: f64, params: &ProcessParams) -> Result<Vec<(u32, f64)>> {
    let beta = params.beta();
    let lambda = params.lambda();
    let first = n.max(1);
    let mut coeffs = Vec::new();
    let mut j = first;
    let mut abs_sum = 0.0f64;
    let mut max_term = 0.0f64;
    loop {
        let jf = j as f64;
        let log_a =
            log_binomial(jf, n as f64) + jf.ln() + jf * lambda.ln() - lgamma(beta * jf + 1.0);
        let a = log_a.exp();
        let sign = if (n + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        coeffs.push((j, sign * a));
        let at_max = a * v_max.powi(j as i32 - 1);
        abs_sum += at_max;
        max_term = max_term.max(at_max);
        if j > first + 5 && at_max < 1e-18 * abs_sum.max(1e-300) {
            break;
        }
        if j - first > 5_000 {
            return Err(Error::precision(
                "caputo_residual",
                "derivative series does not converge",
            ));
        }
        j += 1;
    }
    if max_term * f64::EPSILON > 1e-9 {
        return Err(Error::precision(
            "caputo_residual",
            format!("derivative series cancels too strongly (largest term {max_term:e})"),
        ));
    }
    Ok(coeffs)
}

fn eval_tau_derivative(coeffs: &[(u32, f64)], v: f64) -> f64 {
    coeffs
        .iter()
        .rev()
        .fold(0.0, |acc, &(j, a)| acc + a * v.powi(j as i32 - 1))
}

/// Caputo derivative of `P(n, ·)` at `t` minus the right-hand side
/// `λ (P(n−1, t) − P(n, t))` of the fractional Kolmogorov-Feller equation.
///
/// The convolution integral is split at `t/2`. On the left part the
/// substitution `v = s^β` removes the `s^{β−1}` singularity of the
/// derivative; on the right part `u = (t − s)^{1−β}` removes the kernel
/// singularity. Both pieces go to adaptive Gauss–Kronrod quadrature.
pub fn caputo_residual(n: u32, t: f64, params: &ProcessParams, quad_tol: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(
            "caputo_residual",
            format!("t must be positive, got {t}"),
        ));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::domain(
            "caputo_residual",
            "quadrature tolerance must be positive",
        ));
    }
    let beta = params.beta();
    let lambda = params.lambda();
    let coeffs = tau_derivative_coeffs(n, t.powf(beta), params)?;
    let caputo = if beta == 1.0 {
        eval_tau_derivative(&coeffs, t)
    } else {
        let half = 0.5 * t;
        let left = quad::integrate(
            |v: f64| eval_tau_derivative(&coeffs, v) * (t - v.powf(1.0 / beta)).powf(-beta),
            0.0,
            half.powf(beta),
            0.25 * quad_tol,
            4000,
        )?
        .0;
        let right = quad::integrate(
            |u: f64| {
                let s = t - u.powf(1.0 / (1.0 - beta));
                eval_tau_derivative(&coeffs, s.powf(beta)) * beta * s.powf(beta - 1.0)
            },
            0.0,
            half.powf(1.0 - beta),
            0.25 * quad_tol * (1.0 - beta),
            4000,
        )?
        .0 / (1.0 - beta);
        (left + right) / specfun::gamma(1.0 - beta)?
    };
    let x = params.scaled_time(t);
    let p_n = pmf_scaled(n, x, beta, 1e-16)?.value;
    let p_prev = if n == 0 {
        0.0
    } else {
        pmf_scaled(n - 1, x, beta, 1e-16)?.value
    };
    Ok(caputo - lambda * (p_prev - p_n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, lambda: f64) -> ProcessParams {
        ProcessParams::new(beta, lambda).unwrap()
    }

    fn poisson(n: u32, mu: f64) -> f64 {
        (-mu + n as f64 * mu.ln() - lgamma(n as f64 + 1.0)).exp()
    }

    #[test]
    fn phi_examples() {
        let p = params(0.7, 2.0);
        assert_eq!(phi(0, 3.0, &p).unwrap().value, 1.0);
        assert!((phi(1, 1.0, &params(1.0, 1.0)).unwrap().value + 1.0).abs() < 1e-15);
        assert!((phi(2, 1.0, &params(0.5, 1.0)).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_sign_alternates() {
        let p = params(0.6, 1.5);
        for j in 0..40 {
            let v = phi(j, 2.0, &p).unwrap().value;
            assert!(v != 0.0);
            assert_eq!(v > 0.0, j % 2 == 0);
        }
    }

    #[test]
    fn phi_overflow() {
        assert!(matches!(
            phi(100_000, 1e6, &params(0.1, 1.0)),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn pmf_zero_is_mittag_leffler() {
        for &beta in &[0.4, 0.7, 1.0] {
            let p = params(beta, 1.3);
            for &t in &[0.1, 1.0, 3.0] {
                let a = pmf(0, t, &p, 1e-14).unwrap();
                let b = specfun::mittag_leffler(beta, -p.scaled_time(t)).unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pmf_initial_condition() {
        let p = params(0.7, 1.0);
        assert_eq!(pmf(0, 0.0, &p, 1e-12).unwrap(), 1.0);
        assert_eq!(pmf(3, 0.0, &p, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn pmf_poisson_example() {
        let v = pmf(2, 1.0, &params(1.0, 1.0), 1e-16).unwrap();
        assert!((v - 0.183_939_720_585_721_2).abs() < 1e-15);
        assert!((v - poisson(2, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn pmf_beta_one_exact() {
        let p = params(1.0, 1.0);
        for &t in &[0.5, 2.0, 5.0, 10.0] {
            for n in 0..=30 {
                let v = pmf(n, t, &p, 1e-14).unwrap();
                assert!((v - poisson(n, t)).abs() <= 1e-12, "t = {t}, n = {n}");
            }
        }
    }

    #[test]
    fn pmf_rejects_bad_arguments() {
        let p = params(0.7, 1.0);
        assert!(matches!(pmf(0, -1.0, &p, 1e-12), Err(Error::Domain { .. })));
        assert!(matches!(pmf(0, 1.0, &p, 0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn pmf_vector_at_zero() {
        let v = pmf_vector(5, 0.0, &params(0.7, 1.0), 1e-12).unwrap();
        assert_eq!(v.values(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.tail_bound(), 0.0);
    }

    #[test]
    fn pmf_vector_poisson() {
        let v = pmf_vector(40, 1.0, &params(1.0, 1.0), 1e-16).unwrap();
        for (n, &p) in v.values().iter().enumerate() {
            assert!((p - poisson(n as u32, 1.0)).abs() < 1e-14);
        }
        assert!((v.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pmf_vector_normalization() {
        let v = pmf_vector(60, 2.0, &params(0.7, 1.0), 1e-10).unwrap();
        assert!(v.normalization_defect() <= 1e-9);
        // small truncations still satisfy the invariant through the complement
        let v = pmf_vector(1, 1.0, &params(0.5, 1.0), 1e-12).unwrap();
        assert!(v.normalization_defect() <= 1e-9);
    }

    #[test]
    fn markov_bound_is_an_upper_bound() {
        let p = params(0.7, 1.0);
        let full = pmf_vector(80, 2.0, &p, 1e-15).unwrap();
        for trunc in [2usize, 5, 10, 20] {
            let true_tail: f64 = full.values()[trunc..].iter().sum();
            let bound = markov_tail_bound(trunc, p.scaled_time(2.0), 0.7);
            assert!(bound >= true_tail, "N = {trunc}");
        }
    }

    #[test]
    fn generating_function_examples() {
        let p = params(0.7, 1.0);
        assert_eq!(generating_function(1.0, 2.0, &p).unwrap(), 1.0);
        let g0 = generating_function(0.0, 2.0, &p).unwrap();
        assert!((g0 - pmf(0, 2.0, &p, 1e-14).unwrap()).abs() < 1e-14);
        let direct: f64 = (0..60)
            .map(|n| 0.5f64.powi(n) * pmf(n as u32, 1.0, &p, 1e-14).unwrap())
            .sum();
        assert!((generating_function(0.5, 1.0, &p).unwrap() - direct).abs() < 1e-9);
        assert!(generating_function(1.5, 1.0, &p).is_err());
    }

    #[test]
    fn factorial_moment_examples() {
        let p = params(1.0, 2.5);
        assert!((factorial_moment(1, 3.0, &p).unwrap() - 7.5).abs() < 1e-13);
        let p = params(0.5, 1.0);
        let pm: Vec<f64> = (0..80).map(|n| pmf(n, 1.0, &p, 1e-15).unwrap()).collect();
        let m1: f64 = pm.iter().enumerate().map(|(n, v)| n as f64 * v).sum();
        let m2: f64 = pm
            .iter()
            .enumerate()
            .map(|(n, v)| (n * n.saturating_sub(1)) as f64 * v)
            .sum();
        let f1 = factorial_moment(1, 1.0, &p).unwrap();
        assert!((f1 - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        assert!((f1 - m1).abs() < 1e-12);
        let f2 = factorial_moment(2, 1.0, &p).unwrap();
        assert!((f2 - 2.0).abs() < 1e-13);
        assert!((f2 - m2).abs() < 1e-11);
        assert!(factorial_moment(0, 1.0, &p).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        let p = params(0.7, 1.0);
        assert_eq!(series_tail_bound(3, 5, 0.0, &p).unwrap(), 0.0);

        // exact remainder of the e^{-1} expansion past j = 20
        let p1 = params(1.0, 1.0);
        let b = series_tail_bound(0, 20, 1.0, &p1).unwrap();
        let next = (-lgamma(22.0)).exp();
        let exact: f64 = (21..40).map(|j| (-lgamma(j as f64 + 1.0)).exp()).sum();
        assert!(b <= 2.0 * next * (1.0 + 1e-9));
        assert!(b >= exact);

        assert!(series_tail_bound(2, 1, 1.0, &p).is_err());
        assert_eq!(series_tail_bound(0, 1, 50.0, &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn tail_bound_dominates_high_precision_remainder() {
        // remainder Σ_{j>40} C(j,2) φ(j) from a 200-term reference sum
        let p = params(0.7, 1.0);
        let tab = hp::inv_gamma_table(0.7, 260);
        let mut rem = Float::with_val(WORK_PREC, 0);
        for j in 41u32..240 {
            let c = Float::with_val(WORK_PREC, j) * (j - 1) / 2u32;
            let term = c * &tab[j as usize];
            if j % 2 == 0 {
                rem += term;
            } else {
                rem -= term;
            }
        }
        let b = series_tail_bound(2, 40, 1.0, &p).unwrap();
        assert!(b >= rem.to_f64().abs());
        // first omitted term is C(40, 2) / Γ(29) ≈ 2.6e-27
        assert!(b < 1e-25);
    }

    #[test]
    fn caputo_residual_examples() {
        let r = caputo_residual(0, 1.0, &params(1.0, 1.0), 1e-10).unwrap();
        assert!(r.abs() <= 1e-8, "{r}");
        let r = caputo_residual(0, 1.0, &params(0.5, 1.0), 1e-10).unwrap();
        assert!(r.abs() <= 1e-6, "{r}");
        let r = caputo_residual(3, 2.0, &params(0.7, 1.0), 1e-10).unwrap();
        assert!(r.abs() <= 1e-6, "{r}");
    }

    #[test]
    fn caputo_residual_rejects_non_positive_time() {
        let p = params(0.5, 1.0);
        assert!(matches!(
            caputo_residual(0, 0.0, &p, 1e-10),
            Err(Error::Domain { .. })
        ));
        let r = caputo_residual(1, 0.5, &p, 1e-10).unwrap();
        assert!(r.abs() <= 1e-6, "{r}");
    }
}
