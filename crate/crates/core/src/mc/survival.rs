//! Waiting-time law `prob(T ≥ t) = E_β(−λ t^β)` and its inversion.
//!
//! The survival function depends on `t` only through `x = λ t^β`, so it is
//! tabulated as `S(x) = E_β(−x)` on a uniform grid in `ln x`. Draws invert
//! the table by root-finding on a monotone cubic Hermite interpolant.
//!
//! Small `x` uses the series from `specfun`. Its cancellation limit stops
//! well short of the `S < 1e-9` tail, so large `x` switches to the
//! negative-axis expansion
//!
//! ```text
//! E_β(−x) = Σ_{k≥1} (−1)^{k+1} x^{−k} / Γ(1 − βk),   0 < β < 1
//! ```
//!
//! truncated at its smallest term.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specfun::{self, lgamma, ProcessParams};

/// Smallest tabulated waiting time.
pub const T_MIN: f64 = 1e-8;
/// The table extends until the survival drops below this.
pub const SURVIVAL_FLOOR: f64 = 1e-9;
/// Accuracy target of the survival evaluation and the inversion.
pub const PROB_TOL: f64 = 1e-10;

const NODES_PER_UNIT: f64 = 200.0;
const SMALL_X: f64 = 1e-6;
const SERIES_FRACTION: f64 = 0.8;
const ASYMPTOTIC_TOL: f64 = 1e-12;

/// Negative-axis expansion of `E_β(−x)`; returns the value and the size of
/// the first omitted term.
fn asymptotic(beta: f64, x: f64) -> (f64, f64) {
    let lx = x.ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 1u32;
    loop {
        let bk = beta * k as f64;
        // 1/Γ(1−βk) = Γ(βk) sin(πβk) / π
        let envelope = (lgamma(bk) - k as f64 * lx).exp() / PI;
        if envelope > prev || k > 400 {
            return (sum, prev);
        }
        if envelope < 1e-17 * sum.abs() {
            return (sum, envelope);
        }
        let term = envelope * (PI * bk).sin();
        sum += if k % 2 == 1 { term } else { -term };
        prev = envelope;
        k += 1;
    }
}

/// Largest `x` summed by the series at this `beta`.
fn series_limit(beta: f64) -> f64 {
    static LIMITS: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let mut map = LIMITS
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .unwrap_or_else(|p| p.into_inner());
    *map.entry(beta.to_bits())
        .or_insert_with(|| SERIES_FRACTION * specfun::mittag_leffler_zmax(beta))
}

/// Survival function on scaled time: `S(x) = E_β(−x)`, `x ≥ 0`.
pub fn survival_scaled(beta: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(
            "survival_scaled",
            format!("x must be >= 0, got {x}"),
        ));
    }
    if beta == 1.0 {
        return Ok((-x).exp());
    }
    if x <= series_limit(beta) {
        return specfun::mittag_leffler(beta, -x);
    }
    let (value, err) = asymptotic(beta, x);
    if err > ASYMPTOTIC_TOL || !(value > 0.0) {
        return Err(Error::precision(
            "survival_scaled",
            format!("no accurate evaluation of E_{beta}(-{x}): expansion error {err:e}"),
        ));
    }
    Ok(value.min(1.0))
}

/// Survival `prob(T ≥ t) = E_β(−λ t^β)` of one waiting time.
pub fn survival(t: f64, params: &ProcessParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(
            "survival",
            format!("t must be >= 0, got {t}"),
        ));
    }
    survival_scaled(params.beta(), params.scaled_time(t))
}

/// Cached tabulation of `S` on a uniform `ln x` grid with monotone cubic
/// Hermite interpolation.
#[derive(Debug)]
pub struct SurvivalTable {
    params: ProcessParams,
    s0: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    gamma_1b: f64,
    gamma_12b: f64,
}

impl SurvivalTable {
    fn build(params: ProcessParams) -> Result<Self> {
        let beta = params.beta();
        let x_lo = params.scaled_time(T_MIN).min(SMALL_X);
        let mut x_hi = if beta == 1.0 {
            -SURVIVAL_FLOOR.ln()
        } else {
            1.0 / (SURVIVAL_FLOOR * specfun::gamma(1.0 - beta)?)
        };
        while survival_scaled(beta, x_hi)? >= SURVIVAL_FLOOR {
            x_hi *= 2.0;
        }
        x_hi = x_hi.max(2.0 * x_lo);
        let h = 1.0 / NODES_PER_UNIT;
        let s0 = x_lo.ln();
        let count = ((x_hi.ln() - s0) / h).ceil() as usize + 1;
        // two extra nodes on each side for the central differences
        let raw: Vec<f64> = (0..count + 4)
            .into_par_iter()
            .map(|i| survival_scaled(beta, (s0 + (i as f64 - 2.0) * h).exp()))
            .collect::<Result<_>>()?;
        for w in raw.windows(2) {
            if w[1] > w[0] {
                return Err(Error::precision(
                    "SurvivalTable",
                    "tabulated survival function is not monotone",
                ));
            }
        }
        let values = raw[2..count + 2].to_vec();
        let secant = |i: usize| (raw[i + 3] - raw[i + 2]) / h;
        let mut slopes: Vec<f64> = (0..count)
            .map(|i| {
                let j = i + 2;
                (-raw[j + 2] + 8.0 * raw[j + 1] - 8.0 * raw[j - 1] + raw[j - 2]) / (12.0 * h)
            })
            .collect();
        // Fritsch-Carlson limiter
        for i in 0..count {
            let left = (raw[i + 2] - raw[i + 1]) / h;
            let right = secant(i);
            let lim = 3.0 * left.abs().min(right.abs());
            if left == 0.0 || right == 0.0 {
                slopes[i] = 0.0;
            } else {
                slopes[i] = slopes[i].clamp(-lim, 0.0);
            }
        }
        Ok(Self {
            params,
            s0,
            h,
            values,
            slopes,
            gamma_1b: specfun::gamma(1.0 + beta)?,
            gamma_12b: specfun::gamma(1.0 + 2.0 * beta)?,
        })
    }

    /// Table for these parameters, built on first use.
    pub fn for_params(params: &ProcessParams) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(u64, u64), Arc<SurvivalTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (params.beta().to_bits(), params.lambda().to_bits());
        let mut map = CACHE
            .get_or_init(|| Mutex::new(HashMap::new()))
            .lock()
            .unwrap_or_else(|p| p.into_inner());
        if let Some(t) = map.get(&key) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(Self::build(*params)?);
        map.insert(key, Arc::clone(&table));
        Ok(table)
    }

    pub fn params(&self) -> ProcessParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn x_at(&self, s: f64) -> f64 {
        s.exp()
    }

    fn t_of_x(&self, x: f64) -> f64 {
        (x / self.params.lambda()).powf(1.0 / self.params.beta())
    }

    /// Covered range of waiting times.
    pub fn t_range(&self) -> (f64, f64) {
        let last = self.s0 + (self.values.len() - 1) as f64 * self.h;
        (
            self.t_of_x(self.x_at(self.s0)),
            self.t_of_x(self.x_at(last)),
        )
    }

    /// Interpolated survival at scaled time `x` inside the table.
    pub fn interpolate(&self, x: f64) -> f64 {
        let s = x.ln();
        let pos = ((s - self.s0) / self.h).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        self.hermite(i, pos - i as f64)
    }

    fn hermite(&self, i: usize, th: f64) -> f64 {
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.h, self.slopes[i + 1] * self.h);
        let th2 = th * th;
        let th3 = th2 * th;
        (2.0 * th3 - 3.0 * th2 + 1.0) * y0
            + (th3 - 2.0 * th2 + th) * d0
            + (-2.0 * th3 + 3.0 * th2) * y1
            + (th3 - th2) * d1
    }

    /// Waiting time `t` with `S(λ t^β) = q`, `0 < q ≤ 1`.
    pub fn inverse_survival(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::domain(
                "inverse_survival",
                format!("survival level must lie in (0, 1], got {q}"),
            ));
        }
        let first = self.values[0];
        let last = *self.values.last().unwrap();
        let x = if q >= first {
            // 1 − S = x/Γ(1+β) − x²/Γ(1+2β) + O(x³)
            let p = 1.0 - q;
            let mut x = p * self.gamma_1b;
            for _ in 0..3 {
                x = (p + x * x / self.gamma_12b) * self.gamma_1b;
            }
            x
        } else if q < last {
            self.beyond_table(q)?
        } else {
            // last index with values[i] >= q
            let i = self.values.partition_point(|&v| v >= q) - 1;
            let i = i.min(self.values.len() - 2);
            let (mut a, mut b) = (0.0f64, 1.0f64);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if self.hermite(i, mid) >= q {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            self.x_at(self.s0 + (i as f64 + 0.5 * (a + b)) * self.h)
        };
        Ok(self.t_of_x(x))
    }

    fn beyond_table(&self, q: f64) -> Result<f64> {
        let beta = self.params.beta();
        if beta == 1.0 {
            return Ok(-q.ln());
        }
        let last = self.s0 + (self.values.len() - 1) as f64 * self.h;
        let (mut a, mut b) = (last, last + 1.0);
        while survival_scaled(beta, b.exp())? >= q {
            a = b;
            b += 2.0 * (b - last);
            if b > 690.0 {
                return Err(Error::precision(
                    "inverse_survival",
                    format!("cannot bracket survival level {q:e}"),
                ));
            }
        }
        for _ in 0..200 {
            if b - a <= 1e-14 * b.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (a + b);
            if survival_scaled(beta, mid.exp())? >= q {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok((0.5 * (a + b)).exp())
    }

    /// Quantile of the waiting time: `prob(T < t) = u`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::domain(
                "inverse_cdf",
                format!("probability must lie in [0, 1), got {u}"),
            ));
        }
        self.inverse_survival(1.0 - u)
    }

    /// One waiting time. The uniform is used as the survival level, which
    /// keeps full resolution in the heavy tail.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        loop {
            let q = 1.0 - rng.random::<f64>();
            if q < 1.0 {
                let t = self.inverse_survival(q)?;
                if t > 0.0 {
                    return Ok(t);
                }
            }
        }
    }
}

/// Draws one Mittag-Leffler waiting time.
pub fn sample_waiting_time<R: Rng + ?Sized>(rng: &mut R, params: &ProcessParams) -> Result<f64> {
    SurvivalTable::for_params(params)?.sample(rng)
}

/// Waiting-time quantile for probability `u`.
pub fn inverse_cdf(u: f64, params: &ProcessParams) -> Result<f64> {
    SurvivalTable::for_params(params)?.inverse_cdf(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(beta: f64, lambda: f64) -> ProcessParams {
        ProcessParams::new(beta, lambda).unwrap()
    }

    #[test]
    fn asymptotic_meets_series_at_switch() {
        for beta in [0.3, 0.5, 0.7, 0.9, 0.95] {
            let x = SERIES_FRACTION * specfun::mittag_leffler_zmax(beta);
            let series = specfun::mittag_leffler(beta, -x).unwrap();
            let (asym, err) = asymptotic(beta, x);
            assert!(err <= ASYMPTOTIC_TOL, "beta {beta}: err {err:e}");
            assert!(
                (series - asym).abs() <= 1e-11,
                "beta {beta}: {series} vs {asym}"
            );
        }
    }

    #[test]
    fn survival_reference_values() {
        let s = survival(1.0, &p(0.5, 1.0)).unwrap();
        assert!((s - 0.427_583_576_155_807).abs() < 1e-12);
        let s = survival(2.0, &p(1.0, 1.5)).unwrap();
        assert!((s - (-3.0f64).exp()).abs() < 1e-15);
        // leading asymptotic term 1/(x Γ(1−β))
        let x = 1e6;
        let s = survival_scaled(0.5, x).unwrap();
        assert!((s * x * PI.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn table_matches_direct_evaluation() {
        for beta in [0.5, 0.7, 1.0] {
            let params = p(beta, 1.0);
            let table = SurvivalTable::for_params(&params).unwrap();
            let (t_lo, t_hi) = table.t_range();
            assert!(t_lo <= T_MIN * 1.0001);
            assert!(survival(t_hi, &params).unwrap() < SURVIVAL_FLOOR);
            for i in 0..400 {
                let x = 1e-5 * 1.07f64.powi(i);
                if x > params.scaled_time(t_hi) {
                    break;
                }
                let exact = survival_scaled(beta, x).unwrap();
                let approx = table.interpolate(x);
                assert!((exact - approx).abs() <= PROB_TOL, "beta {beta}, x {x}");
            }
        }
    }

    #[test]
    fn inversion_round_trip() {
        for beta in [0.5, 0.7, 1.0] {
            let params = p(beta, 2.0);
            let table = SurvivalTable::for_params(&params).unwrap();
            for q in [
                1.0 - 1e-9,
                1.0 - 1e-6,
                0.9,
                0.5,
                0.1,
                1e-3,
                1e-8,
                1e-10,
                1e-14,
            ] {
                let t = table.inverse_survival(q).unwrap();
                let back = survival(t, &params).unwrap();
                assert!(
                    (back - q).abs() <= PROB_TOL.max(1e-6 * q),
                    "beta {beta}, q {q}: {back}"
                );
            }
        }
    }

    #[test]
    fn inverse_cdf_is_monotone_at_extremes() {
        let params = p(0.7, 1.0);
        let lo = inverse_cdf(1e-6, &params).unwrap();
        let mid = inverse_cdf(0.5, &params).unwrap();
        let hi = inverse_cdf(1.0 - 1e-6, &params).unwrap();
        assert!(lo > 0.0 && lo < 1e-6);
        assert!(lo < mid && mid < hi);
        assert!(hi > 1e6);
        assert!(inverse_cdf(0.0, &params).unwrap() == 0.0);
        assert!(inverse_cdf(1.0, &params).is_err());
    }

    #[test]
    fn exponential_quantiles_at_beta_one() {
        let params = p(1.0, 1.0);
        for u in [0.1, 0.5, 0.99] {
            let t = inverse_cdf(u, &params).unwrap();
            assert!((t + (1.0 - u).ln()).abs() < 1e-9);
        }
    }
}
