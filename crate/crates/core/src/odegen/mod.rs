//! ODE representation of the fractional Poisson process.
//!
//! In transformed time `τ = t^β` the probabilities obey the infinite linear
//! system
//!
//! ```text
//! dP(n)/dτ = Σ_{k≥n−1} A(n, k) P(k)
//! A(n, k)  = (−1)^{n+1} (λ/β) Σ_{j=n−1}^{k} (−1)^j C(j+1, n) C(k, j) Γ(βj+1) / Γ(βj+β)
//! ```
//!
//! with `A(n, k) = 0` for `k < n − 1`. The coefficients are alternating
//! sums whose terms reach `~3^k`, so they are evaluated with MPFR at a
//! precision raised until the cancellation is provably harmless.

mod stepper;

pub use stepper::{integrate, OdeSystem, StepOptions, StepStats};

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::analytic::pmf_scaled;
use crate::error::{Error, Result};
use crate::hp::{self, WORK_PREC};
use crate::specfun::ProcessParams;

const MAX_PREC: u32 = 8192;

/// Largest mass defect `|Σ P − 1|` tolerated on a trajectory.
pub const MASS_DEFECT_LIMIT: f64 = 1e-6;

fn round_prec(bits: f64) -> u32 {
    let b = bits.ceil().clamp(128.0, MAX_PREC as f64) as u32;
    b.div_ceil(256) * 256
}

/// Raw sum for `A(n, k)` at `prec` bits: value and largest term magnitude,
/// both already scaled by `(−1)^{n+1} λ`.
fn coefficient_at(n: u32, k: u32, beta: f64, lambda: f64, prec: u32) -> (Float, f64) {
    let ratios = hp::rate_ratio_table(beta, prec, k as usize + 1);
    let mut sum = Float::with_val(prec, 0);
    let mut max_term = 0.0f64;
    for j in n.saturating_sub(1)..=k {
        let c =
            Integer::from(Integer::binomial_u(j + 1, n)) * Integer::from(Integer::binomial_u(k, j));
        let term = Float::with_val(prec, &c) * &ratios[j as usize];
        max_term = max_term.max(term.to_f64());
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum *= lambda;
    if n.is_multiple_of(2) {
        sum = -sum;
    }
    (sum, max_term * lambda)
}

/// Generator coefficient `A(n, k)`.
///
/// Structural zeros (`k < n − 1`) are returned exactly. Otherwise the
/// working precision is raised until `max term · ε ≤ 1e-9 |A| + 1e-300`;
/// failure at the precision cap is a precision error naming `(n, k)`.
pub fn coefficient(n: u32, k: u32, params: &ProcessParams) -> Result<f64> {
    if k + 1 < n {
        return Ok(0.0);
    }
    let (beta, lambda) = (params.beta(), params.lambda());
    let mut prec = WORK_PREC;
    loop {
        let (value, max_term) = coefficient_at(n, k, beta, lambda, prec);
        let v = value.to_f64();
        let eps = hp::eps_of(prec);
        let allowed = 1e-9 * v.abs() + 1e-300;
        if max_term * eps <= allowed {
            return Ok(v);
        }
        if prec >= MAX_PREC {
            return Err(Error::precision(
                "coefficient",
                format!("A({n}, {k}) cancels below resolution even at {prec} bits"),
            ));
        }
        // bits needed for the observed cancellation, with margin
        let needed = 1.0 + (max_term / allowed).log2() + 32.0;
        prec = round_prec(needed).max(2 * prec).min(MAX_PREC);
    }
}

#[cfg(test)]
#[test]
fn round_prec_saturates() {
    assert_eq!(round_prec(f64::INFINITY), MAX_PREC);
    assert_eq!(round_prec(300.0), 512);
}

/// Truncated `N × N` block of the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    size: usize,
    params: ProcessParams,
    /// row-major
    entries: Vec<f64>,
    column_complete: Vec<bool>,
}

/// Counts of strictly positive / negative / zero entries in a region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignCounts {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl GeneratorMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn params(&self) -> ProcessParams {
        self.params
    }

    pub fn entry(&self, n: usize, k: usize) -> f64 {
        self.entries[n * self.size + k]
    }

    /// Column `k` holds its full support `n = 0..=k+1` inside the block.
    pub fn column_complete(&self, k: usize) -> bool {
        self.column_complete[k]
    }

    pub fn column_sum(&self, k: usize) -> f64 {
        (0..self.size).map(|n| self.entry(n, k)).sum()
    }

    pub fn column_abs_sum(&self, k: usize) -> f64 {
        (0..self.size).map(|n| self.entry(n, k).abs()).sum()
    }

    /// `out = A p`, using the Hessenberg shape (row `n` starts at `k = n−1`).
    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        let size = self.size;
        for (n, o) in out.iter_mut().enumerate().take(size) {
            let row = &self.entries[n * size..(n + 1) * size];
            let start = n.saturating_sub(1);
            *o = row[start..]
                .iter()
                .zip(&p[start..])
                .map(|(a, x)| a * x)
                .sum();
        }
    }

    /// Sign pattern of the gain entries above the diagonal.
    pub fn upper_sign_pattern(&self) -> SignCounts {
        let mut c = SignCounts::default();
        for n in 0..self.size {
            for k in n + 1..self.size {
                let v = self.entry(n, k);
                if v > 0.0 {
                    c.positive += 1;
                } else if v < 0.0 {
                    c.negative += 1;
                } else {
                    c.zero += 1;
                }
            }
        }
        c
    }
}

impl OdeSystem for GeneratorMatrix {
    fn dim(&self) -> usize {
        self.size
    }

    fn rhs(&self, _tau: f64, y: &[f64], dy: &mut [f64]) {
        self.apply(y, dy);
    }
}

/// Relative tolerance on complete-column sums.
pub const COLUMN_SUM_TOL: f64 = 1e-9;

/// Assembles the `N × N` generator block. Columns are computed in
/// parallel; every complete column is checked to sum to zero.
pub fn generator_matrix(size: usize, params: &ProcessParams) -> Result<GeneratorMatrix> {
    if size < 2 {
        return Err(Error::domain(
            "generator_matrix",
            "truncation must be at least 2",
        ));
    }
    hp::rate_ratio_table(params.beta(), WORK_PREC, size);
    let columns: Vec<Vec<f64>> = (0..size as u32)
        .into_par_iter()
        .map(|k| {
            (0..size as u32)
                .map(|n| coefficient(n, k, params))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; size * size];
    for (k, col) in columns.iter().enumerate() {
        for (n, &v) in col.iter().enumerate() {
            entries[n * size + k] = v;
        }
    }
    let column_complete: Vec<bool> = (0..size).map(|k| k + 2 <= size).collect();
    let gen = GeneratorMatrix {
        size,
        params: *params,
        entries,
        column_complete,
    };
    for k in (0..size).filter(|&k| gen.column_complete[k]) {
        let s = gen.column_sum(k);
        if s.abs() > COLUMN_SUM_TOL * gen.column_abs_sum(k) {
            return Err(Error::precision(
                "generator_matrix",
                format!("column {k} sums to {s:e}, violating conservation"),
            ));
        }
    }
    Ok(gen)
}

/// `τ = t^β`.
pub fn tau_of_t(t: f64, beta: f64) -> f64 {
    t.powf(beta)
}

/// `t = τ^{1/β}`.
pub fn t_of_tau(tau: f64, beta: f64) -> f64 {
    tau.powf(1.0 / beta)
}

/// Solution of the truncated system on a τ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ProcessParams,
    /// Starts at τ = 0.
    pub tau_grid: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `|Σ P − 1|` at each grid point.
    pub mass_defects: Vec<f64>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn max_mass_defect(&self) -> f64 {
        self.mass_defects.iter().cloned().fold(0.0, f64::max)
    }
}

/// Integrates `dP/dτ = A P` from `P(n, 0) = δ(n, 0)` up to `tau_end`,
/// reporting states at the caller's τ points (plus `tau_end`).
pub fn evolve(
    gen: &GeneratorMatrix,
    tau_end: f64,
    grid: &[f64],
    step_tol: f64,
) -> Result<Trajectory> {
    if !(tau_end > 0.0 && tau_end.is_finite()) {
        return Err(Error::domain(
            "evolve",
            format!("tau_end must be positive, got {tau_end}"),
        ));
    }
    let mut outputs = Vec::with_capacity(grid.len() + 1);
    for &tau in grid {
        if !(tau > 0.0 && tau <= tau_end) {
            return Err(Error::domain(
                "evolve",
                format!("grid point {tau} outside (0, {tau_end}]"),
            ));
        }
        if outputs.last().is_some_and(|&last| tau <= last) {
            return Err(Error::domain("evolve", "grid must be strictly ascending"));
        }
        outputs.push(tau);
    }
    if outputs.last().is_none_or(|&last| last < tau_end) {
        outputs.push(tau_end);
    }
    let mut y0 = vec![0.0; gen.size()];
    y0[0] = 1.0;
    let (states, stats) = integrate(gen, 0.0, &y0, &outputs, &StepOptions::new(step_tol))?;

    let mut tau_grid = vec![0.0];
    tau_grid.extend_from_slice(&outputs);
    let mut all_states = vec![y0];
    all_states.extend(states);
    let mass_defects: Vec<f64> = all_states
        .iter()
        .map(|s| (s.iter().sum::<f64>() - 1.0).abs())
        .collect();
    for (tau, &d) in tau_grid.iter().zip(&mass_defects) {
        if d > MASS_DEFECT_LIMIT {
            return Err(Error::Conservation {
                tau: *tau,
                defect: d,
                limit: MASS_DEFECT_LIMIT,
            });
        }
    }
    Ok(Trajectory {
        params: gen.params(),
        tau_grid,
        states: all_states,
        mass_defects,
        stats,
    })
}

/// Evaluates the right side of the τ-equation for `P(n)` two ways and
/// returns the absolute difference:
///
/// 1. the φ-form `(−1)^{n+1} λ Σ_j C(j+1, n) Γ(βj+1)/(β Γ(βj+β)) φ(j, τ)`,
/// 2. the generator form `Σ_k A(n, k) P(k, τ)`,
///
/// both truncated at `n_terms` indices. Their agreement is the numerical
/// counterpart of swapping the order of summation in the double series.
pub fn proofstep_check(n: u32, tau: f64, params: &ProcessParams, n_terms: u32) -> Result<f64> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::domain(
            "proofstep_check",
            format!("tau must be >= 0, got {tau}"),
        ));
    }
    if n_terms <= n {
        return Err(Error::domain("proofstep_check", "n_terms must exceed n"));
    }
    let (phi_form, gen_form) = proofstep_sides(n, tau, params, n_terms)?;
    Ok((phi_form - gen_form).abs())
}

/// Both sides of [`proofstep_check`].
pub fn proofstep_sides(
    n: u32,
    tau: f64,
    params: &ProcessParams,
    n_terms: u32,
) -> Result<(f64, f64)> {
    let (beta, lambda) = (params.beta(), params.lambda());
    let x = lambda * tau;
    let len = n_terms as usize + 1;
    let ratios = hp::rate_ratio_table(beta, WORK_PREC, len);
    let inv_gamma = hp::inv_gamma_table(beta, len);
    let xf = hp::float(WORK_PREC, x);
    let mut sum = Float::with_val(WORK_PREC, 0);
    let mut max_term = 0.0f64;
    for j in n.saturating_sub(1)..n_terms {
        let c = Integer::from(Integer::binomial_u(j + 1, n));
        let power = Float::with_val(WORK_PREC, (&xf).pow(j));
        let term =
            Float::with_val(WORK_PREC, &c) * &ratios[j as usize] * &inv_gamma[j as usize] * power;
        max_term = max_term.max(term.to_f64());
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if max_term * hp::work_eps() > crate::specfun::CANCELLATION_LIMIT {
        return Err(Error::precision(
            "proofstep_check",
            format!("phi-form cancels too strongly (largest term {max_term:e})"),
        ));
    }
    sum *= lambda;
    if n.is_multiple_of(2) {
        sum = -sum;
    }
    let phi_form = sum.to_f64();

    let mut gen_form = 0.0;
    for k in n.saturating_sub(1)..n_terms {
        let a = coefficient(n, k, params)?;
        let p = pmf_scaled(k, x, beta, 1e-30)?.value;
        gen_form += a * p;
    }
    Ok((phi_form, gen_form))
}
