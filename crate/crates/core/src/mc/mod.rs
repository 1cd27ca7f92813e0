//! Monte Carlo renewal simulation of the fractional Poisson process.
//!
//! Waiting times are i.i.d. with `prob(T < t) = 1 − E_β(−λ t^β)`; arrivals
//! are their partial sums. For `β < 1` the waiting time has infinite mean,
//! so single draws can be astronomically long. The horizon only bounds how
//! many arrivals are kept, not how long a draw can be.
//!
//! Path `i` of a batch draws from the ChaCha8 stream `i` of the master seed,
//! so a batch is identical for any number of worker threads.

mod stats;
mod survival;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specfun::ProcessParams;

pub use stats::{
    chi_square_gof, kolmogorov_sf, ks_critical_value, ks_test, mean_and_stderr, within_sigmas,
    ChiSquareResult, KsResult, MIN_EXPECTED,
};
pub use survival::{
    inverse_cdf, sample_waiting_time, survival, survival_scaled, SurvivalTable, PROB_TOL,
    SURVIVAL_FLOOR, T_MIN,
};

/// Draw budget per path before a simulation is declared runaway.
pub const MAX_DRAWS: u64 = 1_000_000_000;

/// Arrival times of one realization on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    arrival_times: Vec<f64>,
    horizon: f64,
}

impl SamplePath {
    pub fn arrival_times(&self) -> &[f64] {
        &self.arrival_times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `N(t)`, the number of arrivals at or before `t`.
    pub fn count_at(&self, t: f64) -> usize {
        self.arrival_times.partition_point(|&a| a <= t)
    }
}

/// RNG for path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_horizon(t_end: f64) -> Result<()> {
    if t_end > 0.0 && t_end.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            "simulate_path",
            format!("horizon must be finite and > 0, got {t_end}"),
        ))
    }
}

fn path_from_table<R: Rng + ?Sized>(
    table: &SurvivalTable,
    rng: &mut R,
    t_end: f64,
) -> Result<SamplePath> {
    let mut arrivals = Vec::new();
    let mut t = 0.0;
    let mut draws = 0u64;
    loop {
        draws += 1;
        if draws > MAX_DRAWS {
            return Err(Error::Runaway {
                message: format!("more than {MAX_DRAWS} waiting times before t = {t_end}"),
            });
        }
        t += table.sample(rng)?;
        if t > t_end {
            break;
        }
        arrivals.push(t);
    }
    Ok(SamplePath {
        arrival_times: arrivals,
        horizon: t_end,
    })
}

/// One renewal path up to `t_end`.
pub fn simulate_path<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ProcessParams,
    t_end: f64,
) -> Result<SamplePath> {
    check_horizon(t_end)?;
    let table = SurvivalTable::for_params(params)?;
    path_from_table(&table, rng, t_end)
}

/// `count` independent paths; path `i` uses [`path_rng`]`(seed, i)`.
pub fn simulate_paths(
    seed: u64,
    count: usize,
    params: &ProcessParams,
    t_end: f64,
) -> Result<Vec<SamplePath>> {
    check_horizon(t_end)?;
    let table = SurvivalTable::for_params(params)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| path_from_table(&table, &mut path_rng(seed, i), t_end))
        .collect()
}

/// `count` waiting-time draws; draw `i` uses [`path_rng`]`(seed, i)`.
pub fn sample_waiting_times(seed: u64, count: usize, params: &ProcessParams) -> Result<Vec<f64>> {
    let table = SurvivalTable::for_params(params)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| table.sample(&mut path_rng(seed, i)))
        .collect()
}

/// Histogram of `N(t)` over a batch of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPmf {
    time: f64,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalPmf {
    pub fn from_counts(time: f64, counts: Vec<u64>) -> Result<Self> {
        if !(time >= 0.0) {
            return Err(Error::domain(
                "EmpiricalPmf",
                format!("time must be >= 0, got {time}"),
            ));
        }
        let total = counts.iter().sum();
        Ok(Self {
            time,
            counts,
            total,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `counts()[n]` paths had `N(t) = n`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn frequency(&self, n: usize) -> f64 {
        self.counts.get(n).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(n, &c)| n as f64 * c as f64)
            .sum();
        s / self.total as f64
    }

    /// Mean of `N(t)` with its standard error.
    pub fn mean_and_stderr(&self) -> (f64, f64) {
        let m = self.total as f64;
        let mean = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(n, &c)| c as f64 * (n as f64 - mean).powi(2))
            .sum();
        if self.total < 2 {
            return (mean, f64::INFINITY);
        }
        (mean, (ss / (m - 1.0) / m).sqrt())
    }
}

pub fn empirical_pmf(paths: &[SamplePath], t: f64) -> Result<EmpiricalPmf> {
    if !(t >= 0.0) {
        return Err(Error::domain(
            "empirical_pmf",
            format!("time must be >= 0, got {t}"),
        ));
    }
    let mut counts: Vec<u64> = Vec::new();
    for p in paths {
        if t > p.horizon {
            return Err(Error::domain(
                "empirical_pmf",
                format!(
                    "observation time {t} is beyond a path horizon {}",
                    p.horizon
                ),
            ));
        }
        let n = p.count_at(t);
        if counts.len() <= n {
            counts.resize(n + 1, 0);
        }
        counts[n] += 1;
    }
    EmpiricalPmf::from_counts(t, counts)
}
