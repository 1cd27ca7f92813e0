//! Reproducible command-line runs over the fracpoisson library.

pub mod output;

use std::path::PathBuf;

use clap::ValueEnum;
use log::info;
use serde::Serialize;

use fracpoisson::analytic::pmf_vector;
use fracpoisson::cluster::{cluster_rhs, embed_fpp_generator, linear_cluster_rhs, ClusterSystem};
use fracpoisson::mc::{self, chi_square_gof, empirical_pmf};
use fracpoisson::odegen::{self, evolve, generator_matrix, OdeSystem, StepOptions};
use fracpoisson::ProcessParams;

use output::{Cell, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DEFAULT_BETAS: [f64; 4] = [0.5, 0.7, 0.9, 1.0];
pub const DEFAULT_TIMES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
pub const DEFAULT_TAUS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];
pub const MC_P_THRESHOLD: f64 = 1e-3;

const STEP_TOL: f64 = 1e-12;
const SERIES_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Pmf,
    Generator,
    Validate,
    Simulate,
    Cluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Constant,
    Fpp,
    BirthDeath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimOutput {
    Histogram,
    Arrivals,
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub betas: Vec<f64>,
    pub lambda: f64,
    pub trunc: usize,
    pub n: Option<usize>,
    pub n_max: Option<usize>,
    pub t_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub paths: usize,
    pub with_mc: bool,
    pub family: Family,
    pub coag: f64,
    pub frag: f64,
    pub z: f64,
    pub sim_output: SimOutput,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            betas: Vec::new(),
            lambda: 1.0,
            trunc: 80,
            n: None,
            n_max: None,
            t_grid: Vec::new(),
            tau_grid: Vec::new(),
            tol: None,
            seed: 42,
            paths: 1000,
            with_mc: false,
            family: Family::Constant,
            coag: 1.0,
            frag: 1.0,
            z: 1.0,
            sim_output: SimOutput::Histogram,
            format: Format::Csv,
            out: None,
        }
    }

    /// Re-checks every parameter against the library contracts.
    pub fn validate(&self) -> Result<(), CliError> {
        for &b in &self.betas {
            ProcessParams::new(b, self.lambda)?;
        }
        if self.betas.is_empty() && self.command != Command::Validate {
            ProcessParams::new(1.0, self.lambda)?;
        }
        check_grid("--t/--t-grid", &self.t_grid, true)?;
        check_grid("--tau-grid", &self.tau_grid, false)?;
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!(
                    "--tol must be positive, got {tol}"
                )));
            }
        }
        if self.trunc == 0 {
            return Err(CliError::Config("--trunc must be at least 1".into()));
        }
        if self.command == Command::Simulate && self.paths == 0 {
            return Err(CliError::Config("--paths must be at least 1".into()));
        }
        if self.with_mc && self.paths == 0 {
            return Err(CliError::Config("--paths must be at least 1".into()));
        }
        for (name, v) in [("--coag", self.coag), ("--frag", self.frag)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(CliError::Config(format!(
                "--z must be positive, got {}",
                self.z
            )));
        }
        Ok(())
    }

    fn single_params(&self) -> Result<ProcessParams, CliError> {
        match self.betas.as_slice() {
            [b] => Ok(ProcessParams::new(*b, self.lambda)?),
            [] => Err(CliError::Config(
                format!("{:?} needs --beta", self.command).to_lowercase(),
            )),
            _ => Err(CliError::Config(
                "this command takes a single --beta".into(),
            )),
        }
    }

    fn times(&self) -> Result<Vec<f64>, CliError> {
        if self.t_grid.is_empty() {
            Err(CliError::Config("--t or --t-grid is required".into()))
        } else {
            Ok(self.t_grid.clone())
        }
    }
}

fn check_grid(name: &str, grid: &[f64], allow_zero: bool) -> Result<(), CliError> {
    for w in grid.windows(2) {
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
            return Err(CliError::Config(format!(
                "{name} must be strictly ascending"
            )));
        }
    }
    for &v in grid {
        let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
        if !ok {
            return Err(CliError::Config(format!("{name} has invalid entry {v}")));
        }
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] fracpoisson::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for usage and domain problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_usage() => 2,
            CliError::Library(_) => 3,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

/// A finished run: the table to emit and, for `validate`, the worst
/// failing check.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub failure: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            1
        } else {
            0
        }
    }
}

fn header(config: &RunConfig, table: &mut Table) {
    table.meta("fracpoisson", VERSION);
    table.meta("command", format!("{:?}", config.command).to_lowercase());
    table.meta(
        "config",
        serde_json::to_string(config).expect("config serializes"),
    );
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let (mut table, failure) = match config.command {
        Command::Pmf => (cmd_pmf(config)?, None),
        Command::Generator => (cmd_generator(config)?, None),
        Command::Validate => cmd_validate(config)?,
        Command::Simulate => (cmd_simulate(config)?, None),
        Command::Cluster => (cmd_cluster(config)?, None),
    };
    let mut meta = Table::default();
    header(config, &mut meta);
    meta.meta.append(&mut table.meta);
    table.meta = meta.meta;
    Ok(Outcome { table, failure })
}

/// Rows `(t, n, P(n, t))` with normalization diagnostics.
pub fn cmd_pmf(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.single_params()?;
    let n_max = config.n_max.or(config.n).unwrap_or(10);
    let tol = config.tol.unwrap_or(SERIES_TOL);
    let mut table = Table::new(&["t", "n", "p_series", "normalization_defect", "tail_bound"]);
    for t in config.times()? {
        let v = pmf_vector(n_max + 1, t, &params, tol)?;
        for (n, &p) in v.values().iter().enumerate() {
            table.push(vec![
                t.into(),
                n.into(),
                p.into(),
                v.normalization_defect().into(),
                v.tail_bound().into(),
            ]);
        }
    }
    Ok(table)
}

/// Triplets `(n, k, A(n, k))` of the truncated generator plus the sum of
/// each column.
pub fn cmd_generator(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.single_params()?;
    let size = config.n.or(config.n_max.map(|m| m + 1)).unwrap_or(10);
    let gen = generator_matrix(size, &params)?;
    let mut table = Table::new(&["n", "k", "a_nk", "column_sum", "column_complete"]);
    for k in 0..size {
        for n in 0..size.min(k + 2) {
            table.push(vec![
                n.into(),
                k.into(),
                gen.entry(n, k).into(),
                gen.column_sum(k).into(),
                gen.column_complete(k).into(),
            ]);
        }
    }
    let signs = gen.upper_sign_pattern();
    table.meta("upper_positive", signs.positive);
    table.meta("upper_negative", signs.negative);
    Ok(table)
}

struct Check {
    beta: f64,
    t: f64,
    diff: f64,
    worst_n: usize,
    tol: f64,
    mass_defect: f64,
    chi2: Option<mc::ChiSquareResult>,
}

impl Check {
    fn ode_ok(&self) -> bool {
        self.diff <= self.tol
    }

    fn mc_ok(&self) -> bool {
        self.chi2.is_none_or(|c| c.p_value > MC_P_THRESHOLD)
    }
}

/// Series versus ODE (and optionally Monte Carlo) on a (β, t) grid.
pub fn cmd_validate(config: &RunConfig) -> Result<(Table, Option<String>), CliError> {
    let betas = if config.betas.is_empty() {
        DEFAULT_BETAS.to_vec()
    } else {
        config.betas.clone()
    };
    let times = if config.t_grid.is_empty() {
        DEFAULT_TIMES.to_vec()
    } else {
        config.t_grid.clone()
    };
    let times: Vec<f64> = times.into_iter().filter(|&t| t > 0.0).collect();
    if times.is_empty() {
        return Err(CliError::Config("validate needs at least one t > 0".into()));
    }
    let n_check = config.n_max.or(config.n).unwrap_or(30).min(config.trunc);
    let mut checks = Vec::new();
    for &beta in &betas {
        let params = ProcessParams::new(beta, config.lambda)?;
        let tol = config.tol.unwrap_or(if beta == 1.0 { 1e-8 } else { 1e-6 });
        info!("validate: beta = {beta}");
        let gen = generator_matrix(config.trunc, &params)?;
        let taus: Vec<f64> = times.iter().map(|&t| odegen::tau_of_t(t, beta)).collect();
        let traj = evolve(&gen, *taus.last().unwrap(), &taus, STEP_TOL)?;
        let paths = if config.with_mc {
            Some(mc::simulate_paths(
                config.seed,
                config.paths,
                &params,
                *times.last().unwrap(),
            )?)
        } else {
            None
        };
        for (i, &t) in times.iter().enumerate() {
            let series = pmf_vector(n_check, t, &params, SERIES_TOL)?;
            let state = &traj.states[i + 1];
            let (mut diff, mut worst_n) = (0.0f64, 0usize);
            for (n, &p) in series.values().iter().enumerate() {
                let d = (state[n] - p).abs();
                if d > diff {
                    diff = d;
                    worst_n = n;
                }
            }
            let chi2 = match &paths {
                Some(paths) => {
                    let emp = empirical_pmf(paths, t)?;
                    Some(chi_square_gof(&emp, &series)?)
                }
                None => None,
            };
            checks.push(Check {
                beta,
                t,
                diff,
                worst_n,
                tol,
                mass_defect: traj.mass_defects[i + 1],
                chi2,
            });
        }
    }

    let mut columns = vec![
        "beta",
        "t",
        "tau",
        "max_abs_diff",
        "worst_n",
        "tolerance",
        "mass_defect",
        "ode_pass",
    ];
    if config.with_mc {
        columns.extend(["chi2_statistic", "chi2_dof", "chi2_p_value", "mc_pass"]);
    }
    let mut table = Table::new(&columns);
    for c in &checks {
        let mut row: Vec<Cell> = vec![
            c.beta.into(),
            c.t.into(),
            odegen::tau_of_t(c.t, c.beta).into(),
            c.diff.into(),
            c.worst_n.into(),
            c.tol.into(),
            c.mass_defect.into(),
            c.ode_ok().into(),
        ];
        if let Some(g) = c.chi2 {
            row.extend([
                g.statistic.into(),
                g.dof.into(),
                g.p_value.into(),
                c.mc_ok().into(),
            ]);
        }
        table.push(row);
    }

    let worst_ode = checks
        .iter()
        .filter(|c| !c.ode_ok())
        .max_by(|a, b| (a.diff / a.tol).total_cmp(&(b.diff / b.tol)));
    let worst_mc = checks
        .iter()
        .filter(|c| !c.mc_ok())
        .min_by(|a, b| a.chi2.unwrap().p_value.total_cmp(&b.chi2.unwrap().p_value));
    let failure = if let Some(c) = worst_ode {
        Some(format!(
            "series vs ODE failed: worst at beta = {}, t = {}, n = {}: |diff| = {:e} > {:e}",
            c.beta, c.t, c.worst_n, c.diff, c.tol
        ))
    } else {
        worst_mc.map(|c| {
            format!(
                "Monte Carlo failed: worst at beta = {}, t = {}: chi-square p = {:e} <= {:e}",
                c.beta,
                c.t,
                c.chi2.unwrap().p_value,
                MC_P_THRESHOLD
            )
        })
    };
    table.meta("result", if failure.is_some() { "fail" } else { "pass" });
    Ok((table, failure))
}

/// Histogram of `N(t)` at the requested times, or raw arrival times.
pub fn cmd_simulate(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.single_params()?;
    let times = config.times()?;
    let horizon = *times.last().unwrap();
    if horizon <= 0.0 {
        return Err(CliError::Config("simulate needs a positive time".into()));
    }
    let paths = mc::simulate_paths(config.seed, config.paths, &params, horizon)?;
    let mut table = match config.sim_output {
        SimOutput::Histogram => {
            let mut table = Table::new(&["t", "n", "count", "frequency"]);
            for &t in &times {
                let emp = empirical_pmf(&paths, t)?;
                for (n, &c) in emp.counts().iter().enumerate() {
                    table.push(vec![t.into(), n.into(), c.into(), emp.frequency(n).into()]);
                }
            }
            table
        }
        SimOutput::Arrivals => {
            let mut table = Table::new(&["path", "index", "arrival_time"]);
            for (i, p) in paths.iter().enumerate() {
                for (j, &a) in p.arrival_times().iter().enumerate() {
                    table.push(vec![i.into(), j.into(), a.into()]);
                }
            }
            table
        }
    };
    table.meta("seed", config.seed);
    table.meta("beta", params.beta());
    table.meta("lambda", params.lambda());
    table.meta("paths", config.paths);
    Ok(table)
}

fn integrate_states<S: OdeSystem>(
    sys: &S,
    y0: &[f64],
    taus: &[f64],
    tol: f64,
) -> Result<Vec<Vec<f64>>, CliError> {
    let (states, _) = odegen::integrate(sys, 0.0, y0, taus, &StepOptions::new(tol))?;
    let mut all = vec![y0.to_vec()];
    all.extend(states);
    Ok(all)
}

/// Trajectory `(τ, n, c_n)` of a cluster system.
pub fn cmd_cluster(config: &RunConfig) -> Result<Table, CliError> {
    let size = config.n.or(config.n_max).unwrap_or(20);
    if size == 0 {
        return Err(CliError::Config("--n must be at least 1".into()));
    }
    let taus = if config.tau_grid.is_empty() {
        DEFAULT_TAUS.to_vec()
    } else {
        config.tau_grid.clone()
    };
    let tol = config.tol.unwrap_or(STEP_TOL);
    let mut meta: Vec<(&str, String)> = vec![("family", format!("{:?}", config.family))];
    let states = match config.family {
        Family::Constant => {
            let (a, b) = (config.coag, config.frag);
            let sys = ClusterSystem::from_fn(size, config.z, |_, _| a, |_, _| b)?;
            integrate_states(&sys, &vec![0.0; size], &taus, tol)?
        }
        Family::BirthDeath => {
            let (a, b) = (config.coag, config.frag);
            let sys = ClusterSystem::birth_death(size, config.z, |_| a, |_| b)?;
            let states = integrate_states(&sys, &vec![0.0; size], &taus, tol)?;
            let mut diff = 0.0f64;
            for s in &states {
                let at = sys
                    .clone()
                    .with_state(s.iter().map(|v| v.max(0.0)).collect())?;
                let lin = linear_cluster_rhs(&at)?;
                for (x, y) in cluster_rhs(&at).iter().zip(&lin) {
                    diff = diff.max((x - y).abs());
                }
            }
            meta.push(("linear_general_max_diff", output::format_float(diff)));
            states
        }
        Family::Fpp => {
            let params = config.single_params()?;
            let gen = generator_matrix(size, &params)?;
            let report = embed_fpp_generator(&gen);
            meta.push(("embedding_residual", output::format_float(report.residual)));
            meta.push((
                "embedding_states_checked",
                report.states_checked.to_string(),
            ));
            meta.push(("fragmentation_negative", report.negative_gains.to_string()));
            meta.push(("fragmentation_positive", report.positive_gains.to_string()));
            let mut y0 = vec![0.0; size];
            y0[0] = 1.0;
            let states = integrate_states(&report.rates, &y0, &taus, tol)?;
            let n_cmp = size.min(30);
            let mut diff = 0.0f64;
            for (s, &tau) in states.iter().skip(1).zip(&taus) {
                let t = odegen::t_of_tau(tau, params.beta());
                let series = pmf_vector(n_cmp, t, &params, SERIES_TOL)?;
                for (c, p) in s.iter().zip(series.values()) {
                    diff = diff.max((c - p).abs());
                }
            }
            meta.push(("max_diff_vs_series", output::format_float(diff)));
            states
        }
    };
    let mut table = Table::new(&["tau", "n", "c_n"]);
    let all_taus = std::iter::once(0.0).chain(taus.iter().copied());
    for (tau, s) in all_taus.zip(&states) {
        for (i, &c) in s.iter().enumerate() {
            table.push(vec![tau.into(), (i + 1).into(), c.into()]);
        }
    }
    for (k, v) in meta {
        table.meta(k, v);
    }
    Ok(table)
}
