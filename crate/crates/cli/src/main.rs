use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use fracpoisson_cli::{run, Command, Family, Format, RunConfig, SimOutput};

/// Fractional Poisson process: series, ODE and Monte Carlo.
#[derive(Parser, Debug)]
#[command(name = "fracpoisson", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// Fractional order in (0, 1]; validate accepts a comma-separated list
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,

    #[arg(long, default_value_t = 1.0)]
    lambda: f64,

    /// Single observation time
    #[arg(long, conflicts_with = "t_grid")]
    t: Option<f64>,

    /// Comma-separated observation times
    #[arg(long, value_delimiter = ',')]
    t_grid: Vec<f64>,

    /// Comma-separated transformed times (cluster)
    #[arg(long, value_delimiter = ',')]
    tau_grid: Vec<f64>,

    /// Matrix or system size
    #[arg(long)]
    n: Option<usize>,

    /// Largest count reported
    #[arg(long)]
    n_max: Option<usize>,

    /// ODE truncation used by validate
    #[arg(long, default_value_t = 80)]
    trunc: usize,

    #[arg(long)]
    tol: Option<f64>,

    #[arg(long, default_value_t = 1000)]
    paths: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Add Monte Carlo goodness-of-fit columns to validate
    #[arg(long)]
    with_mc: bool,

    /// Cluster coefficient family
    #[arg(long, value_enum, default_value_t = Family::Constant)]
    family: Family,

    /// Coagulation coefficient (cluster)
    #[arg(long, default_value_t = 1.0)]
    coag: f64,

    /// Fragmentation coefficient (cluster)
    #[arg(long, default_value_t = 1.0)]
    frag: f64,

    /// Reservoir activity (cluster)
    #[arg(long, default_value_t = 1.0)]
    z: f64,

    /// What simulate emits
    #[arg(long, value_enum, default_value_t = SimOutput::Histogram)]
    emit: SimOutput,
}

impl Cli {
    fn into_config(self) -> RunConfig {
        let mut c = RunConfig::new(self.command);
        c.betas = self.beta;
        c.lambda = self.lambda;
        c.t_grid = match self.t {
            Some(t) => vec![t],
            None => self.t_grid,
        };
        c.tau_grid = self.tau_grid;
        c.n = self.n;
        c.n_max = self.n_max;
        c.trunc = self.trunc;
        c.tol = self.tol;
        c.paths = self.paths;
        c.seed = self.seed;
        c.format = self.format;
        c.out = self.out;
        c.with_mc = self.with_mc;
        c.family = self.family;
        c.coag = self.coag;
        c.frag = self.frag;
        c.z = self.z;
        c.sim_output = self.emit;
        c
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FRACPOISSON_LOG")).init();
    let config = Cli::parse().into_config();
    match run(&config) {
        Ok(outcome) => {
            if let Err(e) = outcome.table.write(config.format, config.out.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if let Some(msg) = &outcome.failure {
                eprintln!("{msg}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
