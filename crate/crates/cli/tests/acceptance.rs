//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracpoisson::analytic::{caputo_residual, factorial_moment, phi, pmf, pmf_vector};
use fracpoisson::cluster::{cluster_rhs, embed_fpp_generator, linear_cluster_rhs, ClusterSystem};
use fracpoisson::mc::{self, chi_square_gof, empirical_pmf, ks_test, within_sigmas};
use fracpoisson::odegen::{evolve, generator_matrix, proofstep_check, t_of_tau, tau_of_t};
use fracpoisson::pascal::{apply_inverse_pascal, apply_pascal, SignedVector};
use fracpoisson::specfun::gamma;
use fracpoisson::ProcessParams;
use fracpoisson_cli::{run, Command, RunConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn params(beta: f64, lambda: f64) -> ProcessParams {
    ProcessParams::new(beta, lambda).unwrap()
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn within_time(limit: Option<Duration>, elapsed: Duration) -> Result<(), String> {
    match limit {
        Some(l) if elapsed > l => Err(format!("runtime {elapsed:.2?} exceeds {l:?}")),
        _ => Ok(()),
    }
}

fn poisson(n: u32, x: f64) -> f64 {
    let mut p = (-x).exp();
    for k in 1..=n {
        p *= x / k as f64;
    }
    p
}

fn c1_classical() -> Outcome {
    let p = params(1.0, 1.0);
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 2.0, 5.0, 10.0] {
        for n in 0..=30 {
            worst = worst.max((pmf(n, t, &p, 1e-15).map_err(fail)? - poisson(n, t)).abs());
        }
    }
    let gen = generator_matrix(80, &p).map_err(fail)?;
    let mut gen_err = 0.0f64;
    for n in 0..80 {
        for k in 0..80 {
            let expect = if n == k {
                -1.0
            } else if n == k + 1 {
                1.0
            } else {
                0.0
            };
            gen_err = gen_err.max((gen.entry(n, k) - expect).abs());
        }
    }
    if worst <= 1e-12 && gen_err <= 1e-10 {
        Ok(format!(
            "max |pmf - Poisson| = {worst:.2e}, generator error = {gen_err:.2e}"
        ))
    } else {
        Err(format!(
            "max |pmf - Poisson| = {worst:.2e}, generator error = {gen_err:.2e}"
        ))
    }
}

fn c2_equivalence() -> Outcome {
    let times = [0.25, 0.5, 1.0, 2.0, 4.0];
    let mut worst = (0.0f64, 0.0, 0.0, 0usize);
    for beta in [0.5, 0.7, 0.9] {
        let p = params(beta, 1.0);
        let gen = generator_matrix(80, &p).map_err(fail)?;
        let taus: Vec<f64> = times.iter().map(|&t| tau_of_t(t, beta)).collect();
        let traj = evolve(&gen, *taus.last().unwrap(), &taus, 1e-12).map_err(fail)?;
        for (i, &t) in times.iter().enumerate() {
            let series = pmf_vector(30, t, &p, 1e-15).map_err(fail)?;
            for (n, &s) in series.values().iter().enumerate() {
                let d = (traj.states[i + 1][n] - s).abs();
                if d > worst.0 {
                    worst = (d, beta, t, n);
                }
            }
        }
    }
    let msg = format!(
        "max |ODE - series| = {:.2e} (beta = {}, t = {}, n = {})",
        worst.0, worst.1, worst.2, worst.3
    );
    if worst.0 <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..1000 {
        let len = rng.random_range(1..=60usize);
        let v: Vec<BigInt> = (0..len)
            .map(|_| BigInt::from(rng.random_range(-1_000_000i64..=1_000_000)))
            .collect();
        let sv = SignedVector::plain(v.clone()).map_err(fail)?;
        let back = apply_inverse_pascal(&apply_pascal(&sv).map_err(fail)?).map_err(fail)?;
        if back.entries() != v.as_slice() {
            return Err(format!("vector {case} (N = {len}) not recovered"));
        }
    }
    Ok("1000 random integer vectors recovered exactly".into())
}

fn c4_rotated_inversion() -> Outcome {
    let p = params(0.7, 1.0);
    let mut worst = 0.0f64;
    for tau in [0.5, 1.0, 2.0, 3.0] {
        let t = t_of_tau(tau, 0.7);
        let probs = pmf_vector(80, t, &p, 1e-30).map_err(fail)?;
        let signed = SignedVector::alternating_from(probs.values().to_vec()).map_err(fail)?;
        let recovered = apply_inverse_pascal(&signed).map_err(fail)?;
        for m in 0..=20u32 {
            let direct = phi(m, tau, &p).map_err(fail)?.value;
            worst = worst.max((recovered.entries()[m as usize] - direct).abs());
        }
    }
    let msg = format!("max |recovered phi - phi| = {worst:.2e}");
    if worst <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_conservation() -> Outcome {
    let mut worst_col = 0.0f64;
    let mut worst_mass = 0.0f64;
    for beta in [0.5, 0.7, 0.9, 1.0] {
        let gen = generator_matrix(80, &params(beta, 1.0)).map_err(fail)?;
        for k in (0..80).filter(|&k| gen.column_complete(k)) {
            worst_col = worst_col.max(gen.column_sum(k).abs() / gen.column_abs_sum(k));
        }
        let grid: Vec<f64> = (1..=30).map(|i| i as f64 * 0.1).collect();
        let traj = evolve(&gen, 3.0, &grid, 1e-12).map_err(fail)?;
        worst_mass = worst_mass.max(traj.max_mass_defect());
    }
    let msg =
        format!("max relative column sum = {worst_col:.2e}, max mass defect = {worst_mass:.2e}");
    if worst_col <= 1e-9 && worst_mass <= 1e-7 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_proofstep() -> Outcome {
    let mut worst = 0.0f64;
    for n in [0u32, 1, 3, 6] {
        for tau in [0.25, 0.5, 1.0, 2.0] {
            for beta in [0.5, 0.7, 0.9] {
                let d = proofstep_check(n, tau, &params(beta, 1.0), 80).map_err(fail)?;
                worst = worst.max(d);
            }
        }
    }
    let msg = format!("max difference over 48 points = {worst:.2e}");
    if worst <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_cluster() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let size = 20;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let gains: Vec<f64> = (0..=size).map(|_| rng.random::<f64>()).collect();
        let frag: Vec<f64> = (0..(size + 1) * (size + 1))
            .map(|_| rng.random::<f64>())
            .collect();
        let state: Vec<f64> = (0..size).map(|_| rng.random::<f64>()).collect();
        let z = 0.5 + rng.random::<f64>();
        let sys = ClusterSystem::linear(
            size,
            z,
            |n| gains[n],
            |n, k| frag[n.min(k) * (size + 1) + n.max(k)],
        )
        .and_then(|s| s.with_state(state))
        .map_err(fail)?;
        let general = cluster_rhs(&sys);
        let linear = linear_cluster_rhs(&sys).map_err(fail)?;
        for (g, l) in general.iter().zip(&linear) {
            worst = worst.max((g - l).abs());
        }
    }
    let mut residual = 0.0f64;
    for beta in [0.5, 0.7, 0.9, 1.0] {
        let gen = generator_matrix(80, &params(beta, 1.0)).map_err(fail)?;
        residual = residual.max(embed_fpp_generator(&gen).residual);
    }
    let msg = format!("max |general - linear| = {worst:.2e}, embedding residual = {residual:.2e}");
    if worst <= 1e-12 && residual <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_monte_carlo() -> Outcome {
    let draws = 100_000;
    let seed = 42;
    let mut parts = Vec::new();
    let mut ok = true;
    for beta in [0.5, 0.7, 1.0] {
        let p = params(beta, 1.0);
        let waits = mc::sample_waiting_times(seed, draws, &p).map_err(fail)?;
        let ks = ks_test(&waits, |t| 1.0 - mc::survival(t, &p).unwrap()).map_err(fail)?;
        let ks_ok = ks.passes(0.01);

        let paths = mc::simulate_paths(seed, draws, &p, 1.0).map_err(fail)?;
        let emp = empirical_pmf(&paths, 1.0).map_err(fail)?;
        let model = pmf_vector(60, 1.0, &p, 1e-15).map_err(fail)?;
        let chi = chi_square_gof(&emp, &model).map_err(fail)?;
        let (mean, se) = emp.mean_and_stderr();
        let expect = p.lambda() / gamma(beta + 1.0).map_err(fail)?;
        let mean_ok = within_sigmas(mean, expect, se, 3.0);
        let fm = factorial_moment(1, 1.0, &p).map_err(fail)?;
        ok &= ks_ok && chi.p_value > 1e-3 && mean_ok && (fm - expect).abs() < 1e-12;
        parts.push(format!(
            "beta {beta}: KS D = {:.2e} (crit {:.2e}), chi2 p = {:.3}, mean {:.4} vs {:.4} ({:.1} se)",
            ks.statistic,
            ks.critical_value(0.01),
            chi.p_value,
            mean,
            expect,
            (mean - expect).abs() / se
        ));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_moments() -> Outcome {
    let mut worst = 0.0f64;
    for beta in [0.5, 0.7, 0.9, 1.0] {
        let p = params(beta, 1.0);
        let v = pmf_vector(80, 1.0, &p, 1e-15).map_err(fail)?;
        let (mut m1, mut m2) = (0.0, 0.0);
        for (n, &q) in v.values().iter().enumerate() {
            let n = n as f64;
            m1 += n * q;
            m2 += n * (n - 1.0) * q;
        }
        let f1 = factorial_moment(1, 1.0, &p).map_err(fail)?;
        let f2 = factorial_moment(2, 1.0, &p).map_err(fail)?;
        worst = worst
            .max(((m1 - f1) / f1).abs())
            .max(((m2 - f2) / f2).abs());
    }
    let msg = format!("max relative moment error = {worst:.2e}");
    if worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c10_caputo() -> Outcome {
    let mut worst = 0.0f64;
    for beta in [0.5, 0.7] {
        for t in [0.5, 1.0, 2.0] {
            for n in 0..=3 {
                let r = caputo_residual(n, t, &params(beta, 1.0), 1e-10).map_err(fail)?;
                worst = worst.max(r.abs());
            }
        }
    }
    let msg = format!("max |residual| = {worst:.2e}");
    if worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c11_reproducible() -> Outcome {
    let dir = tempfile::tempdir().map_err(fail)?;
    let path = dir.path().join("validate.csv");
    let mut config = RunConfig::new(Command::Validate);
    config.with_mc = true;
    config.paths = 5000;
    config.seed = 42;
    config.out = Some(path.clone());
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let outcome = run(&config).map_err(fail)?;
        outcome
            .table
            .write(config.format, Some(&path))
            .map_err(fail)?;
        bytes.push(std::fs::read(&path).map_err(fail)?);
        std::fs::remove_file(&path).map_err(fail)?;
    }
    if bytes[0] == bytes[1] && !bytes[0].is_empty() {
        Ok(format!(
            "two validate runs wrote identical {} bytes",
            bytes[0].len()
        ))
    } else {
        Err("validate outputs differ".into())
    }
}

fn main() -> ExitCode {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let criteria: [Criterion; 11] = [
        ("1 classical reduction", c1_classical, secs(1)),
        ("2 series/ODE equivalence", c2_equivalence, secs(30)),
        ("3 exact Pascal roundtrip", c3_roundtrip, secs(5)),
        ("4 rotated inversion", c4_rotated_inversion, None),
        ("5 conservation", c5_conservation, None),
        ("6 proof-step identity", c6_proofstep, None),
        ("7 cluster reduction", c7_cluster, None),
        ("8 Monte Carlo consistency", c8_monte_carlo, secs(60)),
        ("9 moment identity", c9_moments, None),
        ("10 Caputo residual", c10_caputo, secs(10)),
        ("11 reproducibility", c11_reproducible, None),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|m| within_time(limit, elapsed).map(|_| m));
        match outcome {
            Ok(msg) => println!("criterion {name}: PASS ({elapsed:.2?}) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({elapsed:.2?}) {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
