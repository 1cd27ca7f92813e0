//! Adaptive Dormand–Prince 5(4) integrator for autonomous-or-not linear and
//! nonlinear systems `y' = f(t, y)`.

use crate::error::{Error, Result};

/// Right-hand side of an ODE system.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct StepOptions {
    /// Bound on the local error estimate (max-norm, absolute) per step.
    pub tol: f64,
    pub initial_step: f64,
    pub max_steps: u64,
}

impl StepOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            initial_step: 1e-3,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// fifth-order weights, also the last stage (FSAL)
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// fifth minus fourth order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn combine(y: &[f64], h: f64, ks: &[&[f64]], coeffs: &[f64], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for (k, c) in ks.iter().zip(coeffs) {
            s += c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

/// Integrates from `(t0, y0)` and returns the state at each of `outputs`
/// (strictly ascending, all `> t0`). Steps are shortened to land exactly on
/// output points.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &StepOptions,
) -> Result<(Vec<Vec<f64>>, StepStats)> {
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::contract(
            "integrate",
            format!(
                "initial state has length {}, system has dimension {n}",
                y0.len()
            ),
        ));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain(
            "integrate",
            "step tolerance must be positive",
        ));
    }
    let mut prev = t0;
    for &t in outputs {
        if !(t > prev) || !t.is_finite() {
            return Err(Error::domain(
                "integrate",
                "output points must be finite, strictly ascending and after the start",
            ));
        }
        prev = t;
    }

    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    sys.rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut h = opts.initial_step;
    let mut results = Vec::with_capacity(outputs.len());

    for &target in outputs {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Integration {
                    tau_reached: t,
                    message: format!("step limit {} reached", opts.max_steps),
                });
            }
            let mut step = h.min(target - t);
            let lands = step >= target - t;
            if lands {
                step = target - t;
            }
            if step < 1e-14 * t.abs().max(1.0) && !lands {
                return Err(Error::Integration {
                    tau_reached: t,
                    message: format!("step size underflow (h = {step:e})"),
                });
            }

            {
                let (k0, rest) = k.split_at_mut(1);
                combine(&y, step, &[&k0[0]], &A2, &mut stage);
                sys.rhs(t + C[1] * step, &stage, &mut rest[0]);
            }
            for s in 2..6 {
                let (done, rest) = k.split_at_mut(s);
                let refs: Vec<&[f64]> = done.iter().map(|v| v.as_slice()).collect();
                let coeffs: &[f64] = match s {
                    2 => &A3,
                    3 => &A4,
                    4 => &A5,
                    _ => &A6,
                };
                combine(&y, step, &refs, coeffs, &mut stage);
                sys.rhs(t + C[s] * step, &stage, &mut rest[0]);
            }
            {
                let refs: Vec<&[f64]> = k[..6].iter().map(|v| v.as_slice()).collect();
                combine(&y, step, &refs, &B, &mut y_new);
            }
            sys.rhs(t + step, &y_new, &mut k[6]);
            stats.rhs_evals += 6;

            let mut err = 0.0f64;
            for i in 0..n {
                let mut e = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    e += E[s] * ks[i];
                }
                err = err.max((step * e).abs());
            }
            if !err.is_finite() {
                return Err(Error::Integration {
                    tau_reached: t,
                    message: "non-finite error estimate".into(),
                });
            }
            let ratio = err / opts.tol;
            let factor = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            if ratio <= 1.0 {
                stats.accepted += 1;
                t = if lands { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                // keep the proposed step unless we only shortened it to land
                if !lands || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                stats.rejected += 1;
                h = step * factor.min(1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integration {
                        tau_reached: t,
                        message: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        results.push(y.clone());
    }
    Ok((results, stats))
}
