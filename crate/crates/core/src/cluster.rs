//! Discrete coagulation-fragmentation (cluster) equations and their linear
//! form.
//!
//! For clusters `n = 1, 2, …` with a pinned reservoir `c₀ ≡ 1`,
//!
//! ```text
//! ċ_n    = ½ Σ_{k=1}^{n} W(n−k, k−1) − Σ_{k≥1} W(n, k−1)
//! W(n,k) = a(n,k) z c_n c_k − b(n,k) c_{n+k+1}
//! ```
//!
//! Keeping coagulation only through the reservoir (`a(n,k) = 0` unless one
//! index is 0) turns this into the linear system
//!
//! ```text
//! ċ_n = g_n c_{n−1} − (a(n,0) z + ½ Σ_{k=1}^{n} b(n−k,k−1)) c_n + Σ_{k≥1} b(n,k−1) c_{n+k}
//! ```
//!
//! with `g_n = a(n−1,0) z`, except `g_1 = ½ a(0,0) z`: the `(0,0)` pair is a
//! single self-pair in the gain sum and keeps its factor ½.
//!
//! The system is closed at `N` clusters: concentrations beyond `N` read as
//! zero and the loss sum stops at `k = N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::odegen::{GeneratorMatrix, OdeSystem};

/// Coefficients, reservoir level and state of a truncated cluster system.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSystem {
    size: usize,
    /// `(N+1) × (N+1)`, indices `0..=N`
    a: Vec<f64>,
    b: Vec<f64>,
    z: f64,
    /// `c[i]` is the concentration of `(i+1)`-clusters
    c: Vec<f64>,
}

impl ClusterSystem {
    /// Builds a system from coefficient functions on `0..=N`. Both families
    /// must be symmetric and non-negative; `z` must be positive. The state
    /// starts at zero.
    pub fn from_fn(
        size: usize,
        z: f64,
        a: impl Fn(usize, usize) -> f64,
        b: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::domain(
                "ClusterSystem",
                "need at least one cluster size",
            ));
        }
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain(
                "ClusterSystem",
                format!("z must be positive, got {z}"),
            ));
        }
        let dim = size + 1;
        let mut at = vec![0.0; dim * dim];
        let mut bt = vec![0.0; dim * dim];
        for n in 0..dim {
            for k in 0..dim {
                at[n * dim + k] = a(n, k);
                bt[n * dim + k] = b(n, k);
            }
        }
        for n in 0..dim {
            for k in 0..dim {
                let (x, y) = (at[n * dim + k], bt[n * dim + k]);
                if !(x >= 0.0) || !(y >= 0.0) {
                    return Err(Error::domain(
                        "ClusterSystem",
                        format!("coefficients at ({n}, {k}) must be non-negative"),
                    ));
                }
                if x != at[k * dim + n] || y != bt[k * dim + n] {
                    return Err(Error::domain(
                        "ClusterSystem",
                        format!("coefficients must be symmetric, mismatch at ({n}, {k})"),
                    ));
                }
            }
        }
        Ok(Self {
            size,
            a: at,
            b: bt,
            z,
            c: vec![0.0; size],
        })
    }

    /// Linear family: `a(n, 0) = a(0, n) = gain(n)` and zero elsewhere.
    pub fn linear(
        size: usize,
        z: f64,
        gain: impl Fn(usize) -> f64,
        b: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        Self::from_fn(
            size,
            z,
            |n, k| match (n, k) {
                (0, k) => gain(k),
                (n, 0) => gain(n),
                _ => 0.0,
            },
            b,
        )
    }

    /// Birth-death choice: fragmentation only through `b(n, 0) = b(0, n)`.
    pub fn birth_death(
        size: usize,
        z: f64,
        gain: impl Fn(usize) -> f64,
        split: impl Fn(usize) -> f64,
    ) -> Result<Self> {
        Self::linear(size, z, gain, |n, k| match (n, k) {
            (0, k) => split(k),
            (n, 0) => split(n),
            _ => 0.0,
        })
    }

    pub fn with_state(mut self, c: Vec<f64>) -> Result<Self> {
        if c.len() != self.size {
            return Err(Error::contract(
                "ClusterSystem::with_state",
                format!("state has length {}, expected {}", c.len(), self.size),
            ));
        }
        if c.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::domain(
                "ClusterSystem",
                "concentrations must be non-negative",
            ));
        }
        self.c = c;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn state(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self, n: usize, k: usize) -> f64 {
        self.a[n * (self.size + 1) + k]
    }

    pub fn b(&self, n: usize, k: usize) -> f64 {
        self.b[n * (self.size + 1) + k]
    }

    /// True when coagulation only happens through the reservoir.
    pub fn is_linear(&self) -> bool {
        (1..=self.size).all(|n| (1..=self.size).all(|k| self.a(n, k) == 0.0))
    }

    fn conc(c: &[f64], n: usize) -> f64 {
        match n {
            0 => 1.0,
            n if n <= c.len() => c[n - 1],
            _ => 0.0,
        }
    }

    fn current_in(&self, c: &[f64], n: usize, k: usize) -> f64 {
        let a = if n <= self.size && k <= self.size {
            self.a(n, k)
        } else {
            0.0
        };
        let b = if n <= self.size && k <= self.size {
            self.b(n, k)
        } else {
            0.0
        };
        a * self.z * Self::conc(c, n) * Self::conc(c, k) - b * Self::conc(c, n + k + 1)
    }

    fn rhs_in(&self, c: &[f64], out: &mut [f64]) {
        let size = self.size;
        for n in 1..=size {
            let gain: f64 = (1..=n).map(|k| self.current_in(c, n - k, k - 1)).sum();
            let loss: f64 = (1..=size).map(|k| self.current_in(c, n, k - 1)).sum();
            out[n - 1] = 0.5 * gain - loss;
        }
    }
}

impl OdeSystem for ClusterSystem {
    fn dim(&self) -> usize {
        self.size
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        self.rhs_in(y, dy);
    }
}

/// Cluster current `W(n, k) = a(n,k) z c_n c_k − b(n,k) c_{n+k+1}`.
pub fn cluster_current(n: usize, k: usize, sys: &ClusterSystem) -> f64 {
    sys.current_in(&sys.c, n, k)
}

/// Right-hand side `ċ_1 … ċ_N` of the general cluster equations.
pub fn cluster_rhs(sys: &ClusterSystem) -> Vec<f64> {
    let mut out = vec![0.0; sys.size];
    sys.rhs_in(&sys.c, &mut out);
    out
}

/// Rates of a linear cluster system, indexed by cluster size `n = 1..=N`.
///
/// `ċ_n = gain_below(n) c_{n−1} − loss(n) c_n + Σ_k gain_above(n, k) c_{n+k}`
/// with `c₀ ≡ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRates {
    size: usize,
    gain_below: Vec<f64>,
    loss: Vec<f64>,
    gain_above: Vec<Vec<f64>>,
}

impl LinearRates {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn gain_below(&self, n: usize) -> f64 {
        self.gain_below[n - 1]
    }

    pub fn loss(&self, n: usize) -> f64 {
        self.loss[n - 1]
    }

    /// Rate from `(n+k)`-clusters into `n`-clusters, `k ≥ 1`.
    pub fn gain_above(&self, n: usize, k: usize) -> f64 {
        self.gain_above[n - 1].get(k - 1).copied().unwrap_or(0.0)
    }

    /// Number of nonzero coefficients in row `n`.
    pub fn stencil_width(&self, n: usize) -> usize {
        let below = (self.gain_below(n) != 0.0) as usize;
        let diag = (self.loss(n) != 0.0) as usize;
        below + diag + self.gain_above[n - 1].iter().filter(|&&v| v != 0.0).count()
    }

    pub fn rhs(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        self.rhs_into(c, &mut out);
        out
    }

    fn rhs_into(&self, c: &[f64], out: &mut [f64]) {
        for n in 1..=self.size {
            let below = if n == 1 { 1.0 } else { c[n - 2] };
            let mut v = self.gain_below[n - 1] * below - self.loss[n - 1] * c[n - 1];
            for (k, r) in self.gain_above[n - 1].iter().enumerate() {
                v += r * c[n + k];
            }
            out[n - 1] = v;
        }
    }

    /// Negative entries among the gains from larger clusters.
    pub fn negative_gain_count(&self) -> usize {
        self.gain_above
            .iter()
            .flatten()
            .filter(|&&v| v < 0.0)
            .count()
    }
}

impl OdeSystem for LinearRates {
    fn dim(&self) -> usize {
        self.size
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        self.rhs_into(y, dy);
    }
}

/// Linear rates of a system whose coagulation runs through the reservoir
/// only; any other coagulation coefficient is a contract error.
pub fn linear_rates(sys: &ClusterSystem) -> Result<LinearRates> {
    if !sys.is_linear() {
        return Err(Error::contract(
            "linear_cluster_rhs",
            "coagulation coefficients a(n, k) with n, k >= 1 must vanish",
        ));
    }
    let size = sys.size;
    let z = sys.z;
    let mut gain_below = Vec::with_capacity(size);
    let mut loss = Vec::with_capacity(size);
    let mut gain_above = Vec::with_capacity(size);
    for n in 1..=size {
        gain_below.push(if n == 1 {
            0.5 * sys.a(0, 0) * z
        } else {
            sys.a(n - 1, 0) * z
        });
        let frag: f64 = (1..=n).map(|k| sys.b(n - k, k - 1)).sum();
        loss.push(sys.a(n, 0) * z + 0.5 * frag);
        gain_above.push((1..=size - n).map(|k| sys.b(n, k - 1)).collect());
    }
    Ok(LinearRates {
        size,
        gain_below,
        loss,
        gain_above,
    })
}

/// Right-hand side of the linear cluster equations.
pub fn linear_cluster_rhs(sys: &ClusterSystem) -> Result<Vec<f64>> {
    Ok(linear_rates(sys)?.rhs(&sys.c))
}

/// Structural identification of a fractional Poisson generator with the
/// linear cluster equations.
///
/// Count `n` maps to cluster size `n + 1`, so the row of `n`-clusters reads
/// generator row `n − 1`: gain from below is `A(n−1, n−2)`, the loss rate is
/// `−A(n−1, n−1)`, and the gain from `(n+k)`-clusters is `A(n−1, n−1+k)`.
/// The reservoir does not feed the smallest cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingReport {
    pub rates: LinearRates,
    /// Index offset between cluster size and count.
    pub shift: usize,
    /// Max-norm difference between the linear cluster right-hand side and
    /// `A P` over random non-negative states.
    pub residual: f64,
    pub states_checked: usize,
    pub negative_gains: usize,
    pub positive_gains: usize,
}

pub const EMBED_STATES: usize = 100;
const EMBED_SEED: u64 = 0x5eed_c1a5;

pub fn embed_fpp_generator(gen: &GeneratorMatrix) -> EmbeddingReport {
    let size = gen.size();
    let mut gain_below = Vec::with_capacity(size);
    let mut loss = Vec::with_capacity(size);
    let mut gain_above = Vec::with_capacity(size);
    for n in 1..=size {
        let row = n - 1;
        gain_below.push(if row == 0 {
            0.0
        } else {
            gen.entry(row, row - 1)
        });
        loss.push(-gen.entry(row, row));
        gain_above.push(
            (row + 1..size)
                .map(|k| gen.entry(row, k))
                .collect::<Vec<f64>>(),
        );
    }
    let rates = LinearRates {
        size,
        gain_below,
        loss,
        gain_above,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(EMBED_SEED);
    let mut residual = 0.0f64;
    let mut direct = vec![0.0; size];
    for _ in 0..EMBED_STATES {
        let c: Vec<f64> = (0..size).map(|_| rng.random::<f64>()).collect();
        let lin = rates.rhs(&c);
        gen.apply(&c, &mut direct);
        for (x, y) in lin.iter().zip(&direct) {
            residual = residual.max((x - y).abs());
        }
    }
    let all: Vec<f64> = rates.gain_above.iter().flatten().copied().collect();
    EmbeddingReport {
        negative_gains: all.iter().filter(|&&v| v < 0.0).count(),
        positive_gains: all.iter().filter(|&&v| v > 0.0).count(),
        rates,
        shift: 1,
        residual,
        states_checked: EMBED_STATES,
    }
}
