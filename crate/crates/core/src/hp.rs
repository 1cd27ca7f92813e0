//! Extended-precision support shared by the series kernels.
//!
//! Alternating series such as `Σ (-x)^m / Γ(βm+1)` lose `log10(max term)`
//! digits to cancellation. Everything that sums such series does so with
//! MPFR floats at [`WORK_PREC`] bits and reports the largest term it saw, so
//! callers can decide whether the result is still trustworthy.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

/// Working precision (bits) of the series kernels.
pub(crate) const WORK_PREC: u32 = 256;

/// Unit roundoff of a `prec`-bit float.
pub(crate) fn eps_of(prec: u32) -> f64 {
    2f64.powi(1 - prec as i32)
}

/// Unit roundoff of the working precision.
pub(crate) fn work_eps() -> f64 {
    eps_of(WORK_PREC)
}

pub(crate) fn float(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

type Key = (&'static str, u64, u32);

fn tables() -> &'static Mutex<HashMap<Key, Arc<Vec<Float>>>> {
    static TABLES: OnceLock<Mutex<HashMap<Key, Arc<Vec<Float>>>>> = OnceLock::new();
    TABLES.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Returns a cached table with at least `len` entries, growing it by
/// doubling when a longer one is requested.
fn cached_table(key: Key, len: usize, entry: impl Fn(usize) -> Float) -> Arc<Vec<Float>> {
    let mut map = tables().lock().unwrap_or_else(|p| p.into_inner());
    if let Some(t) = map.get(&key) {
        if t.len() >= len {
            return Arc::clone(t);
        }
    }
    let old = map.get(&key).cloned();
    let old_len = old.as_ref().map_or(0, |t| t.len());
    let new_len = len.max(2 * old_len).max(16);
    let mut v: Vec<Float> = Vec::with_capacity(new_len);
    if let Some(t) = old {
        v.extend(t.iter().cloned());
    }
    for m in v.len()..new_len {
        v.push(entry(m));
    }
    let t = Arc::new(v);
    map.insert(key, Arc::clone(&t));
    t
}

/// `1 / Γ(βm + 1)` for `m = 0, 1, …` at working precision.
pub(crate) fn inv_gamma_table(beta: f64, len: usize) -> Arc<Vec<Float>> {
    cached_table(("inv_gamma", beta.to_bits(), WORK_PREC), len, |m| {
        let arg = Float::with_val(WORK_PREC, beta) * m as u32 + 1u32;
        arg.gamma().recip()
    })
}

/// `Γ(βj + 1) / (β Γ(βj + β))` at `prec` bits. At `β = 1` every entry is
/// exactly 1, so integer-weighted sums of these ratios cancel exactly.
pub(crate) fn rate_ratio_table(beta: f64, prec: u32, len: usize) -> Arc<Vec<Float>> {
    cached_table(("rate_ratio", beta.to_bits(), prec), len, |j| {
        let b = Float::with_val(prec, beta);
        let bj = Float::with_val(prec, &b * j as u32);
        let num = Float::with_val(prec, &bj + 1u32).gamma();
        let den = Float::with_val(prec, &bj + &b).gamma() * &b;
        num / den
    })
}
