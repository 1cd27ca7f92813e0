//! Triangular binomial transforms: the upper-triangular Pascal matrix with
//! entries `C(k, n)`, its signed inverse `(−1)^{n+k} C(k, n)`, and the
//! rotated inversion pair linking `P(n, t)` and `φ(j, t)`:
//!
//! ```text
//! (−1)^n P(n) = Σ_{j≥n} C(j, n) φ(j)   ⟺   φ(m) = (−1)^m Σ_{k≥m} C(k, m) P(k)
//! ```
//!
//! Both matrices are triangular, so a length-`N` truncation of either
//! transform is exact for the truncated input: entry `n` depends only on
//! entries `n..N` of the argument.

use std::ops::{AddAssign, Neg};

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact binomial coefficient `C(k, n)`; zero when `k < n`.
pub fn binomial_exact(k: u64, n: u64) -> BigUint {
    if n > k {
        return BigUint::zero();
    }
    let n = n.min(k - n);
    let mut acc = BigUint::from(1u32);
    for i in 0..n {
        acc *= k - i;
        acc /= i + 1;
    }
    acc
}

/// Entry types the transforms can act on.
pub trait BinomialScalar: Clone + Zero + AddAssign + Neg<Output = Self> {
    fn scale(&self, c: &BigUint) -> Self;
}

impl BinomialScalar for BigInt {
    fn scale(&self, c: &BigUint) -> Self {
        self * BigInt::from(c.clone())
    }
}

impl BinomialScalar for f64 {
    fn scale(&self, c: &BigUint) -> Self {
        self * c.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Whether entries carry the `(−1)^n` alternation of the signed
/// probability vector `[P(0), −P(1), P(2), …]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signing {
    Plain,
    Alternating,
}

/// A finite truncation of one of the infinite vectors the transforms act on.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedVector<T> {
    entries: Vec<T>,
    signing: Signing,
}

impl<T: BinomialScalar> SignedVector<T> {
    pub fn new(entries: Vec<T>, signing: Signing) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("SignedVector", "length must be at least 1"));
        }
        Ok(Self { entries, signing })
    }

    pub fn plain(entries: Vec<T>) -> Result<Self> {
        Self::new(entries, Signing::Plain)
    }

    /// Builds `[v₀, −v₁, v₂, …]` from unsigned values (e.g. probabilities).
    pub fn alternating_from(values: Vec<T>) -> Result<Self> {
        let entries = values
            .into_iter()
            .enumerate()
            .map(|(n, v)| if n % 2 == 0 { v } else { -v })
            .collect();
        Self::new(entries, Signing::Alternating)
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn signing(&self) -> Signing {
        self.signing
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The entries with the `(−1)^n` alternation removed.
    pub fn unsigned_values(&self) -> Vec<T> {
        match self.signing {
            Signing::Plain => self.entries.clone(),
            Signing::Alternating => self
                .entries
                .iter()
                .enumerate()
                .map(|(n, v)| if n % 2 == 0 { v.clone() } else { -v.clone() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Pascal,
    InversePascal,
}

/// Implicit `N × N` truncation of the Pascal matrix or its inverse; entries
/// are generated on demand, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialMatrix {
    size: usize,
    kind: MatrixKind,
}

impl BinomialMatrix {
    pub fn new(size: usize, kind: MatrixKind) -> Self {
        Self { size, kind }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn entry(&self, n: usize, k: usize) -> BigInt {
        let c = BigInt::from(binomial_exact(k as u64, n as u64));
        match self.kind {
            MatrixKind::Pascal => c,
            MatrixKind::InversePascal if (n + k) % 2 == 1 => -c,
            MatrixKind::InversePascal => c,
        }
    }

    /// `w_n = Σ_{k=n}^{N-1} M(n, k) v_k`.
    pub fn apply<T: BinomialScalar>(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.size {
            return Err(Error::contract(
                "BinomialMatrix::apply",
                format!(
                    "vector length {} does not match matrix size {}",
                    v.len(),
                    self.size
                ),
            ));
        }
        let alternate = self.kind == MatrixKind::InversePascal;
        let mut out = Vec::with_capacity(self.size);
        for n in 0..self.size {
            let mut acc = T::zero();
            // walk row n with C(k+1, n) = C(k, n) (k+1) / (k+1-n)
            let mut c = BigUint::from(1u32);
            for (k, vk) in v.iter().enumerate().skip(n) {
                if k > n {
                    c *= k as u64;
                    c /= (k - n) as u64;
                }
                let term = vk.scale(&c);
                if alternate && (n + k) % 2 == 1 {
                    acc += -term;
                } else {
                    acc += term;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Pascal transform `w_n = Σ_{k≥n} C(k, n) v_k` of a plain vector; the
/// image is the alternating-signed vector.
pub fn apply_pascal<T: BinomialScalar>(v: &SignedVector<T>) -> Result<SignedVector<T>> {
    if v.signing != Signing::Plain {
        return Err(Error::contract(
            "apply_pascal",
            "input must be a plain (unsigned-convention) vector",
        ));
    }
    let entries = BinomialMatrix::new(v.len(), MatrixKind::Pascal).apply(&v.entries)?;
    Ok(SignedVector {
        entries,
        signing: Signing::Alternating,
    })
}

/// Inverse transform `w_m = Σ_{k≥m} (−1)^{m+k} C(k, m) v_k` of an
/// alternating-signed vector; returns the plain vector.
pub fn apply_inverse_pascal<T: BinomialScalar>(v: &SignedVector<T>) -> Result<SignedVector<T>> {
    if v.signing != Signing::Alternating {
        return Err(Error::contract(
            "apply_inverse_pascal",
            "input must be an alternating-signed vector",
        ));
    }
    let entries = BinomialMatrix::new(v.len(), MatrixKind::InversePascal).apply(&v.entries)?;
    Ok(SignedVector {
        entries,
        signing: Signing::Plain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Pascal-triangle recurrence, independent of the multiplicative formula.
    fn triangle(rows: usize) -> Vec<Vec<BigUint>> {
        let mut t: Vec<Vec<BigUint>> = vec![vec![BigUint::from(1u32)]];
        for k in 1..rows {
            let prev = &t[k - 1];
            let mut row = vec![BigUint::from(1u32)];
            for n in 1..k {
                row.push(&prev[n - 1] + &prev[n]);
            }
            row.push(BigUint::from(1u32));
            t.push(row);
        }
        t
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_exact(4, 2), BigUint::from(6u32));
        assert_eq!(binomial_exact(3, 5), BigUint::zero());
        assert_eq!(
            binomial_exact(60, 30),
            BigUint::from(118_264_581_564_861_424u64)
        );
    }

    #[test]
    fn binomial_matches_triangle() {
        let t = triangle(120);
        for k in 0..120 {
            for n in 0..=k {
                assert_eq!(binomial_exact(k as u64, n as u64), t[k][n]);
            }
        }
        assert_eq!(t[60][30], BigUint::from(118_264_581_564_861_424u64));
    }

    #[test]
    fn pascal_columns() {
        let v = SignedVector::plain(ints(&[1, 0, 0, 0])).unwrap();
        assert_eq!(
            apply_pascal(&v).unwrap().entries(),
            &ints(&[1, 0, 0, 0])[..]
        );
        let v = SignedVector::plain(ints(&[0, 0, 0, 1])).unwrap();
        let w = apply_pascal(&v).unwrap();
        assert_eq!(w.entries(), &ints(&[1, 3, 3, 1])[..]);
        assert_eq!(w.signing(), Signing::Alternating);
    }

    #[test]
    fn inverse_of_ones() {
        let v = SignedVector::new(ints(&[1, 1, 1, 1, 1]), Signing::Alternating).unwrap();
        let w = apply_inverse_pascal(&v).unwrap();
        // explicit matrix-vector product
        let m = BinomialMatrix::new(5, MatrixKind::InversePascal);
        for n in 0..5 {
            let s: BigInt = (0..5).map(|k| m.entry(n, k)).sum();
            assert_eq!(&s, &w.entries()[n]);
        }
        assert_eq!(w.entries(), &ints(&[1, -2, 4, -3, 1])[..]);
        // the alternating column sums vanish: Σ_{n≤k} (−1)^{n+k} C(k, n) = δ(k, 0)
        for k in 0..5 {
            let s: BigInt = (0..5).map(|n| m.entry(n, k)).sum();
            assert_eq!(s, BigInt::from((k == 0) as i32));
        }
    }

    #[test]
    fn inverse_of_first_unit_vector() {
        let e0 = SignedVector::plain(ints(&[1, 0, 0, 0, 0])).unwrap();
        let w = apply_pascal(&e0).unwrap();
        assert_eq!(w.entries(), e0.entries());
        assert_eq!(apply_inverse_pascal(&w).unwrap().entries(), e0.entries());
    }

    #[test]
    fn matrix_product_is_identity() {
        let n = 20;
        let p = BinomialMatrix::new(n, MatrixKind::Pascal);
        let q = BinomialMatrix::new(n, MatrixKind::InversePascal);
        for i in 0..n {
            for j in 0..n {
                let s: BigInt = (0..n).map(|k| p.entry(i, k) * q.entry(k, j)).sum();
                assert_eq!(s, BigInt::from((i == j) as i32));
            }
        }
    }

    #[test]
    fn signing_is_enforced() {
        let v = SignedVector::plain(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            apply_inverse_pascal(&v),
            Err(Error::Contract { .. })
        ));
        let w = apply_pascal(&v).unwrap();
        assert!(matches!(apply_pascal(&w), Err(Error::Contract { .. })));
        assert!(SignedVector::<f64>::plain(vec![]).is_err());
    }

    #[test]
    fn alternating_round_trip_of_values() {
        let v = SignedVector::alternating_from(vec![0.5, 0.25, 0.125]).unwrap();
        assert_eq!(v.entries(), &[0.5, -0.25, 0.125]);
        assert_eq!(v.unsigned_values(), vec![0.5, 0.25, 0.125]);
    }
}
