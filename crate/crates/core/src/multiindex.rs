//! Multi-indices, graded enumeration and the factorial/binomial combinatorics
//! used by the weights and the coefficient transforms.
//!
//! Anything that grows factorially is carried as a natural logarithm, with the
//! sign kept separately in [`SignedLog`].

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element `n ∈ ℕ₀^d`.
///
/// Ordering is graded lexicographic: first by `|n|`, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs at least one entry");
        MultiIndex(entries)
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex::new(vec![0; d])
    }

    pub fn scalar(n: usize) -> Self {
        MultiIndex(vec![n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|n| = n_1 + … + n_d`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn max_entry(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// True when some component is odd.
    pub fn has_odd_entry(&self) -> bool {
        self.0.iter().any(|n| n % 2 == 1)
    }

    pub fn doubled(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|n| 2 * n).collect())
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex::new(v)
    }
}

/// All `n ∈ ℕ₀^d` with `|n| ≤ max_order`, in graded lexicographic order.
pub fn enumerate_upto(d: usize, max_order: usize) -> Vec<MultiIndex> {
    assert!(d >= 1, "dimension must be at least 1");
    let mut out = Vec::new();
    for s in 0..=max_order {
        let mut buf = Vec::with_capacity(d);
        compositions(s, d, &mut buf, &mut out);
    }
    out
}

fn compositions(total: usize, parts: usize, buf: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if parts == 1 {
        buf.push(total);
        out.push(MultiIndex(buf.clone()));
        buf.pop();
        return;
    }
    for first in 0..=total {
        buf.push(first);
        compositions(total - first, parts - 1, buf, out);
        buf.pop();
    }
}

/// Dense row-major box `[0..=D_1] × … × [0..=D_d]`, last axis fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxShape {
    caps: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl BoxShape {
    pub fn new(caps: &[usize]) -> Self {
        assert!(!caps.is_empty(), "box needs at least one axis");
        let d = caps.len();
        let mut strides = vec![1; d];
        for j in (0..d - 1).rev() {
            strides[j] = strides[j + 1] * (caps[j + 1] + 1);
        }
        let len = caps.iter().map(|c| c + 1).product();
        BoxShape {
            caps: caps.to_vec(),
            strides,
            len,
        }
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    pub fn dim(&self) -> usize {
        self.caps.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, n: &MultiIndex) -> bool {
        n.dim() == self.dim() && n.entries().iter().zip(&self.caps).all(|(a, c)| a <= c)
    }

    pub fn flat(&self, n: &MultiIndex) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        Some(
            n.entries()
                .iter()
                .zip(&self.strides)
                .map(|(a, s)| a * s)
                .sum(),
        )
    }

    pub fn index(&self, mut flat: usize) -> MultiIndex {
        let mut entries = Vec::with_capacity(self.dim());
        for s in &self.strides {
            entries.push(flat / s);
            flat %= s;
        }
        MultiIndex(entries)
    }

    /// All indices in storage order.
    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len).map(|i| self.index(i))
    }

    /// Largest attainable `|n|`.
    pub fn max_order(&self) -> usize {
        self.caps.iter().sum()
    }
}

/// A real number stored as `sign · exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// One of -1, 0, +1.
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog {
        sign: 1.0,
        ln_abs: 0.0,
    };
    pub const ZERO: SignedLog = SignedLog {
        sign: 0.0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog {
                sign: v.signum(),
                ln_abs: v.abs().ln(),
            }
        }
    }

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

impl std::ops::Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, other: SignedLog) -> SignedLog {
        if self.sign == 0.0 || other.sign == 0.0 {
            return SignedLog::ZERO;
        }
        SignedLog {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }
}

const LN_FACT_TABLE: usize = 1024;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn log_factorial(n: usize) -> f64 {
    if n < LN_FACT_TABLE {
        return ln_fact_table()[n];
    }
    // Stirling series for ln Γ(x), x = n + 1 ≥ 1025; truncation error < 1e-20.
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `ln(n!) = Σ_j ln(n_j!)` for a multi-index.
pub fn log_factorial_multi(n: &MultiIndex) -> f64 {
    n.entries().iter().map(|&k| log_factorial(k)).sum()
}

/// `γ(γ-1)…(γ-m+1)/m!` in signed-log form, for a single axis.
pub fn half_binom_1d(gamma: f64, m: usize) -> Result<SignedLog> {
    if !gamma.is_finite() {
        return Err(Error::invalid(format!(
            "binomial argument {gamma} is not finite"
        )));
    }
    if gamma < 0.0 && gamma.fract() == 0.0 {
        return Err(Error::invalid(format!(
            "binomial upper argument {gamma} is a negative integer"
        )));
    }
    let mut sign = 1.0;
    let mut ln_abs = 0.0;
    for i in 0..m {
        let factor = gamma - i as f64;
        if factor == 0.0 {
            return Ok(SignedLog::ZERO);
        }
        if factor < 0.0 {
            sign = -sign;
        }
        ln_abs += factor.abs().ln();
    }
    ln_abs -= log_factorial(m);
    Ok(SignedLog { sign, ln_abs })
}

/// Multi-index binomial `∏_j (γ_j choose m_j)`.
pub fn half_binom(gamma: &[f64], m: &MultiIndex) -> Result<SignedLog> {
    if gamma.len() != m.dim() {
        return Err(Error::invalid(format!(
            "binomial arguments have dimensions {} and {}",
            gamma.len(),
            m.dim()
        )));
    }
    let mut acc = SignedLog::ONE;
    for (&g, &k) in gamma.iter().zip(m.entries()) {
        acc = acc * half_binom_1d(g, k)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    #[test]
    fn enumerate_small_cases() {
        let one: Vec<Vec<usize>> = enumerate_upto(1, 2).into_iter().map(|n| n.0).collect();
        assert_eq!(one, vec![vec![0], vec![1], vec![2]]);
        let two: Vec<Vec<usize>> = enumerate_upto(2, 1).into_iter().map(|n| n.0).collect();
        assert_eq!(two, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(enumerate_upto(2, 2).len(), 6);
    }

    fn binom_count(n: usize, k: usize) -> usize {
        (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn enumerate_counts_and_order() {
        for d in 1..=4 {
            for top in 0..=6 {
                let list = enumerate_upto(d, top);
                assert_eq!(list.len(), binom_count(top + d, d));
                assert!(list.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn half_binom_examples() {
        let g = |v: f64, m: usize| half_binom(&[v], &MultiIndex::scalar(m)).unwrap().value();
        assert_eq!(g(-0.5, 0), 1.0);
        assert!((g(-0.5, 1) + 0.5).abs() < 1e-15);
        assert!((g(-1.5, 2) - 15.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn half_binom_rejects_negative_integers() {
        assert!(half_binom(&[-2.0], &MultiIndex::scalar(3)).is_err());
        assert!(half_binom(&[0.5, -1.0], &MultiIndex::new(vec![0, 0])).is_err());
    }

    #[test]
    fn half_binom_nonnegative_integer_gamma_vanishes() {
        let v = half_binom_1d(2.0, 3).unwrap();
        assert_eq!(v.value(), 0.0);
    }

    /// Exact rational product (γ)(γ-1)…(γ-m+1)/m! with γ = p/2.
    fn exact(p: i128, m: usize) -> Ratio<i128> {
        let mut acc = Ratio::from_integer(1i128);
        for i in 0..m as i128 {
            acc *= Ratio::new(p - 2 * i, 2);
            acc /= Ratio::from_integer(i + 1);
        }
        acc
    }

    #[test]
    fn half_binom_against_rational_oracle() {
        for p in [-3i128, -1, 1, 3] {
            for m in 0..=20 {
                let oracle = exact(p, m);
                let oracle = *oracle.numer() as f64 / *oracle.denom() as f64;
                let got = half_binom_1d(p as f64 / 2.0, m).unwrap().value();
                let rel = if oracle == 0.0 {
                    got.abs()
                } else {
                    ((got - oracle) / oracle).abs()
                };
                assert!(rel < 1e-12, "γ={}/2 m={m}: {got} vs {oracle}", p);
            }
        }
    }

    #[test]
    fn half_binom_large_m_stays_finite() {
        let v = half_binom_1d(400.0 - 1.5, 400).unwrap();
        assert!(v.ln_abs.is_finite());
        assert_eq!(v.sign, -1.0);
    }

    #[test]
    fn log_factorial_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        assert!((log_factorial(10) - 3_628_800f64.ln()).abs() < 1e-12);
        let mut exact: u64 = 1;
        for n in 1..=20u64 {
            exact *= n;
            let rel = (log_factorial(n as usize).exp() - exact as f64).abs() / exact as f64;
            assert!(rel < 1e-13, "n={n} rel={rel}");
        }
    }

    #[test]
    fn log_factorial_table_and_stirling_agree_at_seam() {
        let below = log_factorial(LN_FACT_TABLE - 1);
        let above = log_factorial(LN_FACT_TABLE);
        let expected = below + (LN_FACT_TABLE as f64).ln();
        assert!((above - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn box_shape_roundtrip() {
        let shape = BoxShape::new(&[2, 3, 1]);
        assert_eq!(shape.len(), 3 * 4 * 2);
        for (i, n) in shape.iter().enumerate() {
            assert_eq!(shape.flat(&n), Some(i));
        }
        assert_eq!(shape.flat(&MultiIndex::new(vec![3, 0, 0])), None);
    }

    proptest! {
        #[test]
        fn graded_order_is_total(a in prop::collection::vec(0usize..6, 3),
                                 b in prop::collection::vec(0usize..6, 3)) {
            let (a, b) = (MultiIndex::new(a), MultiIndex::new(b));
            let ord = a.cmp(&b);
            prop_assert_eq!(ord.reverse(), b.cmp(&a));
            if a.order() < b.order() {
                prop_assert_eq!(ord, Ordering::Less);
            }
            prop_assert_eq!(ord == Ordering::Equal, a == b);
        }
    }
}
