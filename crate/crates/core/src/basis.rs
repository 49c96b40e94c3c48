//! Laguerre polynomials and functions, Hermite functions.
//!
//! Laguerre functions `l_n(x) = L_n(x) e^{-x/2}` are produced by running the
//! three-term recurrence directly on the damped values: the seed carries the
//! factor `e^{-x/2}` and the running magnitudes are rescaled whenever they get
//! large, so nothing overflows even at `x` in the thousands. Hermite functions
//! use the unit-normalized recurrence in the same way.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

const RESCALE: f64 = 1e150;

/// Which one-dimensional family a coefficient or value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BasisKind {
    LaguerrePolynomial { gamma: f64 },
    LaguerreFunction,
    HermiteFunction,
}

impl BasisKind {
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        match *self {
            BasisKind::LaguerrePolynomial { gamma } => laguerre_poly(n, gamma, x),
            BasisKind::LaguerreFunction => {
                if x < 0.0 {
                    return Err(Error::Domain(format!("Laguerre function at x = {x} < 0")));
                }
                Ok(laguerre_fn_1d(n, x))
            }
            BasisKind::HermiteFunction => Ok(hermite_fn_1d(n, x)),
        }
    }
}

/// Generalized Laguerre polynomial `L_n^γ(x)`.
pub fn laguerre_poly(n: usize, gamma: f64, x: f64) -> Result<f64> {
    if !(gamma > -1.0) {
        return Err(Error::invalid(format!(
            "Laguerre order γ = {gamma} must exceed -1"
        )));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "Laguerre polynomial argument x = {x}"
        )));
    }
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + gamma - x) * cur - (kf + gamma) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn unscale(mantissa: f64, log_scale: f64) -> f64 {
    if mantissa == 0.0 {
        return 0.0;
    }
    mantissa.signum() * (mantissa.abs().ln() + log_scale).exp()
}

/// `[l_0(x), …, l_nmax(x)]` for `x ≥ 0`.
pub fn laguerre_fn_table(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let mut log_scale = -0.5 * x;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..=nmax {
        out.push(unscale(cur, log_scale));
        if k == nmax {
            break;
        }
        let kf = k as f64;
        let mut next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        if next.abs() > RESCALE {
            next /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        prev = cur;
        cur = next;
    }
    out
}

pub fn laguerre_fn_1d(n: usize, x: f64) -> f64 {
    *laguerre_fn_table(n, x).last().expect("table is non-empty")
}

/// Tensor-product Laguerre function `∏_j l_{n_j}(x_j)`.
pub fn laguerre_fn(n: &MultiIndex, x: &[f64]) -> Result<f64> {
    check_point(n, x)?;
    if let Some(bad) = x.iter().find(|&&v| v < 0.0) {
        return Err(Error::Domain(format!(
            "Laguerre function at coordinate {bad} < 0"
        )));
    }
    Ok(n.entries()
        .iter()
        .zip(x)
        .map(|(&k, &xj)| laguerre_fn_1d(k, xj))
        .product())
}

/// `[l_0'(x), …, l_nmax'(x)]`, from `l_n' = -Σ_{j<n} l_j - l_n/2`.
pub fn laguerre_fn_derivative_table(nmax: usize, x: f64) -> Vec<f64> {
    let values = laguerre_fn_table(nmax, x);
    let mut out = Vec::with_capacity(nmax + 1);
    let mut running = 0.0;
    for v in values {
        out.push(-running - 0.5 * v);
        running += v;
    }
    out
}

/// `[h_0(x), …, h_nmax(x)]` for the unit-normalized Hermite functions.
pub fn hermite_fn_table(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for k in 0..=nmax {
        out.push(unscale(cur, log_scale));
        if k == nmax {
            break;
        }
        let kf = k as f64;
        let mut next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        if next.abs() > RESCALE {
            next /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        prev = cur;
        cur = next;
    }
    out
}

pub fn hermite_fn_1d(n: usize, x: f64) -> f64 {
    *hermite_fn_table(n, x).last().expect("table is non-empty")
}

/// Tensor-product Hermite function `∏_j h_{n_j}(x_j)`.
pub fn hermite_fn(n: &MultiIndex, x: &[f64]) -> Result<f64> {
    check_point(n, x)?;
    Ok(n.entries()
        .iter()
        .zip(x)
        .map(|(&k, &xj)| hermite_fn_1d(k, xj))
        .product())
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite_poly(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn check_point(n: &MultiIndex, x: &[f64]) -> Result<()> {
    if n.dim() != x.len() {
        return Err(Error::invalid(format!(
            "index has dimension {} but point has {}",
            n.dim(),
            x.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Both sides of the Hermite–Laguerre identity at `(n, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationSides {
    pub lhs: f64,
    pub rhs: f64,
}

/// Leading constant of the odd identity
/// `H_{2n+1}(x) = c · (-1)^n 2^{2n} n! L_n^{1/2}(x²) x`,
/// calibrated from the `n = 0` case against the recurrence definition of `H_1`.
pub fn odd_relation_constant() -> f64 {
    let x = 1.0;
    let h1 = hermite_poly(1, x);
    let base = laguerre_poly(0, 0.5, x * x).expect("order 1/2 is admissible") * x;
    h1 / base
}

/// Evaluate both sides of the even identity
/// `H_{2n}(x) = (-1)^n 2^{2n} n! L_n^{-1/2}(x²)`, or of the odd identity with
/// the calibrated constant from [`odd_relation_constant`].
pub fn hermite_laguerre_relation(n: usize, x: f64, parity: Parity) -> RelationSides {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let scale = (2.0 * n as f64 * 2f64.ln() + crate::multiindex::log_factorial(n)).exp();
    let t = x * x;
    match parity {
        Parity::Even => RelationSides {
            lhs: hermite_poly(2 * n, x),
            rhs: sign * scale * laguerre_poly(n, -0.5, t).expect("order -1/2 is admissible"),
        },
        Parity::Odd => RelationSides {
            lhs: hermite_poly(2 * n + 1, x),
            rhs: odd_relation_constant()
                * sign
                * scale
                * laguerre_poly(n, 0.5, t).expect("order 1/2 is admissible")
                * x,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_hermite_rule, gauss_laguerre_rule};
    use approx::assert_abs_diff_eq;

    #[test]
    fn laguerre_poly_examples() {
        assert_eq!(laguerre_poly(0, 0.0, 5.0).unwrap(), 1.0);
        assert_abs_diff_eq!(laguerre_poly(1, 0.0, 2.0).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(laguerre_poly(2, 0.0, 2.0).unwrap(), -1.0, epsilon = 1e-15);
        assert!(laguerre_poly(3, -1.0, 1.0).is_err());
        assert!(laguerre_poly(3, -1.5, 1.0).is_err());
    }

    #[test]
    fn laguerre_fn_examples() {
        assert_eq!(laguerre_fn(&MultiIndex::scalar(0), &[0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            laguerre_fn(&MultiIndex::scalar(1), &[2.0]).unwrap(),
            -(-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            laguerre_fn(&MultiIndex::new(vec![1, 1]), &[2.0, 2.0]).unwrap(),
            (-2.0f64).exp(),
            epsilon = 1e-15
        );
        assert!(laguerre_fn(&MultiIndex::scalar(1), &[-1.0]).is_err());
    }

    #[test]
    fn damped_table_matches_polynomial_times_exponential() {
        for &x in &[0.0, 0.3, 4.0, 25.0, 90.0] {
            let table = laguerre_fn_table(30, x);
            for (n, v) in table.iter().enumerate() {
                let direct = laguerre_poly(n, 0.0, x).unwrap() * (-0.5 * x).exp();
                assert!(
                    (v - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn damped_table_survives_huge_arguments() {
        let t = laguerre_fn_table(500, 1900.0);
        assert!(t.iter().all(|v| v.is_finite()));
        assert!(t.iter().all(|v| v.abs() <= 1.0));
        assert!(t[499].abs() > 1e-10);
    }

    #[test]
    fn hermite_fn_examples() {
        assert_abs_diff_eq!(hermite_fn_1d(0, 0.0), PI.powf(-0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(hermite_fn_1d(1, 0.0), 0.0, epsilon = 1e-15);
        let expected = (8.0 * PI.sqrt()).powf(-0.5) * 2.0 * (-0.5f64).exp();
        assert_abs_diff_eq!(hermite_fn_1d(2, 1.0), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.3221442, epsilon = 1e-7);
    }

    #[test]
    fn hermite_fn_matches_normalized_polynomial() {
        for &x in &[-3.0, -0.4, 0.0, 1.7, 6.0] {
            let t = hermite_fn_table(20, x);
            for (n, v) in t.iter().enumerate() {
                let norm =
                    (2f64.powi(n as i32) * crate::multiindex::log_factorial(n).exp() * PI.sqrt())
                        .sqrt();
                let direct = hermite_poly(n, x) * (-0.5 * x * x).exp() / norm;
                assert!(
                    (v - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn relation_examples() {
        let r = hermite_laguerre_relation(0, 3.0, Parity::Even);
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        let r = hermite_laguerre_relation(1, 1.0, Parity::Even);
        assert_abs_diff_eq!(r.lhs, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.rhs, 2.0, epsilon = 1e-14);
        let r = hermite_laguerre_relation(1, 2.0, Parity::Even);
        assert_abs_diff_eq!(r.lhs, 14.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.rhs, 14.0, epsilon = 1e-13);
    }

    #[test]
    fn odd_constant_is_two() {
        assert_eq!(odd_relation_constant(), 2.0);
    }

    #[test]
    fn relations_hold_up_to_n8() {
        for n in 0..=8 {
            for i in 0..=40 {
                let x = -5.0 + 0.25 * i as f64;
                for parity in [Parity::Even, Parity::Odd] {
                    let r = hermite_laguerre_relation(n, x, parity);
                    let scale = r.lhs.abs().max(1.0);
                    assert!(
                        (r.lhs - r.rhs).abs() / scale < 1e-10,
                        "n={n} x={x} {parity:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn laguerre_gram_is_identity() {
        let rule = gauss_laguerre_rule(120).unwrap();
        let tables: Vec<Vec<f64>> = rule
            .nodes()
            .iter()
            .map(|&x| laguerre_fn_table(40, x))
            .collect();
        for m in 0..=40 {
            for n in 0..=40 {
                let g: f64 = rule
                    .lifted_weights()
                    .iter()
                    .zip(&tables)
                    .map(|(w, t)| w * t[m] * t[n])
                    .sum();
                let target = if m == n { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-10, "({m},{n}) {g}");
            }
        }
    }

    #[test]
    fn hermite_gram_is_identity() {
        let rule = gauss_hermite_rule(120).unwrap();
        let tables: Vec<Vec<f64>> = rule
            .nodes()
            .iter()
            .map(|&x| hermite_fn_table(40, x))
            .collect();
        for m in 0..=40 {
            for n in 0..=40 {
                let g: f64 = rule
                    .lifted_weights()
                    .iter()
                    .zip(&tables)
                    .map(|(w, t)| w * t[m] * t[n])
                    .sum();
                let target = if m == n { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-10, "({m},{n}) {g}");
            }
        }
    }

    fn log_grid() -> Vec<f64> {
        let (lo, hi) = (1e-3f64.ln(), 200f64.ln());
        (0..=600)
            .map(|i| (lo + (hi - lo) * i as f64 / 600.0).exp())
            .collect()
    }

    #[test]
    fn weighted_pointwise_bound() {
        let grid = log_grid();
        for &x in &grid {
            let t = laguerre_fn_table(40, x);
            for (n, v) in t.iter().enumerate() {
                for k in 0..=5 {
                    let bound = 4f64.powi(k)
                        * ((n + 1)..=(n + k as usize))
                            .map(|j| j as f64)
                            .product::<f64>();
                    assert!((x.powi(k) * v).abs() <= bound, "n={n} k={k} x={x}");
                }
            }
        }
    }

    #[test]
    fn derivative_bound_is_uniform_in_n() {
        let grid = log_grid();
        for k in 0..=3i32 {
            let mut worst = 0.0f64;
            for &x in &grid {
                let d = laguerre_fn_derivative_table(40, x);
                for (n, v) in d.iter().enumerate() {
                    let r = (x.powi(k) * v).abs() / ((1 + n) as f64).powi(k + 1);
                    worst = worst.max(r);
                }
            }
            // Uniform constant that does not depend on n.
            assert!(worst < 4f64.powi(k + 1), "k={k} worst={worst}");
        }
    }

    #[test]
    fn derivative_table_matches_finite_differences() {
        let h = 1e-6;
        for &x in &[0.5, 3.0, 17.0] {
            let d = laguerre_fn_derivative_table(12, x);
            let plus = laguerre_fn_table(12, x + h);
            let minus = laguerre_fn_table(12, x - h);
            for n in 0..=12 {
                let fd = (plus[n] - minus[n]) / (2.0 * h);
                assert!((fd - d[n]).abs() < 1e-8, "n={n} x={x}");
            }
        }
    }
}
