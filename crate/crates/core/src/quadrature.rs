//! Gauss–Laguerre and Gauss–Hermite rules.
//!
//! Nodes come from the eigenvalues of the Jacobi matrix (Golub–Welsch), then
//! get a few Newton steps on the damped recurrence. Weights are taken from the
//! Christoffel formula `w_i = 1 / Σ_{k<m} p_k(x_i)²` with orthonormal `p_k`.
//! Evaluated with damped basis functions this gives the *lifted* weights
//! `w_i e^{x_i}` (Laguerre) and `w_i e^{x_i²}` (Hermite) to full relative
//! precision, which is what integrals of the form `∫ f l_n dx` need.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{hermite_fn_table, laguerre_fn_table};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::numeric::pairwise_sum;

pub const MAX_ORDER: usize = 500;

/// Extra nodes beyond the largest degree when a caller does not pick an order.
pub const DEFAULT_MARGIN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    Laguerre,
    Hermite,
    Legendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lifted: Vec<f64>,
}

impl QuadratureRule {
    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights against the native weight function (`e^{-x}`, `e^{-x²}`, or 1).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights for integrating against Lebesgue measure:
    /// `∫ g dx ≈ Σ lifted_i g(x_i)`.
    pub fn lifted_weights(&self) -> &[f64] {
        &self.lifted
    }

    /// Natural logarithms of the native weights, usable where the weights
    /// themselves underflow.
    pub fn log_weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.lifted)
            .map(|(&x, &l)| match self.kind {
                QuadratureKind::Laguerre => l.ln() - x,
                QuadratureKind::Hermite => l.ln() - x * x,
                QuadratureKind::Legendre => l.ln(),
            })
            .collect()
    }
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 || m > MAX_ORDER {
        return Err(Error::invalid(format!(
            "quadrature order {m} outside 1..={MAX_ORDER}"
        )));
    }
    Ok(())
}

fn jacobi_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        jac[(i, i)] = diag[i];
        if i + 1 < m {
            jac[(i, i + 1)] = off[i];
            jac[(i + 1, i)] = off[i];
        }
    }
    let mut ev: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

/// `m`-point rule for `∫_0^∞ g(x) e^{-x} dx`.
pub fn gauss_laguerre_rule(m: usize) -> Result<QuadratureRule> {
    check_order(m)?;
    let diag: Vec<f64> = (0..m).map(|k| 2.0 * k as f64 + 1.0).collect();
    let off: Vec<f64> = (1..m).map(|k| k as f64).collect();
    let mut nodes = jacobi_eigenvalues(&diag, &off);
    for x in nodes.iter_mut() {
        *x = newton_laguerre(m, *x);
    }
    let mut lifted = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for &x in &nodes {
        let t = laguerre_fn_table(m - 1, x);
        let s = pairwise_sum(&t.iter().map(|v| v * v).collect::<Vec<_>>());
        let l = 1.0 / s;
        lifted.push(l);
        weights.push(l * (-x).exp());
    }
    Ok(QuadratureRule {
        kind: QuadratureKind::Laguerre,
        nodes,
        weights,
        lifted,
    })
}

/// Newton steps on `L_m` using `L_m' = m (L_m - L_{m-1}) / x`; the damping
/// factor cancels in the ratio.
fn newton_laguerre(m: usize, mut x: f64) -> f64 {
    for _ in 0..8 {
        let t = laguerre_fn_table(m, x);
        let (lm, lm1) = (t[m], t[m - 1]);
        let denom = m as f64 * (lm - lm1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let dx = x * lm / denom;
        if !dx.is_finite() {
            break;
        }
        let next = x - dx;
        if next <= 0.0 {
            break;
        }
        x = next;
        if dx.abs() <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}

/// `m`-point rule for `∫_ℝ g(x) e^{-x²} dx`.
pub fn gauss_hermite_rule(m: usize) -> Result<QuadratureRule> {
    check_order(m)?;
    let diag = vec![0.0; m];
    let off: Vec<f64> = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let raw = jacobi_eigenvalues(&diag, &off);
    let mut nodes = vec![0.0; m];
    // Refine the non-negative half and mirror it, so the rule is exactly symmetric.
    for i in 0..m / 2 {
        let x = 0.5 * (raw[m - 1 - i] - raw[i]);
        let x = newton_hermite(m, x);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
    }
    let mut lifted = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for &x in &nodes {
        let t = hermite_fn_table(m - 1, x);
        let s = pairwise_sum(&t.iter().map(|v| v * v).collect::<Vec<_>>());
        let l = 1.0 / s;
        lifted.push(l);
        weights.push(l * (-x * x).exp());
    }
    Ok(QuadratureRule {
        kind: QuadratureKind::Hermite,
        nodes,
        weights,
        lifted,
    })
}

fn newton_hermite(m: usize, mut x: f64) -> f64 {
    for _ in 0..8 {
        let t = hermite_fn_table(m, x);
        let denom = (2.0 * m as f64).sqrt() * t[m - 1];
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let dx = t[m] / denom;
        if !dx.is_finite() {
            break;
        }
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_rule(m: usize) -> Result<QuadratureRule> {
    check_order(m)?;
    let diag = vec![0.0; m];
    let off: Vec<f64> = (1..m)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let raw = jacobi_eigenvalues(&diag, &off);
    let mut nodes = vec![0.0; m];
    for i in 0..m / 2 {
        let x = newton_legendre(m, 0.5 * (raw[m - 1 - i] - raw[i]));
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
    }
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (p, dp) = legendre_with_derivative(m, x);
            let _ = p;
            2.0 / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    Ok(QuadratureRule {
        kind: QuadratureKind::Legendre,
        nodes,
        lifted: weights.clone(),
        weights,
    })
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    let dp = m as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, dp)
}

fn newton_legendre(m: usize, mut x: f64) -> f64 {
    for _ in 0..8 {
        let (p, dp) = legendre_with_derivative(m, x);
        let dx = p / dp;
        if !dx.is_finite() {
            break;
        }
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON {
            break;
        }
    }
    x
}

/// Order to use when the caller only fixes the largest degree.
pub fn default_order(max_degree: usize) -> usize {
    (max_degree + DEFAULT_MARGIN).min(MAX_ORDER)
}

/// Visit every node of the `d`-fold tensor product of `rule`, in row-major
/// order, with the product of lifted weights.
pub fn for_each_tensor_node(rule: &QuadratureRule, d: usize, mut visit: impl FnMut(&[f64], f64)) {
    let m = rule.order();
    let total = m.pow(d as u32);
    let mut point = vec![0.0; d];
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut w = 1.0;
        for j in 0..d {
            point[j] = rule.nodes[idx[j]];
            w *= rule.lifted[idx[j]];
        }
        visit(&point, w);
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// `∫ g dx` over the rule's domain in `d` dimensions (tensor product).
pub fn integrate(
    rule: &QuadratureRule,
    d: usize,
    g: impl Fn(&[f64]) -> Result<f64>,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(rule.order().pow(d as u32));
    let mut err = None;
    for_each_tensor_node(rule, d, |x, w| {
        if err.is_some() {
            return;
        }
        match g(x) {
            Ok(v) => terms.push(w * v),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(pairwise_sum(&terms))
}

/// `∫ f · basis_n dx`, where the basis follows the rule kind (Laguerre
/// functions on the orthant, Hermite functions on `ℝ^d`).
///
/// The exponential lift is carried by the lifted weights. A non-finite lifted
/// integrand at any node is reported as an overflow diagnostic: it means `f`
/// does not decay fast enough for the rule.
pub fn integrate_against_basis(
    f: impl Fn(&[f64]) -> Result<f64>,
    n: &MultiIndex,
    rule: &QuadratureRule,
) -> Result<f64> {
    let d = n.dim();
    let nmax = n.max_entry();
    let tables: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| match rule.kind {
            QuadratureKind::Laguerre => laguerre_fn_table(nmax, x),
            QuadratureKind::Hermite => hermite_fn_table(nmax, x),
            QuadratureKind::Legendre => vec![1.0; nmax + 1],
        })
        .collect();
    if rule.kind == QuadratureKind::Legendre {
        return Err(Error::invalid(
            "basis integrals need a Laguerre or Hermite rule",
        ));
    }
    let m = rule.order();
    let mut terms = Vec::with_capacity(m.pow(d as u32));
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    for _ in 0..m.pow(d as u32) {
        let mut w = 1.0;
        let mut b = 1.0;
        for j in 0..d {
            point[j] = rule.nodes[idx[j]];
            w *= rule.lifted[idx[j]];
            b *= tables[idx[j]][n.entries()[j]];
        }
        let lifted = w * f(&point)?;
        if !lifted.is_finite() {
            return Err(Error::Overflow(format!(
                "lifted integrand is not finite at {point:?}; the function does not decay fast enough"
            )));
        }
        terms.push(lifted * b);
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(pairwise_sum(&terms))
}
