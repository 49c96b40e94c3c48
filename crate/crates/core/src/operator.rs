//! Laguerre operator `E` and Hermite operator `H`, applied spectrally, plus
//! the `η` norm of a Laguerre expansion and the `L^p` norms of its iterates.
//!
//! `E = -Σ_j (x_j ∂_j² + ∂_j - x_j/4 + 1/2)` acts on `l_n` with eigenvalue
//! `|n|`; `H = -Δ + |x|²` acts on `h_n` with eigenvalue `2|n| + d`.
//!
//! All quantities that grow like `N!` are handled as logarithms.

use serde::Serialize;

use crate::basis::laguerre_fn_1d;
use crate::error::{Error, Result};
use crate::expansion::{BasisTag, CoefficientArray, FunctionHandle};
use crate::multiindex::{log_factorial, MultiIndex};
use crate::numeric::{fit_line, log_sum_exp, pairwise_sum};
use crate::quadrature::{gauss_laguerre_rule, gauss_legendre_rule, MAX_ORDER};
use crate::seqspace::Membership;

/// Relative share of `‖E^N c‖²` allowed to come from the outer fifth of the
/// stored box before `N` counts as unresolved by the truncation.
pub const EDGE_SHARE: f64 = 1e-6;

/// Axes with fewer stored degrees are treated as exact finite combinations.
const MIN_EDGE_CAP: usize = 5;

/// Trailing supremands that must decrease before the sup counts as reached.
const TRAILING: usize = 5;

/// Required drop, in log units, from the maximum to the last supremand.
const DROP: f64 = 5.0;

/// Resolved iterates needed before a verdict is attempted.
const MIN_RESOLVED: usize = 8;

/// Largest growth slope of `ln‖E^N f‖ - α ln N!` in `ln N` still read as bounded.
const SLOPE_TOL: f64 = 0.1;

fn require_basis(c: &CoefficientArray, basis: BasisTag) -> Result<()> {
    if c.basis() != basis {
        return Err(Error::invalid(format!(
            "expected a {basis} expansion, got {}",
            c.basis()
        )));
    }
    Ok(())
}

fn scale_by_eigenvalue(
    c: &CoefficientArray,
    power: u32,
    eigen: impl Fn(&MultiIndex) -> f64,
) -> Result<CoefficientArray> {
    let out = c.iter().map(|(n, v)| {
        // powi(0) is 1 for every base, including 0.
        v * eigen(&n).powi(power as i32)
    });
    let values: Vec<f64> = out.collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!(
            "operator power {power} overflows; use the log-space norms instead"
        )));
    }
    Ok(CoefficientArray::new(c.basis(), c.caps(), values)?.with_meta(c.meta().clone()))
}

/// Coefficients of `E^N f`: `|n|^N c_n`, with `0^0 = 1`.
pub fn apply_e_power(c: &CoefficientArray, power: u32) -> Result<CoefficientArray> {
    require_basis(c, BasisTag::Laguerre)?;
    scale_by_eigenvalue(c, power, |n| n.order() as f64)
}

/// Coefficients of `H^N f`: `(2|n| + d)^N c_n`.
pub fn apply_h_power(c: &CoefficientArray, power: u32) -> Result<CoefficientArray> {
    require_basis(c, BasisTag::Hermite)?;
    let d = c.dimension() as f64;
    scale_by_eigenvalue(c, power, |n| 2.0 * n.order() as f64 + d)
}

/// `E f` at each point by second-order central differences.
///
/// Points closer than `2·step` to the boundary are refused: `E` degenerates at
/// `x_j = 0` and a one-sided stencil would hide that.
pub fn apply_e_finite_difference(
    f: &FunctionHandle,
    points: &[Vec<f64>],
    step: f64,
) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid(format!("step must be positive, got {step}")));
    }
    let limit = 2.0 * step;
    points
        .iter()
        .map(|x| {
            if x.iter().any(|&xj| xj < limit) {
                return Err(Error::BoundaryProximity {
                    x: x.clone(),
                    limit,
                });
            }
            let f0 = f.eval(x)?;
            let mut acc = 0.0;
            let mut y = x.clone();
            for j in 0..x.len() {
                y[j] = x[j] + step;
                let fp = f.eval(&y)?;
                y[j] = x[j] - step;
                let fm = f.eval(&y)?;
                y[j] = x[j];
                let d2 = (fp - 2.0 * f0 + fm) / (step * step);
                let d1 = (fp - fm) / (2.0 * step);
                acc += x[j] * d2 + d1 - 0.25 * x[j] * f0 + 0.5 * f0;
            }
            Ok(-acc)
        })
        .collect()
}

/// `ln‖E^N c‖_{ℓ²}` for `N = 0..=n_max`, with the range the truncation resolves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateNorms {
    pub log_norms: Vec<f64>,
    /// Largest `N` such that every `N' ≤ N` has edge share below [`EDGE_SHARE`].
    /// `None` when even `N = 0` is dominated by the box edge.
    pub resolved_upto: Option<usize>,
}

/// Iterate norms of a Laguerre expansion. Entries at or below the recorded
/// noise floor count as zero.
pub fn iterate_norms(c: &CoefficientArray, n_max: usize) -> Result<IterateNorms> {
    require_basis(c, BasisTag::Laguerre)?;
    let values = c.denoised();
    let edge_from: Vec<Option<f64>> = c
        .caps()
        .iter()
        .map(|&cap| (cap >= MIN_EDGE_CAP).then_some(0.8 * cap as f64))
        .collect();
    let mut entries = Vec::new();
    for ((n, _), v) in c.iter().zip(values) {
        if v == 0.0 {
            continue;
        }
        let on_edge = n
            .entries()
            .iter()
            .zip(&edge_from)
            .any(|(&k, e)| e.is_some_and(|e| k as f64 > e));
        entries.push((2.0 * v.abs().ln(), (n.order() as f64).ln(), on_edge));
    }
    let mut log_norms = Vec::with_capacity(n_max + 1);
    let mut resolved_upto = None;
    let mut still_resolved = true;
    for big_n in 0..=n_max {
        let nf = big_n as f64;
        let term = |lv: f64, ln_order: f64| {
            if big_n == 0 {
                lv
            } else {
                lv + 2.0 * nf * ln_order
            }
        };
        let total = log_sum_exp(entries.iter().map(|&(lv, lo, _)| term(lv, lo)));
        let edge = log_sum_exp(
            entries
                .iter()
                .filter(|e| e.2)
                .map(|&(lv, lo, _)| term(lv, lo)),
        );
        log_norms.push(0.5 * total);
        let share_ok = total == f64::NEG_INFINITY || edge - total < EDGE_SHARE.ln();
        if still_resolved && share_ok {
            resolved_upto = Some(big_n);
        } else {
            still_resolved = false;
        }
    }
    Ok(IterateNorms {
        log_norms,
        resolved_upto,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaResult {
    /// `η_h^α(f)`, or `+∞` when the sup was not reached inside the resolved range.
    pub value: f64,
    /// Largest supremand seen, finite even when `value` is not; NaN when no `N` is resolved.
    pub observed_sup: f64,
    pub achieved_at: usize,
    pub converged: bool,
    pub resolved_upto: Option<usize>,
    /// `ln‖E^N f‖ - N ln h - α ln N!` over the resolved range.
    pub log_supremands: Vec<f64>,
}

impl EtaResult {
    pub fn is_finite(&self) -> bool {
        self.converged && self.value.is_finite()
    }
}

fn log_supremands(log_norms: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    log_norms
        .iter()
        .enumerate()
        .map(|(n, &l)| l - n as f64 * h.ln() - alpha * log_factorial(n))
        .collect()
}

fn sup_result(sup: Vec<f64>, resolved_upto: Option<usize>) -> EtaResult {
    let (achieved_at, max) = sup.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |(i, m), (j, &v)| if v > m { (j, v) } else { (i, m) },
    );
    let converged = sup.len() > TRAILING && {
        let tail = &sup[sup.len() - TRAILING - 1..];
        let decreasing = tail
            .windows(2)
            .all(|w| w[1] < w[0] || w[1] == f64::NEG_INFINITY);
        let last = *tail.last().expect("non-empty tail");
        decreasing && max - last >= DROP
    };
    EtaResult {
        value: if converged { max.exp() } else { f64::INFINITY },
        observed_sup: max.exp(),
        achieved_at,
        converged,
        resolved_upto,
        log_supremands: sup,
    }
}

/// `η_h^α(f) = sup_{N ∈ ℕ₀} ‖E^N f‖_{L²} / (h^N N!^α)`, evaluated from the
/// Laguerre coefficients of `f` via `‖E^N f‖² = Σ |a_n|² |n|^{2N}`.
///
/// The sup is taken over `N ≤ min(n_max, resolved_upto)`. If the supremands
/// have not turned down by then, `value` is `+∞` and `converged` is false.
pub fn eta_norm(c: &CoefficientArray, h: f64, alpha: f64, n_max: usize) -> Result<EtaResult> {
    if n_max < 10 {
        return Err(Error::invalid(format!(
            "N_max must be at least 10, got {n_max}"
        )));
    }
    if !(h > 0.0 && alpha > 0.0) {
        return Err(Error::invalid("h and alpha must be positive"));
    }
    let norms = iterate_norms(c, n_max)?;
    let upto = match norms.resolved_upto {
        Some(k) => k,
        None => {
            return Ok(EtaResult {
                value: f64::INFINITY,
                observed_sup: f64::NAN,
                achieved_at: 0,
                converged: false,
                resolved_upto: None,
                log_supremands: Vec::new(),
            })
        }
    };
    let sup = log_supremands(&norms.log_norms[..=upto], h, alpha);
    Ok(sup_result(sup, norms.resolved_upto))
}

/// Whether `sup_N ‖E^N f‖ / (h^N N!^α)` is finite for some `h`, read off the
/// growth of the iterates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateVerdict {
    pub member: Membership,
    pub witness_h: Option<f64>,
    /// Slope of `Δ(ln‖E^N f‖ - α ln N!)` against `ln N` on the upper half of the resolved range.
    pub slope: Option<f64>,
    pub resolved_upto: Option<usize>,
    pub result: Option<EtaResult>,
    pub reason: String,
}

fn verdict_from_logs(
    log_norms: &[f64],
    resolved_upto: Option<usize>,
    alpha: f64,
    confirm: impl Fn(f64) -> Result<EtaResult>,
) -> Result<IterateVerdict> {
    let no = |reason: String, slope| IterateVerdict {
        member: Membership::No,
        witness_h: None,
        slope,
        resolved_upto,
        result: None,
        reason,
    };
    let upto = match resolved_upto {
        Some(k) if k + 1 >= MIN_RESOLVED => k,
        _ => {
            return Ok(no(
                format!(
                    "iterates dominated by the truncation edge beyond N = {resolved_upto:?}; coefficients decay too slowly"
                ),
                None,
            ))
        }
    };
    let logs = &log_norms[..=upto];
    if logs[1..].iter().all(|&l| l == f64::NEG_INFINITY) {
        let result = confirm(1.0)?;
        return Ok(IterateVerdict {
            member: Membership::Yes,
            witness_h: Some(1.0),
            slope: None,
            resolved_upto,
            result: Some(result),
            reason: "E f = 0".into(),
        });
    }
    let g: Vec<f64> = logs
        .iter()
        .enumerate()
        .map(|(n, &l)| l - alpha * log_factorial(n))
        .collect();
    let steps: Vec<(f64, f64)> = (1..g.len())
        .filter(|&n| g[n].is_finite() && g[n - 1].is_finite())
        .map(|n| ((n as f64).ln(), g[n] - g[n - 1]))
        .collect();
    if steps.len() < MIN_RESOLVED - 1 {
        return Ok(IterateVerdict {
            member: Membership::Inconclusive,
            witness_h: None,
            slope: None,
            resolved_upto,
            result: None,
            reason: "too few finite iterates".into(),
        });
    }
    let upper = &steps[steps.len() / 2..];
    let xs: Vec<f64> = upper.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = upper.iter().map(|s| s.1).collect();
    let slope = fit_line(&xs, &ys).map(|f| f.slope).unwrap_or(0.0);
    if slope > SLOPE_TOL {
        return Ok(no(
            format!("ln‖E^N f‖ - α ln N! grows like {slope:.3}·N ln N"),
            Some(slope),
        ));
    }
    let max_step = steps.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let h = std::f64::consts::E * max_step.exp();
    let result = confirm(h)?;
    let member = if result.is_finite() {
        Membership::Yes
    } else {
        Membership::Inconclusive
    };
    Ok(IterateVerdict {
        member,
        witness_h: result.is_finite().then_some(h),
        slope: Some(slope),
        resolved_upto,
        result: Some(result),
        reason: format!("bounded growth (slope {slope:.3}); witness h = {h:.4e}"),
    })
}

/// Membership of `f` in the space with finite `η_h^α` for some `h > 0`.
pub fn eta_verdict(c: &CoefficientArray, alpha: f64, n_max: usize) -> Result<IterateVerdict> {
    let norms = iterate_norms(c, n_max)?;
    verdict_from_logs(&norms.log_norms, norms.resolved_upto, alpha, |h| {
        eta_norm(c, h, alpha, n_max)
    })
}

/// Points, weights and basis table for repeated `L^p` norms of expansions
/// with the same caps.
///
/// * `p = ∞`: a uniform grid covering the oscillatory region of every stored
///   `l_n`, plus the origin; the norm is the grid sup.
/// * even integer `p`, or `d > 1`: an `m`-point Gauss–Laguerre rule stretched by
///   `2/p`, exact for `|poly · e^{-x/2}|^p` when `p` is even and `m` is large enough.
/// * other `p` in one dimension: composite Gauss–Legendre panels, which cope
///   with the kinks of `|·|^p` at sign changes, plus a stretched Laguerre tail.
#[derive(Debug, Clone)]
pub struct LpGrid {
    p: f64,
    d: usize,
    max_cap: usize,
    points: Vec<f64>,
    weights: Option<Vec<f64>>,
    table: Vec<f64>,
}

const LP_PANEL_WIDTH: f64 = 0.25;
const LP_PANEL_NODES: usize = 10;

impl LpGrid {
    pub fn new(max_cap: usize, d: usize, p: f64, m: usize) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::invalid(format!("p must be at least 1, got {p}")));
        }
        let (points, weights) = if p.is_infinite() {
            (sup_grid(max_cap, d), None)
        } else if d > 1 || (p.fract() == 0.0 && (p as u64).is_multiple_of(2)) {
            let rule = gauss_laguerre_rule(m)?;
            let pts = rule.nodes().iter().map(|t| 2.0 * t / p).collect();
            let w = rule.lifted_weights().iter().map(|w| 2.0 / p * w).collect();
            (pts, Some(w))
        } else {
            let extent = 4.0 * max_cap as f64 + 40.0;
            let panels = (extent / LP_PANEL_WIDTH).ceil() as usize;
            let gl = gauss_legendre_rule(LP_PANEL_NODES)?;
            let mut pts = Vec::with_capacity(panels * LP_PANEL_NODES + m);
            let mut w = Vec::with_capacity(pts.capacity());
            for k in 0..panels {
                let mid = (k as f64 + 0.5) * LP_PANEL_WIDTH;
                for (&t, &gw) in gl.nodes().iter().zip(gl.weights()) {
                    pts.push(mid + 0.5 * LP_PANEL_WIDTH * t);
                    w.push(0.5 * LP_PANEL_WIDTH * gw);
                }
            }
            let start = panels as f64 * LP_PANEL_WIDTH;
            let tail = gauss_laguerre_rule(m)?;
            for (&t, &lw) in tail.nodes().iter().zip(tail.lifted_weights()) {
                pts.push(start + 2.0 * t / p);
                w.push(2.0 / p * lw);
            }
            (pts, Some(w))
        };
        let table = crate::expansion::basis_table(BasisTag::Laguerre, max_cap, &points);
        Ok(LpGrid {
            p,
            d,
            max_cap,
            points,
            weights,
            table,
        })
    }

    /// `ln‖E^N f‖_{L^p}` for the Laguerre expansion `c`.
    pub fn log_iterate_norm(&self, c: &CoefficientArray, power: u32) -> Result<f64> {
        require_basis(c, BasisTag::Laguerre)?;
        if c.dimension() != self.d || c.caps().iter().any(|&k| k > self.max_cap) {
            return Err(Error::invalid("expansion does not fit this L^p grid"));
        }
        let logs: Vec<(f64, f64)> = c
            .iter()
            .zip(c.denoised())
            .map(|((n, _), v)| {
                let growth = if power == 0 {
                    0.0
                } else {
                    power as f64 * (n.order() as f64).ln()
                };
                (v.abs().ln() + growth, v.signum())
            })
            .collect();
        let scale = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
        if scale == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let scaled: Vec<f64> = logs.iter().map(|&(l, s)| s * (l - scale).exp()).collect();
        let scaled = CoefficientArray::new(BasisTag::Laguerre, c.caps(), scaled)?;
        let np = self.points.len();
        let vals = crate::expansion::synthesize_with_table(&scaled, &self.table, np);
        let Some(weights) = &self.weights else {
            let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return Ok(scale + sup.ln());
        };
        let mut terms = Vec::with_capacity(vals.len());
        let mut idx = vec![0usize; self.d];
        for v in &vals {
            let w: f64 = idx.iter().map(|&i| weights[i]).product();
            terms.push(w * v.abs().powf(self.p));
            for j in (0..self.d).rev() {
                idx[j] += 1;
                if idx[j] < np {
                    break;
                }
                idx[j] = 0;
            }
        }
        Ok(scale + pairwise_sum(&terms).ln() / self.p)
    }
}

/// `ln‖E^N f‖_{L^p(ℝ^d_+)}` for the Laguerre expansion `c`; see [`LpGrid`].
pub fn lp_iterate_log_norm(c: &CoefficientArray, power: u32, p: f64, m: usize) -> Result<f64> {
    require_basis(c, BasisTag::Laguerre)?;
    let max_cap = c.caps().iter().copied().max().unwrap_or(0);
    LpGrid::new(max_cap, c.dimension(), p, m)?.log_iterate_norm(c, power)
}

/// `‖E^N f‖_{L^p(ℝ^d_+)}`; see [`LpGrid`].
pub fn lp_iterate_norm(c: &CoefficientArray, power: u32, p: f64, m: usize) -> Result<f64> {
    let l = lp_iterate_log_norm(c, power, p, m)?;
    if l > f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "‖E^{power} f‖_{p} exceeds f64 range"
        )));
    }
    Ok(l.exp())
}

/// Rule order that integrates `|E^N f|^p` well for caps up to `max_cap`.
pub fn lp_default_order(max_cap: usize, p: f64) -> usize {
    let k = if p.is_finite() { p.max(2.0) } else { 2.0 };
    (((max_cap as f64) * k / 2.0).ceil() as usize + 60).min(MAX_ORDER)
}

fn sup_grid(max_cap: usize, d: usize) -> Vec<f64> {
    let extent = 4.0 * max_cap as f64 + 40.0;
    let count = if d == 1 {
        (extent / 0.02) as usize
    } else {
        400
    };
    (0..=count)
        .map(|i| extent * i as f64 / count as f64)
        .collect()
}

/// Membership read off `sup_N ‖E^N f‖_{L^p} / (h^N N!^α)` for some `h`.
///
/// Uses the same resolved range as [`eta_verdict`], so the answer depends on
/// `p` only through the measured norms.
pub fn lp_verdict(
    c: &CoefficientArray,
    alpha: f64,
    p: f64,
    n_max: usize,
) -> Result<IterateVerdict> {
    let max_cap = c.caps().iter().copied().max().unwrap_or(0);
    let grid = LpGrid::new(max_cap, c.dimension(), p, lp_default_order(max_cap, p))?;
    lp_verdict_on(&grid, c, alpha, n_max)
}

/// [`lp_verdict`] on a prepared grid.
pub fn lp_verdict_on(
    grid: &LpGrid,
    c: &CoefficientArray,
    alpha: f64,
    n_max: usize,
) -> Result<IterateVerdict> {
    let norms = iterate_norms(c, n_max)?;
    let upto = norms.resolved_upto.unwrap_or(0);
    let logs = (0..=upto.min(n_max))
        .map(|n| grid.log_iterate_norm(c, n as u32))
        .collect::<Result<Vec<_>>>()?;
    let logs_ref = &logs;
    verdict_from_logs(logs_ref, norms.resolved_upto, alpha, |h| {
        let sup = log_supremands(logs_ref, h, alpha);
        Ok(sup_result(sup, norms.resolved_upto))
    })
}

/// `‖l_n‖_{L^p(ℝ^d_+)}`, as the product of one-dimensional norms.
pub fn lp_basis_norm(n: &MultiIndex, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be at least 1, got {p}")));
    }
    n.entries()
        .iter()
        .map(|&k| lp_basis_norm_1d(k, p))
        .product()
}

const PANEL_ORDER: usize = 40;
const TAIL_ORDER: usize = 80;

/// Gauss–Legendre panels between consecutive zeros of `l_n`, then a stretched
/// Gauss–Laguerre rule for the exponentially decaying tail.
fn lp_basis_norm_1d(n: usize, p: f64) -> Result<f64> {
    if p.is_infinite() {
        let grid = sup_grid(n, 1);
        return Ok(grid
            .iter()
            .fold(0.0f64, |m, &x| m.max(laguerre_fn_1d(n, x).abs())));
    }
    let zeros: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        gauss_laguerre_rule(n)?.nodes().to_vec()
    };
    let panel = gauss_legendre_rule(PANEL_ORDER)?;
    let mut terms = Vec::new();
    let mut left = 0.0;
    for &right in &zeros {
        let half = 0.5 * (right - left);
        let mid = 0.5 * (right + left);
        for (&t, &w) in panel.nodes().iter().zip(panel.weights()) {
            terms.push(half * w * laguerre_fn_1d(n, mid + half * t).abs().powf(p));
        }
        left = right;
    }
    let tail = gauss_laguerre_rule(TAIL_ORDER)?;
    for (&t, &w) in tail.nodes().iter().zip(tail.lifted_weights()) {
        terms.push(2.0 / p * w * laguerre_fn_1d(n, left + 2.0 * t / p).abs().powf(p));
    }
    Ok(pairwise_sum(&terms).powf(1.0 / p))
}

/// `ln sup_{n ≥ 0} s^n / n!^α`.
pub fn gs2_log_sup(s: f64, alpha: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let peak = s.powf(1.0 / alpha);
    let n_max = (2.0 * peak).ceil() as usize + 10;
    (0..=n_max)
        .map(|n| n as f64 * s.ln() - alpha * log_factorial(n))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `sup_{n ≥ 0} s^n / n!^α`.
pub fn gs2_sup(s: f64, alpha: f64) -> f64 {
    gs2_log_sup(s, alpha).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn delta(caps: &[usize], n: &[usize]) -> CoefficientArray {
        CoefficientArray::delta(BasisTag::Laguerre, caps, &MultiIndex::new(n.to_vec())).unwrap()
    }

    fn seq(caps: usize, f: impl Fn(usize) -> f64) -> CoefficientArray {
        CoefficientArray::from_fn(BasisTag::Laguerre, &[caps], |n| f(n.entries()[0])).unwrap()
    }

    #[test]
    fn e_power_examples() {
        let z = apply_e_power(&delta(&[5], &[0]), 2).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let c = seq(6, |n| 1.0 / (1.0 + n as f64));
        assert_eq!(apply_e_power(&c, 0).unwrap().values(), c.values());
        let e = apply_e_power(&delta(&[5], &[3]), 2).unwrap();
        assert_eq!(e.values()[3], 9.0);
        assert!(apply_e_power(&CoefficientArray::zeros(BasisTag::Hermite, &[3]), 1).is_err());
    }

    #[test]
    fn h_power_examples() {
        let h0 = CoefficientArray::delta(BasisTag::Hermite, &[4], &MultiIndex::scalar(0)).unwrap();
        assert_eq!(apply_h_power(&h0, 1).unwrap().values()[0], 1.0);
        let h2 = CoefficientArray::delta(BasisTag::Hermite, &[4], &MultiIndex::scalar(2)).unwrap();
        assert_eq!(apply_h_power(&h2, 1).unwrap().values()[2], 5.0);
        let two = CoefficientArray::delta(BasisTag::Hermite, &[2, 2], &MultiIndex::new(vec![1, 0]))
            .unwrap();
        assert_eq!(apply_h_power(&two, 1).unwrap().values()[3], 4.0);
        assert_eq!(apply_h_power(&h2, 0).unwrap(), h2);
    }

    #[test]
    fn e_power_overflow_is_reported() {
        let c = delta(&[500], &[500]);
        assert!(matches!(apply_e_power(&c, 200), Err(Error::Overflow(_))));
    }

    #[test]
    fn finite_difference_eigenrelation() {
        let grid: Vec<Vec<f64>> = (0..=39).map(|i| vec![0.5 + 0.5 * i as f64]).collect();
        let l0 = FunctionHandle::Laguerre(MultiIndex::scalar(0));
        for v in apply_e_finite_difference(&l0, &grid, 1e-3).unwrap() {
            assert!(v.abs() < 1e-5);
        }
        for n in 1..=2 {
            let f = FunctionHandle::Laguerre(MultiIndex::scalar(n));
            let fd = apply_e_finite_difference(&f, &grid, 1e-3).unwrap();
            for (x, v) in grid.iter().zip(fd) {
                assert_abs_diff_eq!(v, n as f64 * laguerre_fn_1d(n, x[0]), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn finite_difference_refuses_the_boundary() {
        let f = FunctionHandle::Laguerre(MultiIndex::scalar(1));
        let err = apply_e_finite_difference(&f, &[vec![1e-3]], 1e-3).unwrap_err();
        assert!(matches!(err, Error::BoundaryProximity { .. }));
    }

    #[test]
    fn finite_difference_in_two_dimensions() {
        let f = FunctionHandle::Laguerre(MultiIndex::new(vec![1, 2]));
        let x = vec![1.3, 2.1];
        let fd = apply_e_finite_difference(&f, std::slice::from_ref(&x), 1e-3).unwrap()[0];
        let exact = 3.0 * f.eval(&x).unwrap();
        assert_abs_diff_eq!(fd, exact, epsilon = 1e-6);
    }

    #[test]
    fn eta_examples() {
        let r = eta_norm(&delta(&[10], &[0]), 0.7, 1.5, 10).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-15);
        assert_eq!(r.achieved_at, 0);

        let r = eta_norm(&delta(&[10], &[2]), 1.0, 1.0, 20).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-12);
        assert!(r.achieved_at == 1 || r.achieved_at == 2);

        let mut last = f64::INFINITY;
        for h in [5.0, 10.0, 100.0, 1e4] {
            let r = eta_norm(&delta(&[10], &[5]), h, 1.0, 20).unwrap();
            assert!(r.converged);
            assert!(r.value <= last);
            last = r.value;
        }
        assert_abs_diff_eq!(last, 1.0, epsilon = 1e-12);
        assert!(eta_norm(&delta(&[10], &[0]), 1.0, 1.0, 9).is_err());
    }

    #[test]
    fn eta_by_hand_oracle() {
        // ‖E^N f‖² = Σ a_n² n^{2N}, summed directly for a short sequence.
        let a = [0.3, -0.2, 0.1, 0.05];
        let c = seq(3, |n| a[n]);
        let (h, alpha) = (2.0, 0.75);
        let r = eta_norm(&c, h, alpha, 40).unwrap();
        let mut best = 0.0f64;
        for big_n in 0..=40i32 {
            let s: f64 = a
                .iter()
                .enumerate()
                .map(|(n, v)| {
                    v * v
                        * if big_n == 0 {
                            1.0
                        } else {
                            (n as f64).powi(2 * big_n)
                        }
                })
                .sum();
            let fact: f64 = (1..=big_n).map(|k| k as f64).product();
            best = best.max(s.sqrt() / (h.powi(big_n) * fact.powf(alpha)));
        }
        assert!(r.converged);
        assert_abs_diff_eq!(r.value, best, epsilon = 1e-12 * best);
    }

    #[test]
    fn polynomial_decay_is_never_eta_finite() {
        let c = seq(64, |n| 1.0 / ((1 + n) as f64).powi(2));
        for h in [0.5, 1.0, 4.0, 16.0] {
            for alpha in [0.5, 1.0, 2.0] {
                assert!(!eta_norm(&c, h, alpha, 40).unwrap().is_finite());
            }
        }
        for alpha in [0.5, 1.0, 2.0] {
            assert_eq!(eta_verdict(&c, alpha, 60).unwrap().member, Membership::No);
        }
    }

    #[test]
    fn model_decay_is_eta_finite() {
        // Coefficients e^{-h n^{1/α}} belong to the η space of index α.
        for (alpha, h, caps) in [(1.0, 1.0, 64), (0.5, 0.125, 64), (2.0, 2.0, 2000)] {
            let c = seq(caps, |n| (-h * (n as f64).powf(1.0 / alpha)).exp());
            let v = eta_verdict(&c, alpha, 60).unwrap();
            assert_eq!(v.member, Membership::Yes, "alpha {alpha}: {}", v.reason);
            assert!(v.result.unwrap().is_finite());
        }
    }

    #[test]
    fn geometric_decay_is_outside_the_gaussian_class() {
        let c = seq(64, |n| (-(n as f64)).exp());
        assert_eq!(eta_verdict(&c, 0.5, 60).unwrap().member, Membership::No);
        assert_eq!(eta_verdict(&c, 1.0, 60).unwrap().member, Membership::Yes);
    }

    #[test]
    fn lp_iterate_examples() {
        let m = 60;
        assert_eq!(lp_iterate_norm(&delta(&[5], &[0]), 1, 2.0, m).unwrap(), 0.0);
        assert_abs_diff_eq!(
            lp_iterate_norm(&delta(&[5], &[3]), 2, 2.0, m).unwrap(),
            9.0,
            epsilon = 1e-10
        );
        for n in [0, 3, 9] {
            let sup = lp_iterate_norm(&delta(&[10], &[n]), 0, f64::INFINITY, m).unwrap();
            assert_abs_diff_eq!(sup, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lp_iterate_matches_basis_norm() {
        for p in [1.0, 4.0] {
            for n in [0, 2, 7] {
                let direct = lp_basis_norm(&MultiIndex::scalar(n), p).unwrap();
                let spectral = lp_iterate_norm(&delta(&[8], &[n]), 0, p, 120).unwrap();
                assert!((direct - spectral).abs() < 1e-3 * direct, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn basis_norm_examples() {
        let zero = MultiIndex::scalar(0);
        assert_abs_diff_eq!(lp_basis_norm(&zero, 2.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lp_basis_norm(&zero, 1.0).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            lp_basis_norm(&zero, f64::INFINITY).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        for n in [1, 5, 30] {
            let l2 = lp_basis_norm(&MultiIndex::scalar(n), 2.0).unwrap();
            assert_abs_diff_eq!(l2, 1.0, epsilon = 1e-10);
        }
        let two = lp_basis_norm(&MultiIndex::new(vec![0, 0]), 1.0).unwrap();
        assert_abs_diff_eq!(two, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn gs2_examples() {
        assert_eq!(gs2_sup(0.0, 1.0), 1.0);
        assert_abs_diff_eq!(gs2_sup(2.0, 1.0), 2.0, epsilon = 1e-12);
        for alpha in [0.5, 1.0, 2.0] {
            assert_abs_diff_eq!(gs2_sup(1.0, alpha), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gs2_matches_direct_enumeration() {
        for (s, alpha) in [(3.5f64, 1.0), (7.0, 0.5), (20.0, 2.0)] {
            let mut best = 1.0f64;
            let mut fact = 1.0f64;
            for n in 1..400 {
                fact *= n as f64;
                if !fact.is_finite() {
                    break;
                }
                best = best.max(s.powi(n) / fact.powf(alpha));
            }
            assert!((gs2_sup(s, alpha) - best).abs() < 1e-10 * best);
        }
    }
}
