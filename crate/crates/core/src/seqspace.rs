//! Weighted sequence spaces over `ℕ₀^d` and membership diagnostics.
//!
//! Power weights `e^{h|n|^{1/(2α)}}` give the Roumieu (`∃h`) and Beurling
//! (`∀h`) classes; flat weights `h^{|n|} n!^{1/(2σ)}` give the intermediate
//! flat classes. Verdicts are computed from finitely many coefficients, so
//! each one carries the fit and residuals that support it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::CoefficientArray;
use crate::multiindex::{log_factorial, MultiIndex};
use crate::numeric::{fit_line, log_sum_exp, pairwise_sum, residuals};

/// Answer of a membership test at finite truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Yes,
    No,
    Inconclusive,
}

impl std::fmt::Display for Membership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Membership::Yes => "yes",
            Membership::No => "no",
            Membership::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightSpec {
    Power { alpha: f64, h: f64 },
    Flat { sigma: f64, h: f64 },
    FiniteSupport,
}

impl WeightSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Power { alpha: a, h } | WeightSpec::Flat { sigma: a, h } => {
                if a > 0.0 && h > 0.0 && a.is_finite() && h.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "weight parameters must be positive: {self:?}"
                    )))
                }
            }
            WeightSpec::FiniteSupport => Ok(()),
        }
    }

    /// `ln ϑ(n)`.
    pub fn log_weight(&self, n: &MultiIndex) -> f64 {
        match *self {
            WeightSpec::Power { alpha, h } => {
                let order = n.order();
                if order == 0 {
                    0.0
                } else {
                    h * (order as f64).powf(1.0 / (2.0 * alpha))
                }
            }
            WeightSpec::Flat { sigma, h } => {
                let facts: f64 = n.entries().iter().map(|&k| log_factorial(k)).sum();
                n.order() as f64 * h.ln() + facts / (2.0 * sigma)
            }
            WeightSpec::FiniteSupport => 0.0,
        }
    }
}

/// `ϑ(n)`, evaluated through its logarithm.
pub fn weight_value(spec: &WeightSpec, n: &MultiIndex) -> f64 {
    spec.log_weight(n).exp()
}

/// Shells `|n| = s` that are completely inside the stored box.
fn complete_shells(c: &CoefficientArray) -> usize {
    c.caps().iter().copied().min().unwrap_or(0)
}

/// `max_{|n| = s} (ln|c_n| + extra(n))` for every shell, `-inf` for empty shells.
fn shell_max_log(c: &CoefficientArray, extra: impl Fn(&MultiIndex) -> f64) -> Vec<f64> {
    let mut shells = vec![f64::NEG_INFINITY; c.shape().max_order() + 1];
    for ((n, _), v) in c.iter().zip(c.denoised()) {
        if v != 0.0 {
            let s = n.order();
            shells[s] = shells[s].max(v.abs().ln() + extra(&n));
        }
    }
    shells
}

/// Last nonzero shell when the array ends in a clean run of zero shells.
///
/// A sequence that fades smoothly into the noise floor or into underflow is
/// not finitely supported; its last nonzero value has to stand well clear of
/// both.
pub fn support_end(c: &CoefficientArray) -> Option<usize> {
    let shells = shell_max_log(c, |_| 0.0);
    let last = match shells.iter().rposition(|v| v.is_finite()) {
        Some(i) => i,
        None => return Some(0),
    };
    if last + 1 == shells.len() {
        return None;
    }
    let floor = c.meta().noise_floor.unwrap_or(0.0);
    let abrupt = shells[last] >= (1e3 * floor).ln() && shells[last] >= (1e-280f64).ln();
    abrupt.then_some(last)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedNorm {
    /// The norm, or `+∞` when the weighted terms are not decaying at the cap.
    pub value: f64,
    /// Logarithm of the norm over the stored indices.
    pub log_value: f64,
    /// Trend of the weighted log-terms per shell near the cap.
    pub tail_slope: Option<f64>,
    pub finite: bool,
}

/// `‖{c_n ϑ(n)^{±1}}‖_{ℓ^p}` over the stored indices, with `+∞` when the
/// terms still grow (p = ∞) or fail to decay (p < ∞) at the cap.
pub fn weighted_norm(
    c: &CoefficientArray,
    spec: &WeightSpec,
    p: f64,
    inverse: bool,
) -> Result<WeightedNorm> {
    spec.validate()?;
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be at least 1, got {p}")));
    }
    let sign = if inverse { -1.0 } else { 1.0 };
    let logw = |n: &MultiIndex| sign * spec.log_weight(n);
    let terms: Vec<f64> = c
        .iter()
        .zip(c.denoised())
        .filter(|(_, v)| *v != 0.0)
        .map(|((n, _), v)| v.abs().ln() + logw(&n))
        .collect();
    let log_value = if p.is_infinite() {
        terms.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        log_sum_exp(terms.iter().map(|t| p * t)) / p
    };
    if matches!(spec, WeightSpec::FiniteSupport) || support_end(c).is_some() {
        let finite = !matches!(spec, WeightSpec::FiniteSupport) || support_end(c).is_some();
        return Ok(WeightedNorm {
            value: if finite {
                log_value.exp()
            } else {
                f64::INFINITY
            },
            log_value,
            tail_slope: None,
            finite,
        });
    }
    let shells = shell_max_log(c, logw);
    let upto = complete_shells(c).min(shells.len() - 1);
    let tail_slope = trailing_slope(&shells[..=upto]);
    let finite = match tail_slope {
        Some(s) if p.is_infinite() => s <= 1e-9,
        Some(s) => s < -1e-6,
        None => true,
    };
    Ok(WeightedNorm {
        value: if finite {
            log_value.exp()
        } else {
            f64::INFINITY
        },
        log_value,
        tail_slope,
        finite,
    })
}

/// Least-squares slope of the last tenth (at least five) of the finite values.
fn trailing_slope(values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, &v)| (i as f64, v))
        .collect();
    let window = (pts.len() / 10).max(5);
    if pts.len() < window {
        return None;
    }
    let tail = &pts[pts.len() - window..];
    let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
    fit_line(&xs, &ys).map(|f| f.slope)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub alpha_hat: f64,
    pub h_hat: f64,
    /// Fitted exponent `1/(2α̂)` of `|n|` in `ln(1/|a_n|)`.
    pub exponent: f64,
    pub fit_quality: f64,
    pub tail_start: usize,
    pub points: usize,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitOptions {
    /// Smallest shell index admitted to the fit.
    pub min_index: usize,
}

const MIN_FIT_POINTS: usize = 20;
const MONOTONE_RUN: usize = 10;
const MAX_RISE_SHARE: f64 = 0.2;

/// Fit `|a_n| ≈ e^{-h|n|^{1/(2α)}}` on the tail by least squares of
/// `ln ln(1/|a_s|)` against `ln s`, where `a_s` is the shell maximum
/// normalized by the overall maximum.
pub fn fit_decay(c: &CoefficientArray, opts: FitOptions) -> Result<DecayProfile> {
    if let Some(end) = support_end(c) {
        return Err(Error::DegenerateFit(format!(
            "coefficients are finitely supported (last nonzero shell {end})"
        )));
    }
    let shells = shell_max_log(c, |_| 0.0);
    let peak = shells.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let upto = complete_shells(c).min(shells.len() - 1);
    let start = (opts.min_index..=upto)
        .find(|&s| {
            s + MONOTONE_RUN <= upto + 1
                && shells[s..s + MONOTONE_RUN]
                    .windows(2)
                    .all(|w| w[0].is_finite() && w[1].is_finite() && w[1] <= w[0])
        })
        .ok_or_else(|| Error::DegenerateFit("no monotone tail found".into()))?;
    let tail = &shells[start..=upto];
    let rises = tail.windows(2).filter(|w| w[1] > w[0]).count();
    if rises as f64 > MAX_RISE_SHARE * (tail.len().max(2) - 1) as f64 {
        return Err(Error::DegenerateFit(format!(
            "{rises} of {} tail steps increase",
            tail.len() - 1
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (s, &v) in shells.iter().enumerate().take(upto + 1).skip(start.max(1)) {
        let rel = v - peak;
        if rel.is_finite() && rel < 0.0 {
            xs.push((s as f64).ln());
            ys.push((-rel).ln());
        }
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} usable tail points, need {MIN_FIT_POINTS}",
            xs.len()
        )));
    }
    let fit =
        fit_line(&xs, &ys).ok_or_else(|| Error::DegenerateFit("singular regression".into()))?;
    if fit.slope <= 0.0 {
        return Err(Error::DegenerateFit(format!(
            "fitted exponent {:.3} shows no decay",
            fit.slope
        )));
    }
    Ok(DecayProfile {
        alpha_hat: 1.0 / (2.0 * fit.slope),
        h_hat: fit.intercept.exp(),
        exponent: fit.slope,
        fit_quality: fit.r2,
        tail_start: start,
        points: xs.len(),
        residuals: residuals(&xs, &ys, &fit),
    })
}

/// Growth profile of dual-side coefficients: [`fit_decay`] applied to `1/|a_n|`.
pub fn fit_growth(c: &CoefficientArray, opts: FitOptions) -> Result<DecayProfile> {
    let inv = c.map_indexed(|_, v| if v == 0.0 { 0.0 } else { 1.0 / v })?;
    fit_decay(&inv, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Target {
    Roumieu { alpha: f64 },
    Beurling { alpha: f64 },
    FlatRoumieu { sigma: f64 },
    FlatBeurling { sigma: f64 },
    Schwartz,
    FiniteSupport,
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::Roumieu { alpha } => write!(f, "roumieu:{alpha}"),
            Target::Beurling { alpha } => write!(f, "beurling:{alpha}"),
            Target::FlatRoumieu { sigma } => write!(f, "flat-r:{sigma}"),
            Target::FlatBeurling { sigma } => write!(f, "flat-b:{sigma}"),
            Target::Schwartz => f.write_str("schwartz"),
            Target::FiniteSupport => f.write_str("finite"),
        }
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let param = |v: &str| -> Result<f64> {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad target parameter {v:?}")))?;
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(Error::Parse(format!(
                    "target parameter must be positive, got {v}"
                )))
            }
        };
        match s.split_once(':') {
            Some(("roumieu", v)) => Ok(Target::Roumieu { alpha: param(v)? }),
            Some(("beurling", v)) => Ok(Target::Beurling { alpha: param(v)? }),
            Some(("flat-r", v)) => Ok(Target::FlatRoumieu { sigma: param(v)? }),
            Some(("flat-b", v)) => Ok(Target::FlatBeurling { sigma: param(v)? }),
            None if s == "schwartz" => Ok(Target::Schwartz),
            None if s == "finite" => Ok(Target::FiniteSupport),
            _ => Err(Error::Parse(format!("unknown target {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub target: Target,
    pub member: Membership,
    pub witness_h: Option<f64>,
    pub diagnostics: String,
    pub residuals: Vec<f64>,
    pub profile: Option<DecayProfile>,
}

/// Exponent gates around the model exponent `1/(2α)`.
const ROUMIEU_GATE: f64 = 0.9;
const BEURLING_GATE: f64 = 1.1;
const BEURLING_LADDER: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
const FLAT_ROUMIEU_SLOPE: f64 = 0.25;
const FLAT_BEURLING_SLOPE: f64 = -0.05;
const SCHWARTZ_GROWTH: f64 = 1.05;

/// Largest `h` (to a relative 1e-6) for which `finite(h)` holds, searched
/// geometrically around 1. `None` if no tested `h ≥ 2^{-60}` works.
fn largest_finite_h(finite: impl Fn(f64) -> bool) -> Option<f64> {
    let (mut lo, mut hi);
    if finite(1.0) {
        lo = 1.0;
        hi = 2.0;
        let mut k = 0;
        while finite(hi) {
            lo = hi;
            hi *= 2.0;
            k += 1;
            if k > 60 {
                return Some(lo);
            }
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        let mut k = 0;
        while !finite(lo) {
            hi = lo;
            lo *= 0.5;
            k += 1;
            if k > 60 {
                return None;
            }
        }
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if finite(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Witnesses are taken just inside the boundary so the weighted tail decreases.
const WITNESS_MARGIN: f64 = 1e-3;

fn sup_finite(c: &CoefficientArray, spec: WeightSpec) -> bool {
    weighted_norm(c, &spec, f64::INFINITY, false).is_ok_and(|w| w.finite)
}

/// Membership diagnostic for `c` against `target`.
pub fn classify(c: &CoefficientArray, target: Target) -> Decision {
    let decision =
        |member, witness_h, diagnostics: String, profile: Option<DecayProfile>| Decision {
            target,
            member,
            witness_h,
            residuals: profile
                .as_ref()
                .map(|p| p.residuals.clone())
                .unwrap_or_default(),
            diagnostics,
            profile,
        };
    if let Some(end) = support_end(c) {
        return decision(
            Membership::Yes,
            Some(1.0),
            format!("finitely supported, last nonzero shell {end}"),
            None,
        );
    }
    match target {
        Target::FiniteSupport => decision(
            Membership::No,
            None,
            "nonzero coefficients reach the truncation cap".into(),
            None,
        ),
        Target::Roumieu { alpha } | Target::Beurling { alpha } => {
            let beurling = matches!(target, Target::Beurling { .. });
            let profile = match fit_decay(c, FitOptions::default()) {
                Ok(p) => p,
                Err(e) => return no_fit(c, target, e),
            };
            let model = 1.0 / (2.0 * alpha);
            let gate = if beurling {
                BEURLING_GATE
            } else {
                ROUMIEU_GATE
            } * model;
            if profile.exponent < gate {
                let msg = format!(
                    "fitted exponent {:.4} below {gate:.4} (model exponent {model:.4})",
                    profile.exponent
                );
                return decision(Membership::No, None, msg, Some(profile));
            }
            let spec = |h| WeightSpec::Power { alpha, h };
            if beurling {
                match BEURLING_LADDER.iter().find(|&&h| !sup_finite(c, spec(h))) {
                    Some(h) => decision(
                        Membership::No,
                        None,
                        format!("weighted norm infinite at h = {h}"),
                        Some(profile),
                    ),
                    None => decision(
                        Membership::Yes,
                        Some(*BEURLING_LADDER.last().expect("ladder")),
                        format!(
                            "finite on h ladder {BEURLING_LADDER:?}; exponent {:.4}",
                            profile.exponent
                        ),
                        Some(profile),
                    ),
                }
            } else {
                match largest_finite_h(|h| sup_finite(c, spec(h))) {
                    Some(h) => {
                        let w = h * (1.0 - WITNESS_MARGIN);
                        decision(
                            Membership::Yes,
                            Some(w),
                            format!("finite up to h ≈ {h:.6}; exponent {:.4}", profile.exponent),
                            Some(profile),
                        )
                    }
                    None => decision(
                        Membership::Inconclusive,
                        None,
                        "no finite weighted norm for any tested h".into(),
                        Some(profile),
                    ),
                }
            }
        }
        Target::FlatRoumieu { sigma } | Target::FlatBeurling { sigma } => {
            classify_flat(c, target, sigma)
        }
        Target::Schwartz => classify_schwartz(c, target),
    }
}

fn no_fit(c: &CoefficientArray, target: Target, e: Error) -> Decision {
    let shells = shell_max_log(c, |_| 0.0);
    let upto = complete_shells(c).min(shells.len() - 1);
    let peak = shells.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = shells[upto];
    // Without a usable fit, only a tail that has not dropped at all is a clear no.
    let member = if last.is_finite() && last >= peak - 2f64.ln() {
        Membership::No
    } else {
        Membership::Inconclusive
    };
    Decision {
        target,
        member,
        witness_h: None,
        diagnostics: format!("decay fit unavailable: {e}"),
        residuals: Vec::new(),
        profile: None,
    }
}

fn classify_flat(c: &CoefficientArray, target: Target, sigma: f64) -> Decision {
    let beurling = matches!(target, Target::FlatBeurling { .. });
    let shells = shell_max_log(c, |n| {
        n.entries().iter().map(|&k| log_factorial(k)).sum::<f64>() / (2.0 * sigma)
    });
    let upto = complete_shells(c).min(shells.len() - 1);
    let pts: Vec<(f64, f64)> = (2..=upto)
        .filter(|&s| shells[s].is_finite() && shells[s - 1].is_finite())
        .map(|s| ((s as f64).ln(), shells[s] - shells[s - 1]))
        .collect();
    let base = Decision {
        target,
        member: Membership::Inconclusive,
        witness_h: None,
        diagnostics: String::new(),
        residuals: Vec::new(),
        profile: None,
    };
    if pts.len() < MIN_FIT_POINTS {
        return Decision {
            diagnostics: format!("{} usable increments, need {MIN_FIT_POINTS}", pts.len()),
            ..base
        };
    }
    let upper = &pts[pts.len() / 2..];
    let xs: Vec<f64> = upper.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = upper.iter().map(|p| p.1).collect();
    let fit = match fit_line(&xs, &ys) {
        Some(f) => f,
        None => {
            return Decision {
                diagnostics: "singular regression".into(),
                ..base
            }
        }
    };
    let res = residuals(&xs, &ys, &fit);
    let model = 1.0 / (2.0 * sigma);
    let spec = |h| WeightSpec::Flat { sigma, h };
    if beurling {
        if fit.slope > FLAT_BEURLING_SLOPE {
            return Decision {
                member: Membership::No,
                diagnostics: format!(
                    "increments of ln|a_n| + ln n!/(2σ) do not tend to -∞ (slope {:.4})",
                    fit.slope
                ),
                residuals: res,
                ..base
            };
        }
        return match BEURLING_LADDER.iter().find(|&&h| !sup_finite(c, spec(h))) {
            Some(h) => Decision {
                member: Membership::No,
                diagnostics: format!("flat weighted norm infinite at h = {h}"),
                residuals: res,
                ..base
            },
            None => Decision {
                member: Membership::Yes,
                witness_h: Some(*BEURLING_LADDER.last().expect("ladder")),
                diagnostics: format!("finite on h ladder; increment slope {:.4}", fit.slope),
                residuals: res,
                ..base
            },
        };
    }
    if fit.slope > FLAT_ROUMIEU_SLOPE * model {
        return Decision {
            member: Membership::No,
            diagnostics: format!(
                "increments of ln|a_n| + ln n!/(2σ) grow like {:.4}·ln n",
                fit.slope
            ),
            residuals: res,
            ..base
        };
    }
    match largest_finite_h(|h| sup_finite(c, spec(h))) {
        Some(h) => Decision {
            member: Membership::Yes,
            witness_h: Some(h * (1.0 - WITNESS_MARGIN)),
            diagnostics: format!("finite up to h ≈ {h:.6}; increment slope {:.4}", fit.slope),
            residuals: res,
            ..base
        },
        None => Decision {
            diagnostics: "no finite flat weighted norm for any tested h".into(),
            residuals: res,
            ..base
        },
    }
}

fn classify_schwartz(c: &CoefficientArray, target: Target) -> Decision {
    let shells = shell_max_log(c, |_| 0.0);
    let upto = complete_shells(c).min(shells.len() - 1);
    let peak = shells.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let orders: Vec<f64> = (1..=upto)
        .filter(|&s| shells[s].is_finite())
        .map(|s| (peak - shells[s]) / ((1 + s) as f64).ln())
        .collect();
    let base = Decision {
        target,
        member: Membership::Inconclusive,
        witness_h: None,
        diagnostics: String::new(),
        residuals: Vec::new(),
        profile: None,
    };
    if orders.len() < MIN_FIT_POINTS {
        return Decision {
            diagnostics: format!("{} usable shells, need {MIN_FIT_POINTS}", orders.len()),
            ..base
        };
    }
    let early = orders[orders.len() / 4];
    let last = *orders.last().expect("non-empty");
    let member = if last > 0.0 && last > SCHWARTZ_GROWTH * early {
        Membership::Yes
    } else {
        Membership::No
    };
    Decision {
        member,
        diagnostics: format!("effective polynomial order {early:.3} → {last:.3} across the tail"),
        ..base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBounds {
    pub h1: f64,
    pub h2: f64,
    pub c1: f64,
    pub c2: f64,
    /// `C₁‖·‖_{ℓ^∞,h₁}`, `‖·‖_{ℓ²,h}` and `C₂‖·‖_{ℓ^∞,h₂}` at truncation.
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Equivalence {
    Found(NormBounds),
    Inconclusive { reason: String },
}

/// Constants with `C₁‖a‖_{ℓ^∞,h₁} ≤ ‖a‖_{ℓ²,h} ≤ C₂‖a‖_{ℓ^∞,h₂}` for power
/// weights of index `α`, checked on the stored coefficients.
///
/// `h₁ = h`, `C₁ = 1` always works. `h₂ > h` is the first of `h(1 + 2^{-k})`
/// with a decaying weighted tail, and `C₂ = (Σ_n e^{-2(h₂-h)|n|^{1/(2α)}})^{1/2}`.
pub fn norm_equivalence_check(c: &CoefficientArray, alpha: f64, h: f64) -> Result<Equivalence> {
    let spec = |h| WeightSpec::Power { alpha, h };
    let middle = weighted_norm(c, &spec(h), 2.0, false)?;
    let lower = weighted_norm(c, &spec(h), f64::INFINITY, false)?;
    let finite_support = support_end(c).is_some();
    let (h2, c2) = if finite_support {
        let count = c.denoised().iter().filter(|v| **v != 0.0).count();
        (h, (count as f64).sqrt())
    } else {
        let h2 = (0..=20).map(|k| h * (1.0 + 0.5f64.powi(k))).find(|&h2| {
            weighted_norm(c, &spec(h2), f64::INFINITY, false)
                .is_ok_and(|w| w.finite && w.tail_slope.is_some_and(|s| s < -1e-9))
        });
        let Some(h2) = h2 else {
            return Ok(Equivalence::Inconclusive {
                reason: "no h₂ > h with a decaying weighted tail".into(),
            });
        };
        let gamma = 1.0 / (2.0 * alpha);
        let terms: Vec<f64> = c
            .shape()
            .iter()
            .map(|n| (-2.0 * (h2 - h) * (n.order() as f64).powf(gamma)).exp())
            .collect();
        (h2, pairwise_sum(&terms).sqrt())
    };
    if !middle.finite || !lower.finite {
        return Ok(Equivalence::Inconclusive {
            reason: "weighted norms at h are not finite".into(),
        });
    }
    let upper = weighted_norm(c, &spec(h2), f64::INFINITY, false)?;
    let bounds = NormBounds {
        h1: h,
        h2,
        c1: 1.0,
        c2,
        lower: lower.value,
        middle: middle.value,
        upper: c2 * upper.value,
    };
    let tol = 1e-12 * bounds.middle;
    if bounds.lower <= bounds.middle + tol && bounds.middle <= bounds.upper + tol {
        Ok(Equivalence::Found(bounds))
    } else {
        Ok(Equivalence::Inconclusive {
            reason: format!("sandwich fails at truncation: {bounds:?}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pairing {
    pub value: f64,
    /// Estimated contribution of the terms beyond the stored box.
    pub remainder: f64,
    /// Fitted geometric ratio of the shell sums, `0` for finitely many terms.
    pub rate: f64,
}

/// `Σ_n u_n f_n` over the common stored range, with a convergence guard.
pub fn dual_pairing(u: &CoefficientArray, f: &CoefficientArray) -> Result<Pairing> {
    if u.basis() != f.basis() || u.dimension() != f.dimension() {
        return Err(Error::invalid("pairing needs the same basis and dimension"));
    }
    let caps: Vec<usize> = u
        .caps()
        .iter()
        .zip(f.caps())
        .map(|(a, b)| *a.min(b))
        .collect();
    let common = crate::multiindex::BoxShape::new(&caps);
    let terms: Vec<(usize, f64)> = common
        .iter()
        .map(|n| (n.order(), u.get(&n) * f.get(&n)))
        .collect();
    let value = pairwise_sum(&terms.iter().map(|t| t.1).collect::<Vec<_>>());
    if !value.is_finite() {
        return Err(Error::Divergence("pairing terms overflow".into()));
    }
    let top = common.max_order();
    let mut shells = vec![0.0; top + 1];
    for (s, t) in &terms {
        shells[*s] += t.abs();
    }
    let last = match shells.iter().rposition(|&v| v != 0.0) {
        Some(i) => i,
        None => {
            return Ok(Pairing {
                value,
                remainder: 0.0,
                rate: 0.0,
            })
        }
    };
    if last < top {
        return Ok(Pairing {
            value,
            remainder: 0.0,
            rate: 0.0,
        });
    }
    let upto = caps.iter().copied().min().unwrap_or(0);
    let pts: Vec<(f64, f64)> = (0..=upto)
        .filter(|&s| shells[s] > 0.0)
        .map(|s| (s as f64, shells[s].ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::Divergence(format!(
            "only {} nonzero shells; tail rate cannot be fitted",
            pts.len()
        )));
    }
    let upper = &pts[pts.len() / 2..];
    let xs: Vec<f64> = upper.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = upper.iter().map(|p| p.1).collect();
    let slope = fit_line(&xs, &ys).map(|l| l.slope).unwrap_or(0.0);
    if slope >= -1e-6 {
        return Err(Error::Divergence(format!(
            "pairing terms do not decay (log-slope {slope:.3e} per shell)"
        )));
    }
    let rate = slope.exp();
    let remainder = shells[upto] * rate / (1.0 - rate);
    Ok(Pairing {
        value,
        remainder,
        rate,
    })
}

/// Spaces of the inclusion ladder, smallest first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderStep {
    pub label: &'static str,
    pub target: Target,
}

pub fn inclusion_ladder() -> Vec<LadderStep> {
    vec![
        LadderStep {
            label: "ℓ_1/4",
            target: Target::Roumieu { alpha: 0.25 },
        },
        LadderStep {
            label: "ℓ_♭1/2",
            target: Target::FlatRoumieu { sigma: 0.5 },
        },
        LadderStep {
            label: "ℓ_♭1",
            target: Target::FlatRoumieu { sigma: 1.0 },
        },
        LadderStep {
            label: "ℓ_♭2",
            target: Target::FlatRoumieu { sigma: 2.0 },
        },
        LadderStep {
            label: "ℓ_1/2",
            target: Target::Roumieu { alpha: 0.5 },
        },
        LadderStep {
            label: "ℓ_1",
            target: Target::Roumieu { alpha: 1.0 },
        },
        LadderStep {
            label: "ℓ_2",
            target: Target::Roumieu { alpha: 2.0 },
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRow {
    pub witness: String,
    pub verdicts: Vec<Membership>,
    pub witness_h: Vec<Option<f64>>,
    /// No `yes` is followed by a non-`yes` further up the ladder.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatDemo {
    pub ladder: Vec<LadderStep>,
    pub rows: Vec<DemoRow>,
    pub monotone: bool,
    /// `e^{-n}` is in `ℓ_1/2` and in none of the flat classes.
    pub strict_witness: bool,
}

pub const DEMO_CAPS: usize = 64;

/// The canonical witnesses: `r^n/n!^{1/(2σ)}`, `e^{-n}` and `e^{-h n^{1/(2α)}}`.
pub fn demo_witnesses() -> Vec<(String, CoefficientArray)> {
    let seq = |f: &dyn Fn(f64) -> f64| {
        CoefficientArray::from_fn(crate::expansion::BasisTag::Laguerre, &[DEMO_CAPS], |n| {
            f(n.entries()[0] as f64)
        })
        .expect("finite witness")
    };
    let mut out = Vec::new();
    for sigma in [0.5, 1.0, 2.0] {
        let a = seq(&|n| (-(n * 2f64.ln()) - log_factorial(n as usize) / (2.0 * sigma)).exp());
        out.push((format!("(1/2)^n / n!^(1/(2·{sigma}))"), a));
    }
    out.push(("e^-n".to_string(), seq(&|n| (-n).exp())));
    for (alpha, h) in [(0.25, 0.1), (0.5, 1.0), (1.0, 2.0), (2.0, 3.0)] {
        let a = seq(&|n| (-h * n.powf(1.0 / (2.0 * alpha))).exp());
        out.push((format!("e^(-{h}·n^(1/(2·{alpha})))"), a));
    }
    out
}

/// Membership matrix of the canonical witnesses across the inclusion ladder.
pub fn flat_inclusion_demo() -> FlatDemo {
    let ladder = inclusion_ladder();
    let rows: Vec<DemoRow> = demo_witnesses()
        .into_iter()
        .map(|(name, a)| {
            let decisions: Vec<Decision> = ladder.iter().map(|s| classify(&a, s.target)).collect();
            let verdicts: Vec<Membership> = decisions.iter().map(|d| d.member).collect();
            let first_yes = verdicts.iter().position(|&m| m == Membership::Yes);
            let monotone =
                first_yes.is_none_or(|i| verdicts[i..].iter().all(|&m| m == Membership::Yes));
            DemoRow {
                witness: name,
                verdicts,
                witness_h: decisions.iter().map(|d| d.witness_h).collect(),
                monotone,
            }
        })
        .collect();
    let strict_witness = rows.iter().find(|r| r.witness == "e^-n").is_some_and(|r| {
        ladder
            .iter()
            .zip(&r.verdicts)
            .all(|(s, &m)| match s.target {
                Target::FlatRoumieu { .. } => m == Membership::No,
                Target::Roumieu { alpha: 0.5 } => m == Membership::Yes,
                _ => true,
            })
    });
    FlatDemo {
        monotone: rows.iter().all(|r| r.monotone),
        ladder,
        rows,
        strict_witness,
    }
}
