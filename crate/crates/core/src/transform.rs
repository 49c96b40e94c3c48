//! Coefficient maps between Laguerre expansions on the orthant and even
//! Hermite expansions on `ℝ^d`, induced by `v(x) = (x_1², …, x_d²)` and
//! `w(x) = (√x_1, …, √x_d)`.
//!
//! If `f = Σ a_n l_n` then `f∘v = Σ b_{2n} h_{2n}` with
//!
//! ```text
//! b_{2n} = (-1)^{|n|} π^{d/4} √((2n)!) / (2^{|n|} n!) · Σ_k a_{k+n} (k-1/2 choose k)
//! ```
//!
//! and conversely, for even `g = Σ b_{2n} h_{2n}`, `g∘w = Σ a_n l_n` with
//!
//! ```text
//! a_n = (-1)^{|n|} 2^{|n|} / π^{d/4} · Σ_k (k-3/2 choose k) (-1)^{|k|} 2^{|k|} (k+n)! b_{2(k+n)} / √((2(k+n))!)
//! ```
//!
//! Factorials, binomials and powers of two are combined as logarithms.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{BasisTag, CoefficientArray, FunctionHandle, Meta, Substitution};
use crate::multiindex::{half_binom_1d, log_factorial, BoxShape, MultiIndex};
use crate::numeric::pairwise_sum;

/// Odd-index Hermite entries above this are a parity violation.
pub const PARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOptions {
    /// Largest `|k|` shell visited in the inner sums.
    pub k_tail: usize,
    /// The inner sum stops once the stored mass still to come is below
    /// `eps_tail · |partial sum|`.
    pub eps_tail: f64,
    /// Output caps; by default twice the input caps for `luh` and half for `hul`.
    pub out_caps: Option<Vec<usize>>,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            k_tail: 100_000,
            eps_tail: 1e-15,
            out_caps: None,
        }
    }
}

impl TransformOptions {
    pub fn validate(&self) -> Result<()> {
        if self.k_tail < 8 {
            return Err(Error::invalid(format!(
                "K_tail must be at least 8, got {}",
                self.k_tail
            )));
        }
        if !(self.eps_tail > 0.0 && self.eps_tail <= 1e-4) {
            return Err(Error::invalid(format!(
                "eps_tail must lie in (0, 1e-4], got {}",
                self.eps_tail
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerSumStats {
    /// Largest `|k|` shell any inner sum needed.
    pub max_shell: usize,
    /// Output indices whose inner sum hit `K_tail` with mass remaining.
    pub unconverged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOutput {
    pub coeffs: CoefficientArray,
    pub stats: InnerSumStats,
    pub warnings: Vec<String>,
}

/// `ln|(k + γ choose k)|` and its sign for `k = 0..=kmax` and fixed offset `γ`.
fn binom_table(offset: f64, kmax: usize) -> Result<Vec<(f64, f64)>> {
    (0..=kmax)
        .map(|k| half_binom_1d(k as f64 + offset, k).map(|b| (b.sign, b.ln_abs)))
        .collect()
}

/// `Σ_k coeff(k) · q_{k+n}` over the stored range, grouped by `|k|` shells and
/// cut off once the stored mass still ahead is negligible.
struct InnerSum<'a> {
    shape: &'a BoxShape,
    /// `q_j` by flat index of `shape`.
    q: &'a [f64],
    /// `suffix[s] = Σ_{|j| ≥ s} |q_j|`.
    suffix: Vec<f64>,
    /// Per axis `(sign, ln|binom|)`, indexed by `k_j`.
    binom: Vec<Vec<(f64, f64)>>,
    /// Extra sign `(-1)^{|k|}`.
    alternate: bool,
    opts: &'a TransformOptions,
}

impl<'a> InnerSum<'a> {
    fn new(
        shape: &'a BoxShape,
        q: &'a [f64],
        offset: f64,
        alternate: bool,
        opts: &'a TransformOptions,
    ) -> Result<Self> {
        let mut shells = vec![0.0; shape.max_order() + 2];
        for (i, v) in q.iter().enumerate() {
            shells[shape.index(i).order()] += v.abs();
        }
        let mut suffix = vec![0.0; shells.len()];
        for s in (0..shells.len() - 1).rev() {
            suffix[s] = suffix[s + 1] + shells[s];
        }
        let binom = shape
            .caps()
            .iter()
            .map(|&cap| binom_table(offset, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(InnerSum {
            shape,
            q,
            suffix,
            binom,
            alternate,
            opts,
        })
    }

    /// Returns the sum, the last shell visited, and whether the cut-off was met.
    fn eval(&self, n: &MultiIndex) -> (f64, usize, bool) {
        let caps = self.shape.caps();
        let room: Vec<usize> = caps.iter().zip(n.entries()).map(|(c, k)| c - k).collect();
        let sub = BoxShape::new(&room);
        let mut by_shell: Vec<Vec<f64>> = vec![Vec::new(); sub.max_order() + 1];
        for k in sub.iter() {
            let j = n.add(&k);
            let qj = self.q[self.shape.flat(&j).expect("inside box")];
            if qj == 0.0 {
                continue;
            }
            let mut sign = if self.alternate && k.order() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            let mut ln_abs = 0.0;
            for (axis, &kj) in k.entries().iter().enumerate() {
                let (s, l) = self.binom[axis][kj];
                sign *= s;
                ln_abs += l;
            }
            by_shell[k.order()].push(sign * ln_abs.exp() * qj);
        }
        let mut partial = 0.0;
        let mut last = 0;
        let base = n.order();
        for (t, terms) in by_shell.iter().enumerate() {
            if t > self.opts.k_tail {
                let rest = self.suffix[(base + t).min(self.suffix.len() - 1)];
                return (partial, last, rest <= self.opts.eps_tail * partial.abs());
            }
            partial += pairwise_sum(terms);
            last = t;
            let rest = self.suffix[(base + t + 1).min(self.suffix.len() - 1)];
            if rest <= self.opts.eps_tail * partial.abs() {
                break;
            }
        }
        (partial, last, true)
    }
}

fn output_caps(
    opts: &TransformOptions,
    d: usize,
    default: impl Fn(usize) -> usize,
    input: &[usize],
) -> Result<Vec<usize>> {
    match &opts.out_caps {
        Some(c) if c.len() != d => Err(Error::invalid(format!(
            "out_caps has {} entries for a {d}-dimensional input",
            c.len()
        ))),
        Some(c) => Ok(c.clone()),
        None => Ok(input.iter().map(|&k| default(k)).collect()),
    }
}

fn derived_meta(input: &CoefficientArray, name: &str) -> Meta {
    Meta {
        quad_order: None,
        source: format!("{name}({})", input.meta().source),
        noise_floor: input.meta().noise_floor,
    }
}

fn convergence_warning(name: &str, unconverged: usize, opts: &TransformOptions) -> Vec<String> {
    if unconverged == 0 {
        Vec::new()
    } else {
        vec![format!(
            "{name}: {unconverged} inner sums stopped at K_tail = {} before reaching eps_tail = {:e}",
            opts.k_tail, opts.eps_tail
        )]
    }
}

/// Laguerre coefficients of `f` to the even Hermite coefficients of `f∘v`.
pub fn luh(a: &CoefficientArray, opts: &TransformOptions) -> Result<TransformOutput> {
    opts.validate()?;
    if a.basis() != BasisTag::Laguerre {
        return Err(Error::invalid("luh expects Laguerre coefficients"));
    }
    let d = a.dimension();
    let caps = output_caps(opts, d, |k| 2 * k, a.caps())?;
    let q = a.denoised();
    let inner = InnerSum::new(a.shape(), &q, -0.5, false, opts)?;
    let ln_pi = 0.25 * d as f64 * PI.ln();
    let out_shape = BoxShape::new(&caps);
    let mut values = vec![0.0; out_shape.len()];
    let mut stats = InnerSumStats {
        max_shell: 0,
        unconverged: 0,
    };
    for (i, m) in out_shape.iter().enumerate() {
        if m.has_odd_entry() {
            continue;
        }
        let n = MultiIndex::new(m.entries().iter().map(|k| k / 2).collect());
        if !a.shape().contains(&n) {
            continue;
        }
        let (sum, shell, ok) = inner.eval(&n);
        stats.max_shell = stats.max_shell.max(shell);
        stats.unconverged += usize::from(!ok);
        if sum == 0.0 {
            continue;
        }
        let ln_pref: f64 = ln_pi
            + n.entries()
                .iter()
                .map(|&k| 0.5 * log_factorial(2 * k) - k as f64 * 2f64.ln() - log_factorial(k))
                .sum::<f64>();
        let sign = if n.order() % 2 == 1 { -1.0 } else { 1.0 };
        values[i] = sign * sum.signum() * (ln_pref + sum.abs().ln()).exp();
    }
    let coeffs =
        CoefficientArray::new(BasisTag::Hermite, &caps, values)?.with_meta(derived_meta(a, "luh"));
    Ok(TransformOutput {
        coeffs,
        warnings: convergence_warning("luh", stats.unconverged, opts),
        stats,
    })
}

/// Even Hermite coefficients of `g` to the Laguerre coefficients of `g∘w`.
///
/// Any odd-index entry above [`PARITY_TOL`] is a parity violation.
pub fn hul(b: &CoefficientArray, opts: &TransformOptions) -> Result<TransformOutput> {
    opts.validate()?;
    if b.basis() != BasisTag::Hermite {
        return Err(Error::invalid("hul expects Hermite coefficients"));
    }
    if let Some((index, value)) = b.first_odd_violation(PARITY_TOL) {
        return Err(Error::ParityViolation {
            index: index.entries().to_vec(),
            value: value.abs(),
        });
    }
    let d = b.dimension();
    let caps = output_caps(opts, d, |k| k / 2, b.caps())?;
    // q_j = 2^{|j|} j! b_{2j} / √((2j)!) on the box of half indices.
    let half_caps: Vec<usize> = b.caps().iter().map(|k| k / 2).collect();
    let half = BoxShape::new(&half_caps);
    let denoised = b.denoised();
    let q: Vec<f64> = half
        .iter()
        .map(|j| {
            let v = denoised[b.shape().flat(&j.doubled()).expect("inside box")];
            if v == 0.0 {
                return 0.0;
            }
            let ln: f64 = j
                .entries()
                .iter()
                .map(|&k| k as f64 * 2f64.ln() + log_factorial(k) - 0.5 * log_factorial(2 * k))
                .sum();
            v.signum() * (v.abs().ln() + ln).exp()
        })
        .collect();
    let inner = InnerSum::new(&half, &q, -1.5, true, opts)?;
    let ln_pi = -0.25 * d as f64 * PI.ln();
    let out_shape = BoxShape::new(&caps);
    let mut values = vec![0.0; out_shape.len()];
    let mut stats = InnerSumStats {
        max_shell: 0,
        unconverged: 0,
    };
    for (i, n) in out_shape.iter().enumerate() {
        if !half.contains(&n) {
            continue;
        }
        let (sum, shell, ok) = inner.eval(&n);
        stats.max_shell = stats.max_shell.max(shell);
        stats.unconverged += usize::from(!ok);
        let sign = if n.order() % 2 == 1 { -1.0 } else { 1.0 };
        values[i] = sign * sum * ln_pi.exp();
    }
    let coeffs =
        CoefficientArray::new(BasisTag::Laguerre, &caps, values)?.with_meta(derived_meta(b, "hul"));
    Ok(TransformOutput {
        coeffs,
        warnings: convergence_warning("hul", stats.unconverged, opts),
        stats,
    })
}

/// `x ↦ f(x_1², …, x_d²)`, even in every coordinate.
pub fn compose_v(f: FunctionHandle) -> FunctionHandle {
    FunctionHandle::Composed {
        inner: Box::new(f),
        map: Substitution::Square,
    }
}

/// `x ↦ f(√x_1, …, √x_d)` on the closed orthant. Undoes [`compose_v`] exactly.
pub fn compose_w(f: FunctionHandle) -> FunctionHandle {
    match f {
        FunctionHandle::Composed {
            inner,
            map: Substitution::Square,
        } => *inner,
        other => FunctionHandle::Composed {
            inner: Box::new(other),
            map: Substitution::Sqrt,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{hermite_coeffs, laguerre_coeffs};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn lag(vals: &[f64]) -> CoefficientArray {
        CoefficientArray::new(BasisTag::Laguerre, &[vals.len() - 1], vals.to_vec()).unwrap()
    }

    fn opts() -> TransformOptions {
        TransformOptions::default()
    }

    #[test]
    fn luh_examples() {
        let b = luh(&lag(&[1.0, 0.0, 0.0]), &opts()).unwrap().coeffs;
        assert_abs_diff_eq!(b.values()[0], PI.powf(0.25), epsilon = 1e-12);
        assert!(b.values()[1..].iter().all(|&v| v == 0.0));

        let b = luh(&lag(&[0.0, 1.0]), &opts()).unwrap().coeffs;
        assert_abs_diff_eq!(b.values()[0], PI.powf(0.25) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.values()[2], -PI.powf(0.25) / 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(b.values()[1], 0.0);

        let b = luh(&lag(&[0.0; 6]), &opts()).unwrap().coeffs;
        assert!(b.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hul_examples() {
        let h0 =
            CoefficientArray::new(BasisTag::Hermite, &[4], vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let a = hul(&h0, &opts()).unwrap().coeffs;
        assert_abs_diff_eq!(a.values()[0], PI.powf(-0.25), epsilon = 1e-12);
        assert!(a.values()[1..].iter().all(|v| v.abs() < 1e-15));

        let b = luh(&lag(&[0.0, 1.0]), &opts()).unwrap().coeffs;
        let a = hul(&b, &opts()).unwrap().coeffs;
        assert_abs_diff_eq!(a.values()[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(a.values()[1], 1.0, epsilon = 1e-10);

        let z = CoefficientArray::zeros(BasisTag::Hermite, &[6]);
        assert!(hul(&z, &opts())
            .unwrap()
            .coeffs
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn hul_rejects_odd_entries() {
        let b =
            CoefficientArray::new(BasisTag::Hermite, &[4], vec![1.0, 0.1, 0.0, 0.0, 0.0]).unwrap();
        match hul(&b, &opts()) {
            Err(Error::ParityViolation { index, value }) => {
                assert_eq!(index, vec![1]);
                assert_eq!(value, 0.1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn options_are_validated() {
        let a = lag(&[1.0]);
        let bad = TransformOptions {
            k_tail: 4,
            ..opts()
        };
        assert!(luh(&a, &bad).is_err());
        let bad = TransformOptions {
            eps_tail: 1e-3,
            ..opts()
        };
        assert!(luh(&a, &bad).is_err());
        let bad = TransformOptions {
            out_caps: Some(vec![2, 2]),
            ..opts()
        };
        assert!(luh(&a, &bad).is_err());
    }

    #[test]
    fn geometric_round_trip() {
        let a =
            CoefficientArray::from_fn(BasisTag::Laguerre, &[24], |n| 0.5f64.powi(n.order() as i32))
                .unwrap();
        let b = luh(&a, &opts()).unwrap().coeffs;
        let back = hul(&b, &opts()).unwrap().coeffs;
        for (x, y) in back.values().iter().zip(a.values()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn gaps_in_support_do_not_stop_the_inner_sum() {
        let a = lag(&[1.0, 0.0, 0.0, 0.5]);
        let b = luh(&a, &opts()).unwrap().coeffs;
        let f = FunctionHandle::parse("lin:1,0,0,0.5", BasisTag::Laguerre).unwrap();
        let oracle = hermite_coeffs(&compose_v(f), &[6], 60).unwrap();
        for (x, y) in b.values().iter().zip(oracle.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn luh_matches_quadrature_in_two_dimensions() {
        let f = FunctionHandle::Laguerre(MultiIndex::new(vec![1, 2]));
        let a = laguerre_coeffs(&f, &[3, 3], 43).unwrap();
        let b = luh(&a, &opts()).unwrap().coeffs;
        let oracle = hermite_coeffs(&compose_v(f), &[6, 6], 50).unwrap();
        for (x, y) in b.values().iter().zip(oracle.values()) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        let back = hul(&b, &opts()).unwrap().coeffs;
        for (x, y) in back.values().iter().zip(a.values()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn k_tail_cap_is_reported() {
        let a = CoefficientArray::from_fn(BasisTag::Laguerre, &[40], |_| 1.0).unwrap();
        let capped = TransformOptions {
            k_tail: 8,
            ..opts()
        };
        let out = luh(&a, &capped).unwrap();
        assert!(out.stats.unconverged > 0);
        assert_eq!(out.warnings.len(), 1);
        assert!(luh(&a, &opts()).unwrap().warnings.is_empty());
    }

    #[test]
    fn composition_examples() {
        let l0 = FunctionHandle::Laguerre(MultiIndex::scalar(0));
        let v = compose_v(l0.clone());
        for x in [-2.0, -0.3, 0.0, 1.7] {
            assert_abs_diff_eq!(
                v.eval(&[x]).unwrap(),
                (-x * x / 2.0f64).exp(),
                epsilon = 1e-15
            );
            assert_eq!(v.eval(&[x]).unwrap(), v.eval(&[-x]).unwrap());
        }
        let xe = FunctionHandle::parse("x*exp(-x/2)", BasisTag::Laguerre).unwrap();
        let v = compose_v(xe);
        assert_abs_diff_eq!(
            v.eval(&[1.5]).unwrap(),
            2.25 * (-1.125f64).exp(),
            epsilon = 1e-15
        );

        let h0 = FunctionHandle::Hermite(MultiIndex::scalar(0));
        let w = compose_w(h0);
        assert_abs_diff_eq!(
            w.eval(&[3.0]).unwrap(),
            PI.powf(-0.25) * (-1.5f64).exp(),
            epsilon = 1e-15
        );
        assert!(matches!(w.eval(&[-1.0]), Err(Error::Domain(_))));

        let back = compose_w(compose_v(l0.clone()));
        for x in [0.0, 0.3, 7.0] {
            assert_eq!(back.eval(&[x]).unwrap(), l0.eval(&[x]).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn finite_round_trip(vals in prop::collection::vec(-3.0f64..3.0, 1..=13)) {
            let a = lag(&vals);
            let b = luh(&a, &opts()).unwrap().coeffs;
            prop_assert!(b.is_even(0.0));
            let back = hul(&b, &opts()).unwrap().coeffs;
            for (x, y) in back.values().iter().zip(a.values()) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }
}
