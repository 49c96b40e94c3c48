//! Registry of numerical invariants, run as suites by `pspace verify`.
//!
//! Each check measures one quantity and compares it with a fixed threshold.
//! Rows come back sorted by id whatever the number of worker threads.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::basis::{
    hermite_fn_table, hermite_laguerre_relation, laguerre_fn_1d, laguerre_fn_derivative_table,
    laguerre_fn_table, Parity,
};
use crate::error::{Error, Result};
use crate::expansion::{
    hermite_coeffs, laguerre_coeffs, reconstruct, truncation_residual, BasisTag, CoefficientArray,
    FunctionHandle,
};
use crate::multiindex::{enumerate_upto, half_binom_1d, log_factorial, MultiIndex};
use crate::numeric::fit_line;
use crate::operator::{
    apply_e_finite_difference, apply_e_power, eta_norm, eta_verdict, gs2_log_sup, lp_basis_norm,
    lp_verdict,
};
use crate::quadrature::{gauss_hermite_rule, gauss_laguerre_rule};
use crate::seqspace::{
    classify, dual_pairing, fit_decay, flat_inclusion_demo, weighted_norm, FitOptions, Membership,
    Target, WeightSpec,
};
use crate::transform::{compose_v, compose_w, hul, luh, TransformOptions};

pub const SUITES: &[&str] = &[
    "all",
    "multiindex",
    "basis",
    "quadrature",
    "expansion",
    "operator",
    "seqspace",
    "transform",
    "cli",
];

/// Every invariant id, in sorted order.
pub const INVARIANT_IDS: &[&str] = &[
    "basis.derivative_bound",
    "basis.hermite_laguerre_even",
    "basis.hermite_laguerre_odd",
    "basis.hermite_orthonormality",
    "basis.laguerre_orthonormality",
    "basis.pointwise_bound",
    "cli.determinism",
    "cli.file_roundtrip",
    "cli.registry_coverage",
    "expansion.idempotence",
    "expansion.parseval",
    "expansion.schwartz_decay",
    "multiindex.enumerate_order",
    "multiindex.half_binom_rational",
    "multiindex.log_factorial_exact",
    "operator.eigenrelation_fd",
    "operator.eta_classify_consistency",
    "operator.eta_model_finite",
    "operator.eta_polynomial_infinite",
    "operator.gs2_regression",
    "operator.lp_basis_bound",
    "operator.lp_equivalence",
    "operator.spectral_vs_fd",
    "quadrature.convergence_plateau",
    "quadrature.laguerre_exactness",
    "seqspace.dual_pairing_guard",
    "seqspace.dual_pairing_value",
    "seqspace.finite_combination_targets",
    "seqspace.fit_recovery_alpha",
    "seqspace.fit_recovery_h",
    "seqspace.flat_monotone",
    "seqspace.flat_strict_witness",
    "seqspace.pairing_bilinear",
    "seqspace.target_monotonicity",
    "seqspace.weighted_p_agreement",
    "transform.decay_preservation",
    "transform.exact_hul_delta0",
    "transform.exact_luh_delta0",
    "transform.exact_luh_delta1",
    "transform.oracle_hul",
    "transform.oracle_luh",
    "transform.parity",
    "transform.round_trip_finite",
    "transform.round_trip_geometric",
];

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub suite: String,
    pub invariant_id: String,
    pub anchor: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
enum Cmp {
    /// `measured < threshold`
    Below,
    /// `measured ≤ threshold`
    AtMost,
    /// `measured ≥ threshold`
    AtLeast,
}

#[derive(Debug, Clone, Copy)]
struct Measure {
    value: f64,
    threshold: f64,
    cmp: Cmp,
}

impl Measure {
    fn below(value: f64, threshold: f64) -> Self {
        Measure {
            value,
            threshold,
            cmp: Cmp::Below,
        }
    }

    fn at_most(value: f64, threshold: f64) -> Self {
        Measure {
            value,
            threshold,
            cmp: Cmp::AtMost,
        }
    }

    fn at_least(value: f64, threshold: f64) -> Self {
        Measure {
            value,
            threshold,
            cmp: Cmp::AtLeast,
        }
    }

    fn count(failures: usize) -> Self {
        Measure::at_most(failures as f64, 0.0)
    }

    fn pass(&self) -> bool {
        match self.cmp {
            Cmp::Below => self.value < self.threshold,
            Cmp::AtMost => self.value <= self.threshold,
            Cmp::AtLeast => self.value >= self.threshold,
        }
    }
}

struct Check {
    id: &'static str,
    anchor: &'static str,
    run: fn() -> Result<Measure>,
}

impl Check {
    fn suite(&self) -> &'static str {
        self.id.split('.').next().expect("ids are dotted")
    }
}

fn registry() -> Vec<Check> {
    macro_rules! check {
        ($id:literal, $anchor:literal, $run:expr) => {
            Check {
                id: $id,
                anchor: $anchor,
                run: $run,
            }
        };
    }
    vec![
        check!(
            "multiindex.enumerate_order",
            "graded-lex enumeration is strictly increasing",
            enumerate_order
        ),
        check!(
            "multiindex.half_binom_rational",
            "binomial(γ,m) for half-integer γ against rational products",
            half_binom_rational
        ),
        check!(
            "multiindex.log_factorial_exact",
            "exp(ln n!) against integer factorials",
            log_factorial_exact
        ),
        check!(
            "basis.laguerre_orthonormality",
            "Laguerre functions form an orthonormal basis",
            laguerre_orthonormality
        ),
        check!(
            "basis.hermite_orthonormality",
            "Hermite functions form an orthonormal basis",
            hermite_orthonormality
        ),
        check!(
            "basis.pointwise_bound",
            "|x^k l_n(x)| ≤ 4^k (n+1)…(n+k)",
            pointwise_bound
        ),
        check!(
            "basis.derivative_bound",
            "|x^k l_n'(x)| ≲ (1+n)^(k+1) uniformly in n",
            derivative_bound
        ),
        check!(
            "basis.hermite_laguerre_even",
            "H_2n(x) = (-1)^n 2^2n n! L_n^(-1/2)(x²)",
            hermite_laguerre_even
        ),
        check!(
            "basis.hermite_laguerre_odd",
            "H_2n+1(x) against L_n^(1/2)(x²) x",
            hermite_laguerre_odd
        ),
        check!(
            "quadrature.laguerre_exactness",
            "∫ x^k e^-x dx = k! for k ≤ 2m-1",
            laguerre_exactness
        ),
        check!(
            "quadrature.convergence_plateau",
            "coefficients stable once m ≥ n + 40",
            convergence_plateau
        ),
        check!(
            "expansion.parseval",
            "Σ a_n² = ‖f‖² for finite expansions",
            parseval
        ),
        check!(
            "expansion.idempotence",
            "coefficients of a reconstruction reproduce the input",
            idempotence
        ),
        check!(
            "expansion.schwartz_decay",
            "E^N f ∈ L² for all N gives rapidly decaying coefficients",
            schwartz_decay
        ),
        check!(
            "operator.eigenrelation_fd",
            "E l_n = n l_n by finite differences",
            eigenrelation_fd
        ),
        check!(
            "operator.spectral_vs_fd",
            "spectral E agrees with the differential operator",
            spectral_vs_fd
        ),
        check!(
            "operator.eta_model_finite",
            "model sequences have finite η norm",
            eta_model_finite
        ),
        check!(
            "operator.eta_polynomial_infinite",
            "polynomial decay has infinite η norm",
            eta_polynomial_infinite
        ),
        check!(
            "operator.eta_classify_consistency",
            "η-norm finiteness matches coefficient decay class",
            eta_classify_consistency
        ),
        check!(
            "operator.lp_equivalence",
            "member split identical for p ∈ {1, 2, ∞}",
            lp_equivalence
        ),
        check!(
            "operator.lp_basis_bound",
            "‖l_n‖_p ≤ C n² with C fitted on n ≤ 10",
            lp_basis_bound
        ),
        check!(
            "operator.gs2_regression",
            "ln sup_n s^n/n!^α linear in s^(1/α)",
            gs2_regression
        ),
        check!(
            "seqspace.target_monotonicity",
            "Roumieu membership persists as α grows",
            target_monotonicity
        ),
        check!(
            "seqspace.weighted_p_agreement",
            "p = 2 and p = ∞ weighted norms agree on finiteness",
            weighted_p_agreement
        ),
        check!(
            "seqspace.fit_recovery_alpha",
            "decay fit recovers α within 10%",
            fit_recovery_alpha
        ),
        check!(
            "seqspace.fit_recovery_h",
            "decay fit recovers h within 15%",
            fit_recovery_h
        ),
        check!(
            "seqspace.pairing_bilinear",
            "dual pairing is bilinear",
            pairing_bilinear
        ),
        check!(
            "seqspace.finite_combination_targets",
            "finite combinations belong to every class",
            finite_combination_targets
        ),
        check!(
            "seqspace.flat_monotone",
            "flat ladder memberships are monotone",
            flat_monotone
        ),
        check!(
            "seqspace.flat_strict_witness",
            "e^-n lies in ℓ_1/2 but in no flat class",
            flat_strict_witness
        ),
        check!(
            "seqspace.dual_pairing_value",
            "Σ n e^-n = e/(e-1)²",
            dual_pairing_value
        ),
        check!(
            "seqspace.dual_pairing_guard",
            "e^n · e^-n is reported divergent",
            dual_pairing_guard
        ),
        check!(
            "transform.exact_luh_delta0",
            "luh(δ_0) = π^(1/4) δ_0",
            exact_luh_delta0
        ),
        check!(
            "transform.exact_luh_delta1",
            "luh(δ_1) = (π^(1/4)/2, -π^(1/4)/√2)",
            exact_luh_delta1
        ),
        check!(
            "transform.exact_hul_delta0",
            "hul(δ_0) = π^(-1/4) δ_0",
            exact_hul_delta0
        ),
        check!(
            "transform.oracle_luh",
            "luh agrees with Hermite coefficients of f∘v",
            oracle_luh
        ),
        check!(
            "transform.oracle_hul",
            "hul agrees with Laguerre coefficients of f∘w",
            oracle_hul
        ),
        check!(
            "transform.round_trip_geometric",
            "hul∘luh = id on 2^-n, caps 24",
            round_trip_geometric
        ),
        check!(
            "transform.round_trip_finite",
            "hul∘luh = id on supports ≤ 12",
            round_trip_finite
        ),
        check!(
            "transform.decay_preservation",
            "luh preserves the fitted decay class",
            decay_preservation
        ),
        check!(
            "transform.parity",
            "odd entries of luh output are zero",
            transform_parity
        ),
        check!(
            "cli.file_roundtrip",
            "coefficient files round-trip bit-exactly",
            file_roundtrip
        ),
        check!(
            "cli.determinism",
            "repeated runs give identical bytes",
            determinism
        ),
        check!(
            "cli.registry_coverage",
            "registry matches the static id list",
            registry_coverage
        ),
    ]
}

/// Ids registered for a suite, sorted.
pub fn invariant_ids(suite: &str) -> Result<Vec<&'static str>> {
    let mut ids: Vec<_> = selected(suite)?.iter().map(|c| c.id).collect();
    ids.sort_unstable();
    Ok(ids)
}

fn selected(suite: &str) -> Result<Vec<Check>> {
    if !SUITES.contains(&suite) {
        return Err(Error::invalid(format!(
            "unknown suite {suite:?}; expected one of {}",
            SUITES.join(", ")
        )));
    }
    Ok(registry()
        .into_iter()
        .filter(|c| suite == "all" || c.suite() == suite)
        .collect())
}

fn run_check(check: &Check) -> Row {
    let (measured, threshold, pass) = match (check.run)() {
        Ok(m) => (m.value, m.threshold, m.pass()),
        Err(_) => (f64::NAN, f64::NAN, false),
    };
    Row {
        suite: check.suite().to_string(),
        invariant_id: check.id.to_string(),
        anchor: check.anchor.to_string(),
        measured,
        threshold,
        pass,
    }
}

/// Run every check of `suite` on `jobs` threads.
pub fn run_suite(suite: &str, jobs: usize) -> Result<Vec<Row>> {
    let checks = selected(suite)?;
    let jobs = jobs.clamp(1, checks.len().max(1));
    let mut rows = if jobs == 1 {
        checks.iter().map(run_check).collect()
    } else {
        let next = AtomicUsize::new(0);
        let out = Mutex::new(Vec::with_capacity(checks.len()));
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(check) = checks.get(i) else { break };
                    let row = run_check(check);
                    out.lock()
                        .expect("no worker panics while holding the lock")
                        .push(row);
                });
            }
        });
        out.into_inner().expect("workers joined")
    };
    rows.sort_by(|a: &Row, b: &Row| a.invariant_id.cmp(&b.invariant_id));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

fn seq(caps: usize, f: impl Fn(f64) -> f64) -> CoefficientArray {
    CoefficientArray::from_fn(BasisTag::Laguerre, &[caps], |n| f(n.entries()[0] as f64))
        .expect("finite test sequence")
}

fn delta(basis: BasisTag, caps: usize, n: usize) -> CoefficientArray {
    CoefficientArray::delta(basis, &[caps], &MultiIndex::scalar(n)).expect("index inside caps")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn parse(spec: &str) -> Result<FunctionHandle> {
    FunctionHandle::parse(spec, BasisTag::Laguerre)
}

fn enumerate_order() -> Result<Measure> {
    let mut bad = 0;
    for d in 1..=3 {
        for max in 0..=8 {
            let all = enumerate_upto(d, max);
            let key = |n: &MultiIndex| (n.order(), n.entries().to_vec());
            bad += all.windows(2).filter(|w| key(&w[0]) >= key(&w[1])).count();
            // C(max + d, d) indices of order ≤ max
            let expected = (1..=d).fold(1usize, |acc, j| acc * (max + j) / j);
            bad += usize::from(all.len() != expected);
        }
    }
    Ok(Measure::count(bad))
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn half_binom_rational() -> Result<Measure> {
    let mut worst = 0.0f64;
    for twice in [-3i128, -1, 1, 3] {
        let (mut num, mut den) = (1i128, 1i128);
        for m in 0..=20usize {
            if m > 0 {
                // (γ - (m-1)) / m with γ = twice/2
                num *= twice - 2 * (m as i128 - 1);
                den *= 2 * m as i128;
                let g = gcd(num, den);
                num /= g;
                den /= g;
            }
            let exact = num as f64 / den as f64;
            let got = half_binom_1d(twice as f64 / 2.0, m)?.value();
            worst = worst.max((got - exact).abs() / exact.abs());
        }
    }
    Ok(Measure::below(worst, 1e-12))
}

fn log_factorial_exact() -> Result<Measure> {
    let mut fact = 1u64;
    let mut worst = 0.0f64;
    for n in 0..=20u64 {
        if n > 0 {
            fact *= n;
        }
        let exact = fact as f64;
        worst = worst.max((log_factorial(n as usize).exp() - exact).abs() / exact);
    }
    Ok(Measure::below(worst, 1e-13))
}

fn gram_deviation(nodes: &[f64], weights: &[f64], table: impl Fn(f64) -> Vec<f64>) -> f64 {
    let tables: Vec<Vec<f64>> = nodes.iter().map(|&x| table(x)).collect();
    let mut worst = 0.0f64;
    for m in 0..=40 {
        for n in 0..=m {
            let terms: Vec<f64> = tables
                .iter()
                .zip(weights)
                .map(|(t, w)| w * t[m] * t[n])
                .collect();
            let g = crate::numeric::pairwise_sum(&terms);
            worst = worst.max((g - f64::from(u8::from(m == n))).abs());
        }
    }
    worst
}

fn laguerre_orthonormality() -> Result<Measure> {
    let rule = gauss_laguerre_rule(120)?;
    let dev = gram_deviation(rule.nodes(), rule.lifted_weights(), |x| {
        laguerre_fn_table(40, x)
    });
    Ok(Measure::below(dev, 1e-10))
}

fn hermite_orthonormality() -> Result<Measure> {
    let rule = gauss_hermite_rule(120)?;
    let dev = gram_deviation(rule.nodes(), rule.lifted_weights(), |x| {
        hermite_fn_table(40, x)
    });
    Ok(Measure::below(dev, 1e-10))
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn pointwise_bound() -> Result<Measure> {
    let mut worst = 0.0f64;
    for x in log_grid(1e-3, 200.0, 600) {
        let t = laguerre_fn_table(40, x);
        for (n, &l) in t.iter().enumerate() {
            for k in 0..=5i32 {
                let rising: f64 = (1..=k).map(|j| (n as i32 + j) as f64).product();
                let bound = 4f64.powi(k) * rising;
                worst = worst.max(x.powi(k) * l.abs() / bound);
            }
        }
    }
    Ok(Measure::at_most(worst, 1.0))
}

fn derivative_bound() -> Result<Measure> {
    // sup_x |x^k l_n'| / (1+n)^{k+1} must not grow from n ≤ 20 to 20 < n ≤ 40
    let grid = log_grid(1e-3, 200.0, 600);
    let mut growth = 0.0f64;
    for k in 0..=3i32 {
        let mut sup = vec![0.0f64; 41];
        for &x in &grid {
            for (n, d) in laguerre_fn_derivative_table(40, x).into_iter().enumerate() {
                let r = x.powi(k) * d.abs() / (1.0 + n as f64).powi(k + 1);
                sup[n] = sup[n].max(r);
            }
        }
        let low = sup[..=20].iter().cloned().fold(0.0, f64::max);
        let high = sup[21..].iter().cloned().fold(0.0, f64::max);
        growth = growth.max(high / low);
    }
    Ok(Measure::at_most(growth, 1.05))
}

fn relation_error(parity: Parity) -> f64 {
    let grid: Vec<f64> = (0..=200).map(|i| -5.0 + 0.05 * i as f64).collect();
    let mut worst = 0.0f64;
    for n in 0..=8 {
        let sides: Vec<_> = grid
            .iter()
            .map(|&x| hermite_laguerre_relation(n, x, parity))
            .collect();
        let scale = sides.iter().map(|s| s.lhs.abs()).fold(0.0, f64::max);
        for s in sides {
            worst = worst.max((s.lhs - s.rhs).abs() / scale);
        }
    }
    worst
}

fn hermite_laguerre_even() -> Result<Measure> {
    Ok(Measure::below(relation_error(Parity::Even), 1e-10))
}

fn hermite_laguerre_odd() -> Result<Measure> {
    Ok(Measure::below(relation_error(Parity::Odd), 1e-10))
}

fn laguerre_exactness() -> Result<Measure> {
    let mut worst = 0.0f64;
    for m in [5, 20, 80] {
        let rule = gauss_laguerre_rule(m)?;
        let logw = rule.log_weights();
        for k in 0..2 * m {
            let log_terms = rule
                .nodes()
                .iter()
                .zip(&logw)
                .map(|(&x, &lw)| lw + k as f64 * x.ln());
            let moment = crate::numeric::log_sum_exp(log_terms);
            worst = worst.max((moment - log_factorial(k)).exp_m1().abs());
        }
    }
    Ok(Measure::below(worst, 1e-12))
}

const SMOOTH_CATALOG: [&str; 4] = ["exp(-x)", "x^2*exp(-x)", "x*exp(-2*x)", "x^3*exp(-3*x/2)"];

fn convergence_plateau() -> Result<Measure> {
    let caps = 20;
    let mut worst = 0.0f64;
    for spec in SMOOTH_CATALOG {
        let f = parse(spec)?;
        let runs: Vec<CoefficientArray> = [caps + 40, caps + 60, caps + 80]
            .iter()
            .map(|&m| laguerre_coeffs(&f, &[caps], m))
            .collect::<Result<_>>()?;
        for w in runs.windows(2) {
            worst = worst.max(max_abs_diff(w[0].values(), w[1].values()));
        }
    }
    Ok(Measure::below(worst, 1e-10))
}

fn parseval() -> Result<Measure> {
    let cases: [(&str, usize); 4] = [
        ("l:3", 1),
        ("lin:1,0.5,-0.25", 1),
        ("x*exp(-x/2)", 1),
        ("l:1,2", 2),
    ];
    let mut worst = 0.0f64;
    for (spec, d) in cases {
        let f = parse(spec)?;
        let caps = vec![6; d];
        let c = laguerre_coeffs(&f, &caps, 60)?;
        let r = truncation_residual(&f, &c, &gauss_laguerre_rule(60)?)?;
        worst = worst.max(r.parseval.abs());
    }
    Ok(Measure::below(worst, 1e-10))
}

fn idempotence() -> Result<Measure> {
    let mut worst = 0.0f64;
    for (basis, caps) in [
        (BasisTag::Laguerre, vec![12]),
        (BasisTag::Laguerre, vec![5, 4]),
        (BasisTag::Hermite, vec![12]),
        (BasisTag::Hermite, vec![4, 5]),
    ] {
        let c = CoefficientArray::from_fn(basis, &caps, |n| {
            let k = n
                .entries()
                .iter()
                .enumerate()
                .map(|(j, &v)| (j + 1) * v)
                .sum::<usize>();
            (1.0 + 0.7 * k as f64).sin() / (1.0 + n.order() as f64)
        })?;
        let f = FunctionHandle::Combination(c.clone());
        let m = caps.iter().max().copied().unwrap_or(0) + 30;
        let back = match basis {
            BasisTag::Laguerre => laguerre_coeffs(&f, &caps, m)?,
            BasisTag::Hermite => hermite_coeffs(&f, &caps, m)?,
        };
        worst = worst.max(max_abs_diff(c.values(), back.values()));
    }
    Ok(Measure::below(worst, 1e-10))
}

fn schwartz_decay() -> Result<Measure> {
    // Slope of -ln|a_n| against ln(1+n) on n ∈ [10, 24]: the local polynomial decay order.
    let mut order = f64::INFINITY;
    for spec in ["exp(-x)", "x^2*exp(-x)", "x*exp(-2*x)"] {
        let c = laguerre_coeffs(&parse(spec)?, &[24], 80)?;
        let (xs, ys): (Vec<f64>, Vec<f64>) = (10..=24)
            .map(|n| (((1 + n) as f64).ln(), -c.values()[n].abs().ln()))
            .unzip();
        let fit = fit_line(&xs, &ys).ok_or_else(|| Error::DegenerateFit(spec.to_string()))?;
        order = order.min(fit.slope);
    }
    Ok(Measure::at_least(order, 6.0))
}

fn eigenrelation_fd() -> Result<Measure> {
    let grid: Vec<Vec<f64>> = (0..=78).map(|i| vec![0.5 + 0.25 * i as f64]).collect();
    let mut worst = 0.0f64;
    for n in 0..=10 {
        let f = FunctionHandle::Laguerre(MultiIndex::scalar(n));
        let fd = apply_e_finite_difference(&f, &grid, 1e-3)?;
        let exact: Vec<f64> = grid
            .iter()
            .map(|x| n as f64 * laguerre_fn_1d(n, x[0]))
            .collect();
        let scale = exact.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        worst = worst.max(max_abs_diff(&fd, &exact) / scale);
    }
    Ok(Measure::below(worst, 1e-5))
}

fn spectral_vs_fd() -> Result<Measure> {
    let grid: Vec<Vec<f64>> = (0..=39).map(|i| vec![0.5 + 0.5 * i as f64]).collect();
    let mut worst = 0.0f64;
    for shift in [0.0, 1.3, 2.9] {
        let c = seq(10, |n| (shift + 0.9 * n).cos() / (1.0 + n));
        let ec = apply_e_power(&c, 1)?;
        let spectral: Vec<f64> = grid
            .iter()
            .map(|x| reconstruct(&ec, x))
            .collect::<Result<_>>()?;
        let fd = apply_e_finite_difference(&FunctionHandle::Combination(c), &grid, 1e-3)?;
        let scale = spectral.iter().map(|v| v.abs()).fold(0.0, f64::max);
        worst = worst.max(max_abs_diff(&fd, &spectral) / scale);
    }
    Ok(Measure::below(worst, 1e-4))
}

fn eta_model_finite() -> Result<Measure> {
    let mut bad = 0;
    for (alpha, h, caps) in [(0.5, 0.125, 64), (1.0, 1.0, 64), (2.0, 2.0, 2000)] {
        let c = seq(caps, |n| (-h * n.powf(1.0 / alpha)).exp());
        let v = eta_verdict(&c, alpha, 60)?;
        let finite = v.result.as_ref().is_some_and(|r| r.is_finite());
        bad += usize::from(v.member != Membership::Yes || !finite);
    }
    Ok(Measure::count(bad))
}

fn eta_polynomial_infinite() -> Result<Measure> {
    let c = seq(64, |n| (1.0 + n).powi(-2));
    let mut bad = 0;
    for alpha in [0.5, 1.0, 2.0] {
        for h in [0.25, 1.0, 4.0, 16.0] {
            bad += usize::from(eta_norm(&c, h, alpha, 40)?.is_finite());
        }
        bad += usize::from(eta_verdict(&c, alpha, 60)?.member == Membership::Yes);
    }
    Ok(Measure::count(bad))
}

/// Six sequences at caps 64 spanning members and non-members of the
/// η spaces with α ∈ {1/2, 1}.
pub fn characterization_catalog() -> Vec<(&'static str, CoefficientArray)> {
    vec![
        ("e^-n", seq(64, |n| (-n).exp())),
        ("e^(-n²/8)", seq(64, |n| (-n * n / 8.0).exp())),
        (
            "(1/2)^n/n!",
            seq(64, |n| (-n * 2f64.ln() - log_factorial(n as usize)).exp()),
        ),
        ("1/(1+n)²", seq(64, |n| (1.0 + n).powi(-2))),
        (
            "δ_0 + δ_3/2",
            seq(64, |n| {
                [1.0, 0.0, 0.0, 0.5].get(n as usize).copied().unwrap_or(0.0)
            }),
        ),
        ("e^(-2√n)", seq(64, |n| (-2.0 * n.sqrt()).exp())),
    ]
}

fn eta_classify_consistency() -> Result<Measure> {
    let mut bad = 0;
    for (_, c) in characterization_catalog() {
        for alpha in [0.5, 1.0] {
            let eta = eta_verdict(&c, alpha, 60)?.member;
            let class = classify(&c, Target::Roumieu { alpha: alpha / 2.0 }).member;
            bad += usize::from(eta != class || eta == Membership::Inconclusive);
        }
    }
    Ok(Measure::count(bad))
}

fn lp_equivalence() -> Result<Measure> {
    let mut bad = 0;
    for (_, c) in characterization_catalog() {
        for alpha in [0.5, 1.0] {
            let verdicts: Vec<Membership> = [1.0, 2.0, f64::INFINITY]
                .iter()
                .map(|&p| lp_verdict(&c, alpha, p, 60).map(|v| v.member))
                .collect::<Result<_>>()?;
            bad += usize::from(verdicts.iter().any(|&v| v != verdicts[0]));
        }
    }
    Ok(Measure::count(bad))
}

fn lp_basis_bound() -> Result<Measure> {
    let mut worst = 0.0f64;
    for p in [1.0, 2.0, 4.0, f64::INFINITY] {
        let norms: Vec<f64> = (1..=60)
            .map(|n| lp_basis_norm(&MultiIndex::scalar(n), p))
            .collect::<Result<_>>()?;
        let ratio = |n: usize| norms[n - 1] / (n * n) as f64;
        let c = (1..=10).map(ratio).fold(0.0, f64::max);
        worst = worst.max((11..=60).map(ratio).fold(0.0, f64::max) / c);
    }
    Ok(Measure::at_most(worst, 1.0))
}

fn gs2_regression() -> Result<Measure> {
    let mut worst = 1.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..=198)
            .map(|i| {
                let s = 1.0 + 0.5 * i as f64;
                (s.powf(1.0 / alpha), gs2_log_sup(s, alpha))
            })
            .unzip();
        let fit = fit_line(&xs, &ys).ok_or_else(|| Error::DegenerateFit("gs2".into()))?;
        worst = worst.min(fit.r2);
    }
    Ok(Measure::at_least(worst, 0.999))
}

fn target_monotonicity() -> Result<Measure> {
    let alphas = [0.25, 0.5, 1.0, 2.0, 4.0];
    let mut bad = 0;
    for (_, c) in characterization_catalog() {
        let yes: Vec<bool> = alphas
            .iter()
            .map(|&alpha| classify(&c, Target::Roumieu { alpha }).member == Membership::Yes)
            .collect();
        bad += yes.windows(2).filter(|w| w[0] && !w[1]).count();
    }
    Ok(Measure::count(bad))
}

fn weighted_p_agreement() -> Result<Measure> {
    let hs: Vec<f64> = (-6..=3).map(|k| 2f64.powi(k)).collect();
    let mut bad = 0;
    for (_, c) in characterization_catalog() {
        for alpha in [0.25, 0.5, 1.0, 2.0] {
            let some_finite = |p: f64| -> Result<bool> {
                for &h in &hs {
                    if weighted_norm(&c, &WeightSpec::Power { alpha, h }, p, false)?.finite {
                        return Ok(true);
                    }
                }
                Ok(false)
            };
            bad += usize::from(some_finite(2.0)? != some_finite(f64::INFINITY)?);
        }
    }
    Ok(Measure::count(bad))
}

/// `(α, h)` for the recovery test: each model tail spans many decades on
/// `n ∈ [100, 2000]` without underflowing.
pub const RECOVERY_MODELS: [(f64, f64); 4] = [(0.25, 1.5e-4), (0.5, 0.3), (1.0, 3.0), (2.0, 3.0)];

fn recovery_errors() -> Result<(f64, f64)> {
    let (mut ea, mut eh) = (0.0f64, 0.0f64);
    for (alpha, h) in RECOVERY_MODELS {
        let c = seq(2000, |n| (-h * n.powf(1.0 / (2.0 * alpha))).exp());
        let p = fit_decay(&c, FitOptions { min_index: 100 })?;
        ea = ea.max((p.alpha_hat / alpha - 1.0).abs());
        eh = eh.max((p.h_hat / h - 1.0).abs());
    }
    Ok((ea, eh))
}

fn fit_recovery_alpha() -> Result<Measure> {
    Ok(Measure::at_most(recovery_errors()?.0, 0.10))
}

fn fit_recovery_h() -> Result<Measure> {
    Ok(Measure::at_most(recovery_errors()?.1, 0.15))
}

fn pairing_bilinear() -> Result<Measure> {
    let u = seq(60, |n| (1.0 + n) * (0.3 * n).cos());
    let f = seq(60, |n| (-0.8 * n).exp());
    let g = seq(60, |n| (0.5 * n).sin() * (-n).exp());
    let k = 0.7;
    let combo = CoefficientArray::new(
        BasisTag::Laguerre,
        &[60],
        f.values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| k * a + b)
            .collect(),
    )?;
    let lhs = dual_pairing(&u, &combo)?.value;
    let rhs = k * dual_pairing(&u, &f)?.value + dual_pairing(&u, &g)?.value;
    Ok(Measure::at_most((lhs - rhs).abs(), 1e-12))
}

fn finite_combination_targets() -> Result<Measure> {
    let targets = [
        Target::Roumieu { alpha: 0.5 },
        Target::Beurling { alpha: 1.0 },
        Target::FlatRoumieu { sigma: 1.0 },
        Target::FlatBeurling { sigma: 0.5 },
        Target::Schwartz,
        Target::FiniteSupport,
    ];
    let mut bad = 0;
    for (spec, d) in [("l:3", 1), ("lin:1,0.5,-0.25", 1), ("l:1,2", 2)] {
        let c = laguerre_coeffs(&parse(spec)?, &vec![8; d], 60)?;
        for t in targets {
            bad += usize::from(classify(&c, t).member != Membership::Yes);
        }
    }
    Ok(Measure::count(bad))
}

fn flat_monotone() -> Result<Measure> {
    let demo = flat_inclusion_demo();
    Ok(Measure::count(
        demo.rows.iter().filter(|r| !r.monotone).count(),
    ))
}

fn flat_strict_witness() -> Result<Measure> {
    Ok(Measure::at_least(
        f64::from(u8::from(flat_inclusion_demo().strict_witness)),
        1.0,
    ))
}

fn dual_pairing_value() -> Result<Measure> {
    let e = std::f64::consts::E;
    let r = dual_pairing(&seq(60, |n| n), &seq(60, |n| (-n).exp()))?;
    Ok(Measure::below(
        (r.value - e / ((e - 1.0) * (e - 1.0))).abs(),
        1e-10,
    ))
}

fn dual_pairing_guard() -> Result<Measure> {
    let fired = matches!(
        dual_pairing(&seq(60, |n| n.exp()), &seq(60, |n| (-n).exp())),
        Err(Error::Divergence(_))
    );
    Ok(Measure::at_least(f64::from(u8::from(fired)), 1.0))
}

fn quarter_pi() -> f64 {
    std::f64::consts::PI.powf(0.25)
}

fn exact_luh_delta0() -> Result<Measure> {
    let b = luh(
        &delta(BasisTag::Laguerre, 4, 0),
        &TransformOptions::default(),
    )?
    .coeffs;
    let mut expected = vec![0.0; b.len()];
    expected[0] = quarter_pi();
    Ok(Measure::below(max_abs_diff(b.values(), &expected), 1e-12))
}

fn exact_luh_delta1() -> Result<Measure> {
    let b = luh(
        &delta(BasisTag::Laguerre, 4, 1),
        &TransformOptions::default(),
    )?
    .coeffs;
    let mut expected = vec![0.0; b.len()];
    expected[0] = quarter_pi() / 2.0;
    expected[2] = -quarter_pi() / 2f64.sqrt();
    Ok(Measure::below(max_abs_diff(b.values(), &expected), 1e-10))
}

fn exact_hul_delta0() -> Result<Measure> {
    let a = hul(
        &delta(BasisTag::Hermite, 8, 0),
        &TransformOptions::default(),
    )?
    .coeffs;
    let mut expected = vec![0.0; a.len()];
    expected[0] = 1.0 / quarter_pi();
    Ok(Measure::below(max_abs_diff(a.values(), &expected), 1e-12))
}

fn oracle_luh() -> Result<Measure> {
    let mut worst = 0.0f64;
    for spec in ["l:0", "l:1", "l:2", "lin:1,0,0,0.5"] {
        let f = parse(spec)?;
        let a = laguerre_coeffs(&f, &[3], 40)?;
        let b = luh(&a, &TransformOptions::default())?.coeffs;
        let direct = hermite_coeffs(&compose_v(f), b.caps(), 60)?;
        worst = worst.max(max_abs_diff(b.values(), direct.values()));
    }
    Ok(Measure::below(worst, 1e-8))
}

fn oracle_hul() -> Result<Measure> {
    let mut worst = 0.0f64;
    for spec in ["h:0", "h:2", "lin:1,0,0,0,0.3"] {
        let f = FunctionHandle::parse(spec, BasisTag::Hermite)?;
        let b = hermite_coeffs(&f, &[4], 60)?;
        let a = hul(&b, &TransformOptions::default())?.coeffs;
        let direct = laguerre_coeffs(&compose_w(f), a.caps(), 60)?;
        worst = worst.max(max_abs_diff(a.values(), direct.values()));
    }
    Ok(Measure::below(worst, 1e-8))
}

fn round_trip_error(a: &CoefficientArray) -> Result<f64> {
    let opts = TransformOptions::default();
    let b = luh(a, &opts)?.coeffs;
    let back = hul(&b, &opts)?.coeffs;
    Ok(max_abs_diff(a.values(), back.values()))
}

fn round_trip_geometric() -> Result<Measure> {
    Ok(Measure::below(
        round_trip_error(&seq(24, |n| 0.5f64.powf(n)))?,
        1e-8,
    ))
}

fn round_trip_finite() -> Result<Measure> {
    // Both maps are linear, so the unit vectors of support ≤ 12 cover the whole span.
    let mut worst = 0.0f64;
    for n in 0..=12 {
        worst = worst.max(round_trip_error(&delta(BasisTag::Laguerre, 12, n))?);
    }
    worst = worst.max(round_trip_error(&seq(12, |n| (1.0 + n).sin()))?);
    let two_d = CoefficientArray::from_fn(BasisTag::Laguerre, &[4, 3], |n| {
        1.0 / (1.0 + n.entries()[0] as f64 + 2.0 * n.entries()[1] as f64)
    })?;
    worst = worst.max(round_trip_error(&two_d)?);
    Ok(Measure::below(worst, 1e-8))
}

fn decay_preservation() -> Result<Measure> {
    let caps = 200;
    let mut inputs: Vec<CoefficientArray> = [(0.5, 1.0), (1.0, 2.0), (2.0, 3.0)]
        .iter()
        .map(|&(alpha, h)| seq(caps, |n| (-h * n.powf(1.0 / (2.0 * alpha))).exp()))
        .collect();
    for sigma in [0.5, 1.0] {
        inputs.push(seq(caps, |n| {
            (-n * 2f64.ln() - log_factorial(n as usize) / (2.0 * sigma)).exp()
        }));
    }
    let mut worst = 0.0f64;
    for a in inputs {
        let b = luh(&a, &TransformOptions::default())?.coeffs;
        let even = seq(caps, |n| b.values()[2 * n as usize]);
        let fa = fit_decay(&a, FitOptions::default())?;
        let fb = fit_decay(&even, FitOptions::default())?;
        worst = worst.max((fb.alpha_hat / fa.alpha_hat - 1.0).abs());
    }
    Ok(Measure::at_most(worst, 0.15))
}

fn transform_parity() -> Result<Measure> {
    let mut worst = 0.0f64;
    let inputs = [
        seq(16, |n| 0.5f64.powf(n)),
        CoefficientArray::from_fn(BasisTag::Laguerre, &[3, 4], |n| 1.0 + n.order() as f64)?,
    ];
    for a in inputs {
        let b = luh(&a, &TransformOptions::default())?.coeffs;
        for (n, v) in b.iter() {
            if n.has_odd_entry() {
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(Measure::at_most(worst, 0.0))
}

fn file_roundtrip() -> Result<Measure> {
    let opts = TransformOptions::default();
    let arrays = [
        seq(24, |n| (1.0 + n).sqrt().recip() * (0.1 * n).sin()),
        luh(&seq(10, |n| 0.3f64.powf(n)), &opts)?.coeffs,
        laguerre_coeffs(&parse("l:1,2")?, &[6, 5], 40)?,
    ];
    let dir = std::env::temp_dir();
    let mut bad = 0;
    for (i, a) in arrays.iter().enumerate() {
        let path = dir.join(format!("pspace-verify-{}-{i}.json", std::process::id()));
        a.write_file(&path)?;
        let first = std::fs::read(&path)?;
        CoefficientArray::read_file(&path)?.write_file(&path)?;
        let second = std::fs::read(&path)?;
        std::fs::remove_file(&path)?;
        bad += usize::from(first != second);
    }
    Ok(Measure::count(bad))
}

fn pipeline_bytes() -> Result<String> {
    let a = laguerre_coeffs(&parse("x^2*exp(-x)")?, &[30], 80)?;
    let b = luh(&a, &TransformOptions::default())?.coeffs;
    let decision = classify(&a, Target::Roumieu { alpha: 0.5 });
    let verdict = eta_verdict(&a, 1.0, 40)?;
    Ok(format!(
        "{}{}{}",
        b.to_json()?,
        serde_json::to_string(&decision)?,
        serde_json::to_string(&verdict)?
    ))
}

fn determinism() -> Result<Measure> {
    let first = pipeline_bytes()?;
    let bad = (0..2)
        .filter(|_| pipeline_bytes().ok().as_ref() != Some(&first))
        .count();
    Ok(Measure::count(bad))
}

fn registry_coverage() -> Result<Measure> {
    let mut ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
    ids.sort_unstable();
    let missing = INVARIANT_IDS.iter().filter(|id| !ids.contains(id)).count();
    let extra = ids.iter().filter(|id| !INVARIANT_IDS.contains(id)).count();
    let dupes = ids.windows(2).filter(|w| w[0] == w[1]).count();
    Ok(Measure::count(missing + extra + dupes))
}
