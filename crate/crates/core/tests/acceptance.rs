//! Acceptance criteria, one line of output per criterion.

use std::f64::consts::{E, PI};

use pspace::basis::{hermite_fn_table, laguerre_fn_table};
use pspace::expansion::{
    hermite_coeffs, laguerre_coeffs, BasisTag, CoefficientArray, FunctionHandle,
};
use pspace::multiindex::MultiIndex;
use pspace::operator::{
    apply_e_finite_difference, eta_verdict, gs2_log_sup, lp_basis_norm, lp_verdict,
};
use pspace::quadrature::{gauss_hermite_rule, gauss_laguerre_rule};
use pspace::seqspace::{
    classify, dual_pairing, fit_decay, flat_inclusion_demo, FitOptions, Membership, Target,
};
use pspace::transform::{compose_v, compose_w, hul, luh, TransformOptions};
use pspace::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn seq(caps: usize, f: impl Fn(f64) -> f64) -> CoefficientArray {
    CoefficientArray::from_fn(BasisTag::Laguerre, &[caps], |n| f(n.entries()[0] as f64)).unwrap()
}

fn delta(basis: BasisTag, caps: usize, n: usize) -> CoefficientArray {
    CoefficientArray::delta(basis, &[caps], &MultiIndex::scalar(n)).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gram(nodes: &[f64], weights: &[f64], table: impl Fn(f64) -> Vec<f64>) -> f64 {
    let t: Vec<Vec<f64>> = nodes.iter().map(|&x| table(x)).collect();
    let mut worst = 0.0f64;
    for m in 0..=40 {
        for n in 0..=40 {
            let g: f64 = t.iter().zip(weights).map(|(r, w)| w * r[m] * r[n]).sum();
            worst = worst.max((g - if m == n { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn orthonormality() -> Outcome {
    let lr = gauss_laguerre_rule(120).unwrap();
    let hr = gauss_hermite_rule(120).unwrap();
    let l = gram(lr.nodes(), lr.lifted_weights(), |x| {
        laguerre_fn_table(40, x)
    });
    let h = gram(hr.nodes(), hr.lifted_weights(), |x| hermite_fn_table(40, x));
    check(
        l < 1e-10 && h < 1e-10,
        format!("Laguerre Gram dev {l:.2e}, Hermite {h:.2e}"),
    )
}

/// `L_n(x) e^{-x/2}` from the explicit sum, independent of the recurrence.
fn laguerre_explicit(n: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * x.powi(k as i32) / ln_fact(k).exp();
    }
    sum * (-x / 2.0).exp()
}

fn eigenrelation() -> Outcome {
    let grid: Vec<Vec<f64>> = (0..=78).map(|i| vec![0.5 + 0.25 * i as f64]).collect();
    let mut worst = 0.0f64;
    for n in 0..=10 {
        let fd = apply_e_finite_difference(
            &FunctionHandle::Laguerre(MultiIndex::scalar(n)),
            &grid,
            1e-3,
        )
        .unwrap();
        let exact: Vec<f64> = grid
            .iter()
            .map(|x| n as f64 * laguerre_explicit(n, x[0]))
            .collect();
        // sup-norm relative error; absolute for n = 0 where n·l_n vanishes
        let scale = exact.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        worst = worst.max(max_diff(&fd, &exact) / scale);
    }
    check(worst < 1e-5, format!("max relative error {worst:.2e}"))
}

fn transform_exactness() -> Outcome {
    let opts = TransformOptions::default();
    let q = PI.powf(0.25);
    let b0 = luh(&delta(BasisTag::Laguerre, 3, 0), &opts).unwrap().coeffs;
    let b1 = luh(&delta(BasisTag::Laguerre, 3, 1), &opts).unwrap().coeffs;
    let a0 = hul(&delta(BasisTag::Hermite, 6, 0), &opts).unwrap().coeffs;
    let mut e0 = vec![0.0; b0.len()];
    e0[0] = q;
    let mut e1 = vec![0.0; b1.len()];
    e1[0] = q / 2.0;
    e1[2] = -q / 2f64.sqrt();
    let mut e2 = vec![0.0; a0.len()];
    e2[0] = 1.0 / q;
    let (d0, d1, d2) = (
        max_diff(b0.values(), &e0),
        max_diff(b1.values(), &e1),
        max_diff(a0.values(), &e2),
    );
    check(
        d0 < 1e-12 && d1 < 1e-10 && d2 < 1e-12,
        format!("luh δ_0 {d0:.1e}, luh δ_1 {d1:.1e}, hul δ_0 {d2:.1e}"),
    )
}

fn transform_oracle() -> Outcome {
    let opts = TransformOptions::default();
    let mut fwd = 0.0f64;
    for spec in ["l:0", "l:1", "l:2", "lin:1,0,0,0.5"] {
        let f = FunctionHandle::parse(spec, BasisTag::Laguerre).unwrap();
        let b = luh(&laguerre_coeffs(&f, &[3], 40).unwrap(), &opts)
            .unwrap()
            .coeffs;
        let direct = hermite_coeffs(&compose_v(f), b.caps(), 60).unwrap();
        fwd = fwd.max(max_diff(b.values(), direct.values()));
    }
    let mut rev = 0.0f64;
    for spec in ["h:0", "h:2", "lin:1,0,0,0,0.3"] {
        let f = FunctionHandle::parse(spec, BasisTag::Hermite).unwrap();
        let a = hul(&hermite_coeffs(&f, &[4], 60).unwrap(), &opts)
            .unwrap()
            .coeffs;
        let direct = laguerre_coeffs(&compose_w(f), a.caps(), 60).unwrap();
        rev = rev.max(max_diff(a.values(), direct.values()));
    }
    check(
        fwd < 1e-8 && rev < 1e-8,
        format!("forward {fwd:.2e}, reverse {rev:.2e}"),
    )
}

fn round_trip() -> Outcome {
    let opts = TransformOptions::default();
    let err = |a: &CoefficientArray| {
        let back = hul(&luh(a, &opts).unwrap().coeffs, &opts).unwrap().coeffs;
        max_diff(a.values(), back.values())
    };
    let geo = err(&seq(24, |n| 0.5f64.powf(n)));
    // linear maps: unit vectors plus a dense combination cover support ≤ 12
    let mut fin = (0..=12)
        .map(|n| err(&delta(BasisTag::Laguerre, 12, n)))
        .fold(0.0, f64::max);
    fin = fin.max(err(&seq(12, |n| (0.4 * n).cos() - 0.1 * n)));
    check(
        geo < 1e-8 && fin < 1e-8,
        format!("2^-n {geo:.2e}, finite supports {fin:.2e}"),
    )
}

fn fit_recovery() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for (alpha, h) in [(0.25, 1.5e-4), (0.5, 0.3), (1.0, 3.0), (2.0, 3.0)] {
        let c = seq(2000, |n| (-h * n.powf(1.0 / (2.0 * alpha))).exp());
        let p = fit_decay(&c, FitOptions { min_index: 100 }).unwrap();
        worst.0 = worst.0.max((p.alpha_hat / alpha - 1.0).abs());
        worst.1 = worst.1.max((p.h_hat / h - 1.0).abs());
    }
    check(
        worst.0 <= 0.10 && worst.1 <= 0.15,
        format!("max rel error α {:.1e}, h {:.1e}", worst.0, worst.1),
    )
}

/// Catalog at caps 64 with the memberships that follow from the decay rates:
/// `(name, sequence, member of the η space at α = 1/2, at α = 1)`.
fn catalog() -> Vec<(&'static str, CoefficientArray, [bool; 2])> {
    vec![
        ("e^-n", seq(64, |n| (-n).exp()), [false, true]),
        ("e^(-n²/8)", seq(64, |n| (-n * n / 8.0).exp()), [true, true]),
        (
            "(1/2)^n/n!",
            seq(64, |n| (-n * 2f64.ln() - ln_fact(n as usize)).exp()),
            [false, true],
        ),
        ("1/(1+n)²", seq(64, |n| (1.0 + n).powi(-2)), [false, false]),
        (
            "δ_0+δ_3/2",
            seq(64, |n| {
                [1.0, 0.0, 0.0, 0.5].get(n as usize).copied().unwrap_or(0.0)
            }),
            [true, true],
        ),
        (
            "e^(-2√n)",
            seq(64, |n| (-2.0 * n.sqrt()).exp()),
            [false, false],
        ),
    ]
}

fn as_membership(b: bool) -> Membership {
    if b {
        Membership::Yes
    } else {
        Membership::No
    }
}

fn characterization() -> Outcome {
    let mut bad = Vec::new();
    for (name, c, expected) in catalog() {
        for (i, alpha) in [0.5, 1.0].into_iter().enumerate() {
            let eta = eta_verdict(&c, alpha, 60).unwrap().member;
            let class = classify(&c, Target::Roumieu { alpha: alpha / 2.0 }).member;
            if eta != class || eta != as_membership(expected[i]) {
                bad.push(format!("{name} α={alpha}: η {eta}, classify {class}"));
            }
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            "12/12 verdicts agree".into()
        } else {
            bad.join("; ")
        },
    )
}

fn lp_equivalence() -> Outcome {
    let mut bad = Vec::new();
    for (name, c, expected) in catalog() {
        for (i, alpha) in [0.5, 1.0].into_iter().enumerate() {
            for p in [1.0, 2.0, f64::INFINITY] {
                let v = lp_verdict(&c, alpha, p, 60).unwrap().member;
                if v != as_membership(expected[i]) {
                    bad.push(format!("{name} α={alpha} p={p}: {v}"));
                }
            }
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            "36/36 verdicts match".into()
        } else {
            bad.join("; ")
        },
    )
}

fn basis_norm_bound() -> Outcome {
    let mut worst = 0.0f64;
    let mut l2_dev = 0.0f64;
    for p in [1.0, 2.0, 4.0, f64::INFINITY] {
        let norms: Vec<f64> = (1..=60)
            .map(|n| lp_basis_norm(&MultiIndex::scalar(n), p).unwrap())
            .collect();
        if p == 2.0 {
            l2_dev = norms.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        }
        let c = (1..=10)
            .map(|n| norms[n - 1] / (n * n) as f64)
            .fold(0.0, f64::max);
        for n in 1..=60 {
            worst = worst.max(norms[n - 1] / (c * (n * n) as f64));
        }
    }
    check(
        worst <= 1.0 && l2_dev < 1e-10,
        format!("max ‖l_n‖_p/(C n²) {worst:.3}, ‖l_n‖_2 deviation {l2_dev:.1e}"),
    )
}

fn gs2() -> Outcome {
    let mut worst = 1.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..=198 {
            let s = 1.0 + 0.5 * i as f64;
            let direct = (0..=(3.0 * s.powf(1.0 / alpha)) as usize + 10)
                .map(|n| n as f64 * s.ln() - alpha * ln_fact(n))
                .fold(f64::NEG_INFINITY, f64::max);
            let lib = gs2_log_sup(s, alpha);
            if (lib - direct).abs() > 1e-9 * direct.abs().max(1.0) {
                return Err(format!(
                    "gs2_log_sup({s}, {alpha}) = {lib}, enumeration {direct}"
                ));
            }
            xs.push(s.powf(1.0 / alpha));
            ys.push(lib);
        }
        let k = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        worst = worst.min(sxy * sxy / (sxx * syy));
    }
    check(worst > 0.999, format!("min r² {worst:.5}"))
}

fn flat_hierarchy() -> Outcome {
    let demo = flat_inclusion_demo();
    let row = demo
        .rows
        .iter()
        .find(|r| r.witness == "e^-n")
        .ok_or("no e^-n row")?;
    let labels: Vec<&str> = demo.ladder.iter().map(|s| s.label).collect();
    let verdict = |label: &str| row.verdicts[labels.iter().position(|l| *l == label).unwrap()];
    let in_half = verdict("ℓ_1/2") == Membership::Yes;
    let in_no_flat = labels
        .iter()
        .filter(|l| l.contains('♭'))
        .all(|l| verdict(l) == Membership::No);
    check(
        demo.monotone && demo.strict_witness && in_half && in_no_flat,
        format!(
            "monotone {}, e^-n in ℓ_1/2 {in_half}, in no flat class {in_no_flat}",
            demo.monotone
        ),
    )
}

fn pairing() -> Outcome {
    let f = seq(60, |n| (-n).exp());
    let r = dual_pairing(&seq(60, |n| n), &f).unwrap();
    let err = (r.value - E / ((E - 1.0) * (E - 1.0))).abs();
    let guard = matches!(
        dual_pairing(&seq(60, |n| n.exp()), &f),
        Err(Error::Divergence(_))
    );
    check(
        err < 1e-10 && guard,
        format!("error {err:.1e}, divergence guard {guard}"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("orthonormality", orthonormality),
        ("eigenrelation", eigenrelation),
        ("transform exactness", transform_exactness),
        ("transform oracle agreement", transform_oracle),
        ("round trip", round_trip),
        ("decay-fit recovery", fit_recovery),
        ("characterization consistency", characterization),
        ("L^p equivalence", lp_equivalence),
        ("basis L^p bound", basis_norm_bound),
        ("GS2 exponent", gs2),
        ("flat hierarchy", flat_hierarchy),
        ("dual pairing", pairing),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
