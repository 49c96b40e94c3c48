use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pspace::basis::{hermite_fn, laguerre_fn};
use pspace::expansion::{hermite_coeffs, laguerre_coeffs, reconstruct, truncation_residual};
use pspace::operator::{apply_e_power, apply_h_power, eta_norm, eta_verdict, lp_verdict};
use pspace::quadrature::{default_order, gauss_hermite_rule, gauss_laguerre_rule};
use pspace::seqspace::{classify, flat_inclusion_demo, Target};
use pspace::transform::{hul, luh, TransformOptions};
use pspace::{verify, BasisTag, CoefficientArray, Error, FunctionHandle, MultiIndex};

#[derive(Parser)]
#[command(
    name = "pspace",
    version,
    about = "Laguerre and Hermite spectral toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    Laguerre,
    Hermite,
}

impl From<Basis> for BasisTag {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Laguerre => BasisTag::Laguerre,
            Basis::Hermite => BasisTag::Hermite,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Luh,
    Hul,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    E,
    H,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one basis function at a point.
    BasisEval {
        #[arg(long, value_enum)]
        basis: Basis,
        /// Multi-index, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Point, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        x: Vec<f64>,
    },
    /// Expand a function and write its coefficient file.
    Expand {
        #[arg(long = "fn")]
        func: String,
        #[arg(long, value_enum, default_value = "laguerre")]
        basis: Basis,
        #[arg(long, value_delimiter = ',', required = true)]
        caps: Vec<usize>,
        #[arg(long)]
        quad_order: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a coefficient file at points.
    Reconstruct {
        #[arg(long)]
        coeffs: PathBuf,
        /// Point, comma separated; repeat for several points.
        #[arg(long, required = true, allow_negative_numbers = true)]
        x: Vec<String>,
    },
    /// Decide membership of a coefficient sequence in a target class.
    Classify {
        #[arg(long)]
        coeffs: PathBuf,
        /// roumieu:α, beurling:α, flat-r:σ, flat-b:σ, schwartz or finite.
        #[arg(long)]
        target: String,
        /// Write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report on standard output; the summary moves to standard error.
        #[arg(long)]
        json: bool,
    },
    /// Map coefficients between the Laguerre and even Hermite bases.
    Transform {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long, default_value_t = 1e-15)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        k_tail: usize,
        #[arg(long, value_delimiter = ',')]
        out_caps: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply E^N or H^N, or evaluate the iterate norm and membership verdict.
    Operator {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, value_enum)]
        op: Option<Op>,
        #[arg(long, default_value_t = 1)]
        power: u32,
        #[arg(long, requires = "op")]
        out: Option<PathBuf>,
        /// Report sup_N ‖E^N f‖/(h^N N!^α) at this h.
        #[arg(long, conflicts_with_all = ["op", "out"])]
        eta_h: Option<f64>,
        /// Report whether some h makes the iterate norm finite.
        #[arg(long, conflicts_with_all = ["op", "out", "eta_h"])]
        verdict: bool,
        #[arg(long)]
        alpha: Option<f64>,
        /// Norm for --verdict: 1, 2, inf or any p ≥ 1.
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = 60)]
        n_max: usize,
    },
    /// Run invariant suites and report one row per invariant.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Membership matrix of the canonical witnesses on the inclusion ladder.
    DemoFlat {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_point(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad coordinate {t:?} in {s:?}")))
        })
        .collect()
}

fn parse_p(s: &str) -> Result<f64, Failure> {
    let p = match s {
        "inf" | "∞" => f64::INFINITY,
        _ => s
            .parse()
            .map_err(|_| usage(format!("bad norm exponent {s:?}")))?,
    };
    if p >= 1.0 {
        Ok(p)
    } else {
        Err(usage(format!("norm exponent must be at least 1, got {s}")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::BasisEval { basis, n, x } => {
            if n.len() != x.len() {
                return Err(usage(format!(
                    "index has {} entries but point has {}",
                    n.len(),
                    x.len()
                )));
            }
            let n = MultiIndex::new(n);
            let v = match basis {
                Basis::Laguerre => laguerre_fn(&n, &x)?,
                Basis::Hermite => hermite_fn(&n, &x)?,
            };
            println!("{v}");
        }
        Command::Expand {
            func,
            basis,
            caps,
            quad_order,
            out,
        } => {
            let tag = BasisTag::from(basis);
            let f = FunctionHandle::parse(&func, tag)?;
            if let Some(d) = f.dimension() {
                if d != caps.len() {
                    return Err(usage(format!(
                        "function is {d}-dimensional but --caps has {} entries",
                        caps.len()
                    )));
                }
            }
            let max_cap = caps.iter().copied().max().unwrap_or(0);
            let m = quad_order.unwrap_or_else(|| default_order(max_cap));
            let c = match basis {
                Basis::Laguerre => laguerre_coeffs(&f, &caps, m)?,
                Basis::Hermite => hermite_coeffs(&f, &caps, m)?,
            };
            let rule = match basis {
                Basis::Laguerre => gauss_laguerre_rule(m)?,
                Basis::Hermite => gauss_hermite_rule(m)?,
            };
            let r = truncation_residual(&f, &c, &rule)?;
            c.write_file(&out)?;
            println!("wrote {} coefficients to {}", c.len(), out.display());
            println!(
                "parseval residual {:e} (relative {:e})",
                r.parseval,
                r.parseval / r.f_norm_sq
            );
            println!("l2 residual {:e}", r.l2);
        }
        Command::Reconstruct { coeffs, x } => {
            let c = CoefficientArray::read_file(&coeffs)?;
            let points: Vec<Vec<f64>> =
                x.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?;
            for p in &points {
                if p.len() != c.dimension() {
                    return Err(usage(format!(
                        "point {p:?} has the wrong dimension for a {}-d expansion",
                        c.dimension()
                    )));
                }
            }
            for p in points {
                let v = reconstruct(&c, &p)?;
                let coords: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                println!("{} {v}", coords.join(","));
            }
        }
        Command::Classify {
            coeffs,
            target,
            out,
            json,
        } => {
            let target: Target = target.parse()?;
            let c = CoefficientArray::read_file(&coeffs)?;
            let d = classify(&c, target);
            let h = d
                .witness_h
                .map_or("none".to_string(), |h| format!("{h:.6}"));
            let summary = format!(
                "{target}: member {} (witness h {h})\n{}",
                d.member, d.diagnostics
            );
            let report = serde_json::to_string_pretty(&d)?;
            if let Some(p) = &out {
                std::fs::write(p, format!("{report}\n"))?;
            }
            if json {
                eprintln!("{summary}");
                println!("{report}");
            } else {
                println!("{summary}");
            }
        }
        Command::Transform {
            coeffs,
            direction,
            eps,
            k_tail,
            out_caps,
            out,
        } => {
            let opts = TransformOptions {
                k_tail,
                eps_tail: eps,
                out_caps,
            };
            opts.validate()?;
            let c = CoefficientArray::read_file(&coeffs)?;
            let t = match direction {
                Direction::Luh => luh(&c, &opts)?,
                Direction::Hul => hul(&c, &opts)?,
            };
            t.coeffs.write_file(&out)?;
            println!("wrote {} coefficients to {}", t.coeffs.len(), out.display());
            println!(
                "largest inner shell {}, unconverged sums {}",
                t.stats.max_shell, t.stats.unconverged
            );
            for w in &t.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Operator {
            coeffs,
            op,
            power,
            out,
            eta_h,
            verdict,
            alpha,
            p,
            n_max,
        } => {
            let p = parse_p(&p)?;
            if op.is_none() && eta_h.is_none() && !verdict {
                return Err(usage("choose one of --op, --eta-h or --verdict"));
            }
            if (eta_h.is_some() || verdict) && alpha.is_none() {
                return Err(usage("--eta-h and --verdict need --alpha"));
            }
            if eta_h.is_some() && p != 2.0 {
                return Err(usage("--eta-h works in L²; use --verdict for other p"));
            }
            let c = CoefficientArray::read_file(&coeffs)?;
            if let Some(op) = op {
                let r = match op {
                    Op::E => apply_e_power(&c, power)?,
                    Op::H => apply_h_power(&c, power)?,
                };
                match &out {
                    Some(path) => {
                        r.write_file(path)?;
                        println!("wrote {} coefficients to {}", r.len(), path.display());
                    }
                    None => print!("{}", r.to_json()?),
                }
            } else if let Some(h) = eta_h {
                let r = eta_norm(&c, h, alpha.expect("checked"), n_max)?;
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                let alpha = alpha.expect("checked");
                let v = if p == 2.0 {
                    eta_verdict(&c, alpha, n_max)?
                } else {
                    lp_verdict(&c, alpha, p, n_max)?
                };
                eprintln!("member {} ({})", v.member, v.reason);
                println!("{}", serde_json::to_string_pretty(&v)?);
            }
        }
        Command::Verify {
            suite,
            report,
            jobs,
        } => {
            let rows = verify::run_suite(&suite, jobs.max(1))?;
            let mut stdout = std::io::stdout().lock();
            for r in &rows {
                let tag = if r.pass { "PASS" } else { "FAIL" };
                writeln!(
                    stdout,
                    "{tag} {:<40} {:>12.4e} {:>10.3e}  {}",
                    r.invariant_id, r.measured, r.threshold, r.anchor
                )?;
            }
            let failed = rows.iter().filter(|r| !r.pass).count();
            writeln!(
                stdout,
                "{} of {} invariants pass",
                rows.len() - failed,
                rows.len()
            )?;
            if let Some(path) = report {
                verify::write_csv(&rows, std::fs::File::create(path)?)?;
            }
            if failed > 0 {
                return Err(Failure::Verify);
            }
        }
        Command::DemoFlat { out } => {
            let demo = flat_inclusion_demo();
            let labels: Vec<&str> = demo.ladder.iter().map(|s| s.label).collect();
            println!("{:<28} {}", "witness", labels.join("  "));
            for row in &demo.rows {
                let cells: Vec<String> = row
                    .verdicts
                    .iter()
                    .zip(&labels)
                    .map(|(v, l)| format!("{:<w$}", v.to_string(), w = l.chars().count()))
                    .collect();
                println!("{:<28} {}", row.witness, cells.join("  "));
            }
            println!(
                "monotone {}, strict witness {}",
                demo.monotone, demo.strict_witness
            );
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&demo)? + "\n")?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
