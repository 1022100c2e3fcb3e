use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qexpander::channels::{tensor_channels_with_cap, traceless_part};
use qexpander::construction::{
    build_gt, build_net, cert_bound, net_search, random_base, CompositionRule, ExpanderCert, GeneratorSet, SearchMode,
    DEFAULT_MATERIALIZE_CAP, DEFAULT_SEARCH_BUDGET,
};
use qexpander::linalg::{ginibre, hs_inner, seeded_rng, DEFAULT_DIM_CAP, UNITARY_TOL};
use qexpander::spectral::{lambda_exact_with_cap, lambda_power, PowerConfig, DEFAULT_EXACT_CAP};
use qexpander::zigzag::zigzag_with_cap;
use qexpander::{ComplexMatrix, MixedUnitaryEnsemble, SpectralEstimate};

use crate::format::{read_ensemble, read_file, write_ensemble, Encoding};
use crate::report::{ReportRow, RunReport, ValueTag};

/// Slack allowed between a certified bound and a measured value.
const CERT_SLACK: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "qexpander", version, about = "Build and check quantum expanders")]
pub struct Cli {
    /// Also write the report as JSON to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Seed for every random choice; generated and reported when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a Haar-random base ensemble.
    GenBase {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        out: OutputArgs,
        /// Also measure the expansion of the result.
        #[arg(long)]
        measure: bool,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Search a word net for the best d-tuple of unitaries.
    NetSearch {
        #[arg(long, default_value = "ht")]
        gens: String,
        #[arg(long, default_value_t = 4)]
        max_word_length: usize,
        #[arg(long, default_value_t = 0.1)]
        accuracy: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_enum, default_value_t = SearchModeArg::Exhaustive)]
        mode: SearchModeArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Square an ensemble.
    Square {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        measure: bool,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Tensor two ensembles.
    Tensor {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
        cap: usize,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        measure: bool,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Zig-Zag product of two ensembles; dim(g2) must equal degree(g1).
    Zigzag {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
        cap: usize,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        measure: bool,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Measure the expansion of an ensemble.
    Lambda {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Run the recursive construction from a base ensemble with dim = degree^8.
    Construct {
        #[arg(long)]
        base: PathBuf,
        #[arg(long, default_value_t = 2)]
        t: usize,
        /// Largest dimension that is materialized as an ensemble.
        #[arg(long, default_value_t = DEFAULT_MATERIALIZE_CAP)]
        cap: usize,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Check a stored ensemble: unitarity, fixed point, trace, positivity,
    /// adjointness, contraction and the expansion range.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of random test operators.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchModeArg {
    Exhaustive,
    Sample,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Encoding::Binary)]
    pub encoding: Encoding,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    /// Defaults to exact up to dimension 64 and power iteration above.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
}

/// Returns the run's seed, generating and recording one on first use.
fn seed(report: &mut RunReport, explicit: Option<u64>) -> u64 {
    if let Some(seed) = report.seed {
        return seed;
    }
    let (seed, generated) = match explicit {
        Some(s) => (s, false),
        None => {
            let nanos = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_nanos())
                .unwrap_or(0);
            (nanos as u64 ^ u64::from(std::process::id()), true)
        }
    };
    report.seed = Some(seed);
    report.seed_generated = generated;
    seed
}

fn measure(
    g: &MixedUnitaryEnsemble,
    args: &SpectralArgs,
    report: &mut RunReport,
    explicit: Option<u64>,
) -> Result<SpectralEstimate> {
    let method = args.method.unwrap_or(if g.dim() <= DEFAULT_EXACT_CAP {
        MethodArg::Exact
    } else {
        MethodArg::Power
    });
    let est = match method {
        MethodArg::Exact => lambda_exact_with_cap(g, DEFAULT_EXACT_CAP)?,
        MethodArg::Power => {
            let seed = seed(report, explicit);
            let cfg = PowerConfig {
                tol: args.tol,
                max_iter: args.max_iter,
                restarts: args.restarts,
                seed,
            };
            lambda_power(g, &cfg)?
        }
    };
    Ok(est)
}

fn measured_row(op: &str, g: &MixedUnitaryEnsemble, est: &SpectralEstimate) -> ReportRow {
    let row = ReportRow::new(op, g.dim(), g.degree()).with_lambda(est.lambda, est.method.into());
    if est.converged {
        row
    } else {
        row.with_note(format!("not converged after {} iterations", est.iterations))
    }
}

fn check_cert(report: &mut RunReport, what: &str, bound: f64, measured: f64) {
    report.check(
        format!("{what}: cert >= measured"),
        bound >= measured - CERT_SLACK,
        format!("{bound:.6e} vs {measured:.6e}"),
    );
}

fn save(g: &MixedUnitaryEnsemble, out: &OutputArgs, report: &mut RunReport) -> Result<()> {
    if let Some(path) = &out.out {
        write_ensemble(g, path, out.encoding)?;
        report.outputs.push(path.display().to_string());
    }
    Ok(())
}

fn load(path: &Path) -> Result<MixedUnitaryEnsemble> {
    Ok(read_ensemble(path)?)
}

/// Measures the inputs and output of a composition and checks the certified
/// bound against the measurement.
fn measure_composition(
    report: &mut RunReport,
    spectral: &SpectralArgs,
    rule: CompositionRule,
    inputs: &[(&str, &MixedUnitaryEnsemble)],
    out_name: &str,
    out: &MixedUnitaryEnsemble,
    explicit: Option<u64>,
) -> Result<()> {
    let mut lambdas = Vec::with_capacity(inputs.len());
    for (name, g) in inputs {
        let est = measure(g, spectral, report, explicit)?;
        report.row(measured_row(name, g, &est));
        lambdas.push(est.lambda.clamp(0.0, 1.0));
    }
    let bound = cert_bound(rule, &lambdas)?;
    report.row(ReportRow::new(format!("{out_name} bound"), out.dim(), out.degree()).with_lambda(bound, ValueTag::Cert));
    let est = measure(out, spectral, report, explicit)?;
    report.row(measured_row(out_name, out, &est));
    check_cert(report, out_name, bound, est.lambda);
    Ok(())
}

/// Runs one command. The command echo is recorded in the report verbatim.
pub fn run(cli: &Cli, echo: &str) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new(echo);
    let explicit = cli.seed;
    match &cli.command {
        Command::GenBase {
            n,
            d,
            out,
            measure: want,
            spectral,
        } => {
            let seed = seed(&mut report, explicit);
            let h = random_base(*n, *d, seed)?;
            if *want {
                let est = measure(&h, spectral, &mut report, explicit)?;
                report.row(measured_row(h.label(), &h, &est));
            } else {
                report.row(ReportRow::new(h.label(), h.dim(), h.degree()));
            }
            save(&h, out, &mut report)?;
        }
        Command::NetSearch {
            gens,
            max_word_length,
            accuracy,
            d,
            mode,
            samples,
            out,
        } => {
            let set = GeneratorSet::named(gens)?;
            let net = build_net(set.dim(), &set, *max_word_length, *accuracy)?;
            report.row(
                ReportRow::new(format!("net {gens} (words <= {max_word_length})"), net.dim, net.len())
                    .with_note(format!("accuracy {accuracy}")),
            );
            let mode = match mode {
                SearchModeArg::Exhaustive => SearchMode::Exhaustive {
                    budget: DEFAULT_SEARCH_BUDGET,
                },
                SearchModeArg::Sample => SearchMode::RandomSample {
                    samples: *samples,
                    seed: seed(&mut report, explicit),
                },
            };
            let found = net_search(net.dim, *d, &net, mode)?;
            report.row(
                measured_row(found.ensemble.label(), &found.ensemble, &found.estimate)
                    .with_note(format!("{} tuples evaluated", found.evaluated)),
            );
            save(&found.ensemble, out, &mut report)?;
        }
        Command::Square {
            input,
            out,
            measure: want,
            spectral,
        } => {
            let g = load(input)?;
            let sq = g.square();
            if *want {
                measure_composition(
                    &mut report,
                    spectral,
                    CompositionRule::Square,
                    &[("G", &g)],
                    "G^2",
                    &sq,
                    explicit,
                )?;
            } else {
                report.row(ReportRow::new("G", g.dim(), g.degree()));
                report.row(ReportRow::new("G^2", sq.dim(), sq.degree()));
            }
            save(&sq, out, &mut report)?;
        }
        Command::Tensor {
            g1,
            g2,
            cap,
            out,
            measure: want,
            spectral,
        } => {
            let (a, b) = (load(g1)?, load(g2)?);
            let t = tensor_channels_with_cap(&a, &b, *cap)?;
            if *want {
                measure_composition(
                    &mut report,
                    spectral,
                    CompositionRule::Tensor,
                    &[("G1", &a), ("G2", &b)],
                    "G1 (x) G2",
                    &t,
                    explicit,
                )?;
            } else {
                report.row(ReportRow::new("G1 (x) G2", t.dim(), t.degree()));
            }
            save(&t, out, &mut report)?;
        }
        Command::Zigzag {
            g1,
            g2,
            cap,
            out,
            measure: want,
            spectral,
        } => {
            let (a, b) = (load(g1)?, load(g2)?);
            let z = zigzag_with_cap(&a, &b, *cap).with_context(|| {
                format!(
                    "cannot form the zig-zag product of {} and {}",
                    g1.display(),
                    g2.display()
                )
            })?;
            if *want {
                measure_composition(
                    &mut report,
                    spectral,
                    CompositionRule::Zigzag,
                    &[("G1", &a), ("G2", &b)],
                    "G1 (z) G2",
                    &z,
                    explicit,
                )?;
            } else {
                report.row(ReportRow::new("G1 (z) G2", z.dim(), z.degree()));
            }
            save(&z, out, &mut report)?;
        }
        Command::Lambda { input, spectral } => {
            let g = load(input)?;
            let est = measure(&g, spectral, &mut report, explicit)?;
            report.row(measured_row(g.label(), &g, &est));
        }
        Command::Construct {
            base,
            t,
            cap,
            out,
            spectral,
        } => construct(&mut report, base, *t, *cap, out, spectral, explicit)?,
        Command::Verify {
            input,
            samples,
            spectral,
        } => verify(&mut report, input, *samples, spectral, explicit)?,
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

fn construct(
    report: &mut RunReport,
    base: &Path,
    t: usize,
    cap: usize,
    out: &OutputArgs,
    spectral: &SpectralArgs,
    explicit: Option<u64>,
) -> Result<()> {
    let h = load(base)?;
    let est = measure(&h, spectral, report, explicit)?;
    report.row(measured_row("H", &h, &est));
    let base_cert = ExpanderCert::for_ensemble(&h, est.lambda.clamp(0.0, 1.0))?;
    let family = build_gt(&base_cert, Some(&h), t, cap)?;
    for s in 1..=t {
        let cert = family.cert(s);
        let name = format!("G_{s}");
        report.row(
            ReportRow::new(format!("{name} bound"), &cert.dim, &cert.degree)
                .with_lambda(cert.lambda_bound, ValueTag::Cert),
        );
        if let Some(g) = family.ensemble(s) {
            let est = measure(g, spectral, report, explicit)?;
            report.row(measured_row(&name, g, &est));
            check_cert(report, &name, cert.lambda_bound, est.lambda);
        }
    }
    if out.out.is_some() {
        match family.ensemble(t) {
            Some(g) => save(g, out, report)?,
            None => bail!(
                "G_{t} has dimension {} and was not materialized; raise --cap or drop --out",
                family.cert(t).dim
            ),
        }
    }
    Ok(())
}

fn verify(
    report: &mut RunReport,
    path: &Path,
    samples: usize,
    spectral: &SpectralArgs,
    explicit: Option<u64>,
) -> Result<()> {
    let file = read_file(path)?;
    report.row(ReportRow::new(file.label.clone(), file.dim, file.degree));
    let mut all_unitary = true;
    for (i, m) in file.payload.iter().enumerate() {
        let tol = UNITARY_TOL * m.rows() as f64;
        let defect = m.unitarity_defect();
        let ok = defect <= tol;
        all_unitary &= ok;
        report.check(
            format!("unitary {i}"),
            ok,
            format!("|U^dag U - I| = {defect:.3e} (tol {tol:.1e})"),
        );
    }
    if !all_unitary {
        report.check("channel checks", false, "skipped: ensemble has non-unitary entries");
        return Ok(());
    }
    let g = file.into_ensemble().with_context(|| path.display().to_string())?;
    let n = g.dim();

    let mixed = ComplexMatrix::maximally_mixed(n);
    let dev = (&g.apply(&mixed)? - &mixed).norm();
    report.check("fixed point G(I/N) = I/N", dev <= 1e-12, format!("deviation {dev:.3e}"));

    let seed = seed(report, explicit);
    let mut rng = seeded_rng(seed);
    let adj = g.adjoint();
    let (mut trace_dev, mut adj_dev, mut contraction) = (0.0f64, 0.0f64, 0.0f64);
    let mut psd_min = f64::INFINITY;
    for _ in 0..samples {
        let x = ginibre(n, n, &mut rng);
        let y = ginibre(n, n, &mut rng);
        let gx = g.apply(&x)?;
        trace_dev = trace_dev.max((gx.trace() - x.trace()).norm() / x.norm());
        let lhs = hs_inner(&gx, &y)?;
        let rhs = hs_inner(&x, &adj.apply(&y)?)?;
        adj_dev = adj_dev.max((lhs - rhs).norm() / (x.norm() * y.norm()));
        let tx = traceless_part(&x);
        contraction = contraction.max(traceless_part(&g.apply(&tx)?).norm() / tx.norm());
        // A random density matrix x x^dag / Tr must map to a PSD matrix.
        let mut rho = x.mul_adjoint(&x);
        rho.scale_mut(1.0 / rho.trace().re);
        let out = g.apply(&rho)?;
        let eig = out.hermitian_eigenvalues()?;
        psd_min = psd_min.min(eig.iter().copied().fold(f64::INFINITY, f64::min));
    }
    report.check(
        "trace preserving",
        trace_dev <= 1e-10,
        format!("max relative deviation {trace_dev:.3e}"),
    );
    report.check(
        "adjoint identity",
        adj_dev <= 1e-10,
        format!("max relative deviation {adj_dev:.3e}"),
    );
    report.check(
        "contraction on traceless operators",
        contraction <= 1.0 + 1e-10,
        format!("max ratio {contraction:.12}"),
    );
    report.check(
        "positivity",
        psd_min >= -1e-10,
        format!("min output eigenvalue {psd_min:.3e}"),
    );

    let est = measure(&g, spectral, report, explicit)?;
    report.row(measured_row("lambda", &g, &est));
    report.check(
        "expansion in [0, 1]",
        (0.0..=1.0 + 1e-10).contains(&est.lambda),
        format!("lambda = {:.12}", est.lambda),
    );
    Ok(())
}
