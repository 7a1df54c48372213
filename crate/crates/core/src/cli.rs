//! Command-line driver. Exit codes: 0 success, 1 I/O or internal error,
//! 2 unreadable or inconsistent input, 3 empty derivation kernel, 4 exponent
//! regime or property (P) violated, 5 certification failure, 6 numeric
//! precondition failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::exec::Exec;
use crate::format::{
    certificate_hash, diagram_hash, DiagramFile, NumericJson, OperatorFile, PairReport, PointFile,
    PolysReport, VerifyReport,
};
use crate::graph::{bubble, build_ladder, triangle, Diagram};
use crate::pde::{derive_general, theorem1_system, theorem2_system, OperatorPair, Regime};
use crate::symanzik::{check_property_p, ladder_basis, InvariantBasis, Symanzik};
use crate::verify::{Certification, Certifier, NumericConfig, NumericContext};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_EMPTY_KERNEL: i32 = 3;
pub const EXIT_REGIME: i32 = 4;
pub const EXIT_CERTIFICATION: i32 = 5;
pub const EXIT_NUMERIC: i32 = 6;

#[derive(Parser, Debug)]
#[command(
    name = "feynpde",
    version,
    about = "Certified PDEs for parametric Feynman integrals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print U, the nonzero W polynomials and Q of a diagram.
    Polys {
        diagram: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Build certified operator pairs and write an operator file.
    Pde(PdeArgs),
    /// Check every pair of an operator file.
    Verify(VerifyArgs),
    /// Write a diagram file for a standard topology.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// One pair per line.
    Thm1,
    /// One pair per invariant/line with alpha_j dividing W_i.
    Thm2,
    /// Ansatz derivation of order `--order`.
    Derive,
}

#[derive(Args, Debug)]
pub struct PdeArgs {
    pub diagram: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    #[arg(long = "coeff-degree", default_value_t = 1)]
    pub coeff_degree: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub diagram: PathBuf,
    pub operators: PathBuf,
    /// Point file `{"s": [...], "z": [...]}` for the numeric cross-check.
    #[arg(long)]
    pub numeric: Option<PathBuf>,
    /// Largest accepted relative numeric residual.
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Gauss-Legendre nodes per simplex axis.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// Ignore stored witnesses and search for new ones.
    #[arg(long)]
    pub search: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "topology")]
pub struct Topology {
    /// h-loop ladder (h = 1 is the box).
    #[arg(long)]
    pub ladder: Option<usize>,
    #[arg(long)]
    pub bubble: bool,
    #[arg(long)]
    pub triangle: bool,
    #[arg(long = "box")]
    pub box_: bool,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub topology: Topology,
    #[arg(
        short = 'D',
        long = "dimension",
        default_value_t = 4,
        allow_negative_numbers = true
    )]
    pub dimension: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => EXIT_IO,
            Error::Parse(_)
            | Error::InvalidDiagram(_)
            | Error::Disconnected { .. }
            | Error::InvalidSubset(_)
            | Error::DegenerateBasis(_)
            | Error::MalformedOperator(_)
            | Error::UnknownVariable(_) => EXIT_PARSE,
            Error::Regime(_) | Error::PropertyP(_) => EXIT_REGIME,
            Error::Certification(_) => EXIT_CERTIFICATION,
            Error::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_IO,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }),
    }
}

fn load_diagram(path: &Path) -> CliResult<(Diagram, InvariantBasis)> {
    Ok(DiagramFile::parse(&read(path)?)?.load()?)
}

/// Runs the CLI on already-parsed arguments, writing results to `stdout`.
/// Returns the exit code; diagnostics go to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match cli.command {
        Command::Polys { diagram, format } => cmd_polys(&diagram, format, stdout),
        Command::Pde(args) => cmd_pde(&args, stdout, stderr),
        Command::Verify(args) => cmd_verify(&args, stdout),
        Command::Generate(args) => cmd_generate(&args, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Parses `args` (program name first) and runs.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, stdout, stderr),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                EXIT_PARSE
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            }
        }
    }
}

pub fn polys_report(d: &Diagram, basis: &InvariantBasis) -> CliResult<PolysReport> {
    let sy = Symanzik::new(d, basis)?;
    let (ok, offending) = check_property_p(d, basis)?;
    Ok(PolysReport {
        diagram: d.name().to_string(),
        u: sy.u.to_string(),
        w: sy
            .partitions
            .iter()
            .filter(|p| !p.w.is_zero())
            .map(|p| (d.format_vertex_set(p.chi), p.w.to_string()))
            .collect(),
        basis: basis
            .subsets()
            .iter()
            .enumerate()
            .map(|(i, chi)| format!("s{} = s{}", i + 1, d.format_vertex_set(*chi)))
            .collect(),
        q: sy.q.poly.to_string(),
        property_p: ok,
        property_p_offending: offending.iter().map(|c| d.format_vertex_set(*c)).collect(),
    })
}

fn cmd_polys(path: &Path, format: OutputFormat, stdout: &mut dyn Write) -> CliResult<i32> {
    let (d, basis) = load_diagram(path)?;
    let report = polys_report(&d, &basis)?;
    let text = match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
        }
        OutputFormat::Text => {
            let mut t = format!("diagram {}\nU = {}\n", report.diagram, report.u);
            for (chi, w) in &report.w {
                t += &format!("W{chi} = {w}\n");
            }
            for b in &report.basis {
                t += &format!("{b}\n");
            }
            t += &format!("Q = {}\n", report.q);
            if report.property_p {
                t += "property P: holds\n";
            } else {
                t += &format!(
                    "property P: fails for {}\n",
                    report.property_p_offending.join(", ")
                );
            }
            t
        }
    };
    emit(None, &text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_pde(args: &PdeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let (d, basis) = load_diagram(&args.diagram)?;
    let regime = Regime::of(&d)?;
    let sy = Symanzik::new(&d, &basis)?;
    let pairs: Vec<OperatorPair> = match args.mode {
        Mode::Thm1 => theorem1_system(&d, &basis)?,
        Mode::Thm2 => theorem2_system(&d, &basis)?,
        Mode::Derive => derive_general(&d, &basis, args.order, args.coeff_degree, Exec::default())?,
    };
    // every emitted pair is re-certified independently of its construction
    let certifier = Certifier::new(&d, &basis)?;
    for pair in &pairs {
        if let Certification::Failed(report) = certifier.certify(pair)? {
            return Err(Failure {
                code: EXIT_CERTIFICATION,
                message: format!(
                    "{}: independent certification failed at {:?}",
                    report.label, report.stage
                ),
            });
        }
    }
    let file = OperatorFile::new(&d, &basis, &sy, &regime, &pairs);
    emit(args.out.as_deref(), &file.to_json(), stdout)?;
    if pairs.is_empty() {
        let _ = writeln!(stderr, "derivation kernel is empty: no operator pairs");
        return Ok(EXIT_EMPTY_KERNEL);
    }
    Ok(EXIT_OK)
}

/// Verifies every pair of an operator file; returns the report.
pub fn verify_file(
    d: &Diagram,
    basis: &InvariantBasis,
    file: &OperatorFile,
    search: bool,
    numeric: Option<(&PointFile, f64, usize)>,
) -> CliResult<VerifyReport> {
    let hash = diagram_hash(d, basis);
    if file.diagram_hash != hash {
        return Err(Failure {
            code: EXIT_PARSE,
            message: "operator file was produced for a different diagram (hash mismatch)".into(),
        });
    }
    let certifier = Certifier::new(d, basis)?;
    let pairs = file.pairs(certifier.symanzik())?;
    let numeric_ctx = match numeric {
        None => None,
        Some((point, _, nodes)) => {
            let mut cfg = NumericConfig::new(point.point()?.massless_specialized(d));
            cfg.nodes = nodes;
            Some(NumericContext::new(
                certifier.symanzik(),
                certifier.regime(),
                &cfg,
            )?)
        }
    };
    let mut reports = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let mut report = PairReport {
            label: pair.label.clone(),
            status: "certified".into(),
            method: "search".into(),
            certificate_hash: None,
            problems: Vec::new(),
            numeric: None,
        };
        match (&pair.certificate, search) {
            (Some(cert), false) => {
                report.method = "stored".into();
                report.problems = certifier.check_certificate(pair, cert)?;
                report.certificate_hash = Some(certificate_hash(cert));
            }
            _ => match certifier.certify(pair)? {
                Certification::Certified(cert) => {
                    report.certificate_hash = Some(certificate_hash(&cert));
                }
                Certification::Failed(f) => {
                    report.problems.push(format!(
                        "no witness ({:?} at kinematic degree {}); residual {}",
                        f.stage, f.kinematic_degree, f.residual
                    ));
                }
            },
        }
        if !report.problems.is_empty() {
            report.status = "failed".into();
            report.certificate_hash = None;
        }
        if let (Some(ctx), Some((_, tol, _))) = (&numeric_ctx, numeric) {
            let r = ctx.residual(pair)?;
            report.numeric = Some(NumericJson {
                total: r.total,
                largest_term: r.largest_term,
                relative: r.relative,
                tolerance: tol,
                passed: r.relative <= tol,
            });
        }
        reports.push(report);
    }
    let integral = match &numeric_ctx {
        Some(ctx) => Some(ctx.value()?.value),
        None => None,
    };
    let ok = reports
        .iter()
        .all(|r| r.status == "certified" && r.numeric.as_ref().is_none_or(|n| n.passed));
    Ok(VerifyReport {
        diagram_hash: hash,
        pairs: reports,
        point: numeric.map(|(p, _, _)| p.clone()),
        integral,
        ok,
    })
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let (d, basis) = load_diagram(&args.diagram)?;
    let file = OperatorFile::parse(&read(&args.operators)?)?;
    let point = match &args.numeric {
        Some(p) => Some(PointFile::parse(&read(p)?)?),
        None => None,
    };
    let report = verify_file(
        &d,
        &basis,
        &file,
        args.search,
        point.as_ref().map(|p| (p, args.tolerance, args.nodes)),
    )?;
    let text = match args.format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
        }
        OutputFormat::Text => {
            let mut t = String::new();
            for p in &report.pairs {
                let status = if p.status == "certified" {
                    "certified"
                } else {
                    "NOT CERTIFIED"
                };
                t += &format!("{}: {status} ({})", p.label, p.method);
                if let Some(n) = &p.numeric {
                    let verdict = if n.passed { "ok" } else { "FAILED" };
                    t += &format!(
                        "; numeric residual {:.3e} {verdict} (tolerance {:.0e})",
                        n.relative, n.tolerance
                    );
                }
                t += "\n";
                for problem in &p.problems {
                    t += &format!("  {problem}\n");
                }
            }
            if let Some(v) = report.integral {
                t += &format!("F = {v:.15e}\n");
            }
            t
        }
    };
    emit(None, &text, stdout)?;
    if report.pairs.iter().any(|p| p.status != "certified") {
        return Ok(EXIT_CERTIFICATION);
    }
    if !report.ok {
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let t = &args.topology;
    let (d, basis) = if let Some(h) = t.ladder {
        let d = build_ladder(h, args.dimension)?;
        let b = ladder_basis(&d)?;
        (d, Some(b))
    } else if t.box_ {
        let d = build_ladder(1, args.dimension)?;
        let b = ladder_basis(&d)?;
        (d, Some(b))
    } else if t.bubble {
        (bubble(args.dimension)?, None)
    } else {
        (triangle(args.dimension)?, None)
    };
    let file = DiagramFile::from_diagram(&d, basis.as_ref());
    emit(args.out.as_deref(), &file.to_json(), stdout)?;
    Ok(EXIT_OK)
}
