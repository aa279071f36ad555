//! Front end for the `weaksym` binary. Commands write to injected streams and
//! return process exit codes: 0 success, 1 verification failure, 2 usage
//! error.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use weaksym_core::catalog::catalog_entry;
use weaksym_core::hermitian::HermitianStructure;
use weaksym_core::{
    build_pair, invariant_suite, isotropy_decomposition, list_pairs, verify_pair, Error, Params, SphericalPair,
    VerificationReport, VerifyConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "weaksym", version, about = "Certify weak symmetry of compact spherical pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog pairs.
    List,
    /// Print dimensions, involution and structure data for a pair.
    Describe {
        id: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Sample tangent vectors and search for reversing elements.
    Verify {
        id: String,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the invariant suite only.
    Check {
        id: String,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
}

impl ParamArgs {
    pub fn to_params(&self) -> Params {
        let mut p = Params::new();
        if let Some(n) = self.n {
            p.insert("n".into(), n);
        }
        if let Some(m) = self.m {
            p.insert("m".into(), m);
        }
        p
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long = "max-iters", default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl RunArgs {
    pub fn to_config(&self) -> VerifyConfig {
        VerifyConfig {
            samples: self.samples,
            tol: self.tol,
            restarts: self.restarts,
            max_iterations: self.max_iters,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match cli.command {
        Command::List => cmd_list(out),
        Command::Describe { id, params } => cmd_describe(&id, &params.to_params(), out, err),
        Command::Verify { id, params, run, report, format } => {
            cmd_verify(&id, &params.to_params(), &run.to_config(), report.as_deref(), format, out, err)
        }
        Command::Check { id, params } => cmd_check(&id, &params.to_params(), out, err),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownPair(_) | Error::Constraint { .. } | Error::Excluded(_) | Error::InvalidInput(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Resolves `id` before any computation, then builds the pair.
fn load(id: &str, params: &Params, err: &mut dyn Write) -> Result<SphericalPair, i32> {
    let built = catalog_entry(id).and_then(|_| build_pair(id, params));
    built.map_err(|e| {
        let _ = writeln!(err, "error: {e}");
        exit_code(&e)
    })
}

pub fn cmd_list(out: &mut dyn Write) -> i32 {
    let _ = writeln!(out, "{:<28} {:<8} {:<10} {:<14} {:<12} {:<12} STATUS", "ID", "FAMILY", "G", "H", "CONSTRAINT", "DEFAULTS");
    for e in list_pairs() {
        let defaults: Vec<String> = e.defaults.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let defaults = if defaults.is_empty() { "-".to_string() } else { defaults.join(",") };
        let _ = writeln!(
            out,
            "{:<28} {:<8} {:<10} {:<14} {:<12} {:<12} {}",
            e.id, e.family, e.g, e.h, e.constraint, defaults, e.status
        );
    }
    EXIT_OK
}

pub fn cmd_describe(id: &str, params: &Params, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let pair = match load(id, params, err) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let _ = writeln!(out, "pair: {}", pair.id);
    let _ = writeln!(out, "family: {}", pair.family);
    let _ = writeln!(out, "params: {}", format_params(&pair.params));
    let _ = writeln!(out, "ambient size: {}", pair.ambient_size());
    let _ = writeln!(out, "dim g: {}", pair.g.dim());
    let _ = writeln!(out, "dim h: {}", pair.h.dim());
    let _ = writeln!(out, "dim q: {}", pair.q.dim());
    let _ = writeln!(out, "involution: {}", pair.involution.kind());
    let _ = writeln!(out, "symmetric: {}", pair.is_symmetric());
    match isotropy_decomposition(&pair) {
        Ok(dims) => {
            let _ = writeln!(out, "isotropy blocks: {dims:?}");
        }
        Err(e) => {
            let _ = writeln!(out, "isotropy blocks: unavailable ({e})");
        }
    }
    if pair.hermitian.is_some() {
        match HermitianStructure::new(&pair) {
            Ok(s) => {
                let _ = writeln!(out, "dim k: {}", s.k.dim());
                let _ = writeln!(out, "dim p: {}", s.p.dim());
                let _ = writeln!(out, "dim a: {}", s.a.dim());
                let _ = writeln!(out, "|Z'|: {:.6e}", s.zprime.frobenius_norm());
                let _ = writeln!(out, "tube type: {}", if s.is_nontube() { "nontube" } else { "tube" });
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    EXIT_OK
}

fn format_params(params: &Params) -> String {
    if params.is_empty() {
        return "-".into();
    }
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

/// Prints every invariant of `pair`; 0 iff all pass.
pub fn check_pair(pair: &SphericalPair, out: &mut dyn Write) -> i32 {
    let checks = invariant_suite(pair);
    for c in &checks {
        let shown = match &c.detail {
            Some(d) => format!("{d} (value {:.3e})", c.value),
            None => format!("{:.3e}", c.value),
        };
        let _ = writeln!(out, "{}: {} [{}]", c.name, shown, if c.pass { "PASS" } else { "FAIL" });
    }
    if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn cmd_check(id: &str, params: &Params, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match load(id, params, err) {
        Ok(pair) => check_pair(&pair, out),
        Err(code) => code,
    }
}

pub fn render_json(report: &VerificationReport) -> io::Result<String> {
    let mut text = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    text.push('\n');
    Ok(text)
}

pub fn render_csv(report: &VerificationReport) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pair", "index", "method", "residual", "success"]).map_err(io::Error::other)?;
    for s in &report.samples {
        w.write_record([
            report.pair.clone(),
            s.index.to_string(),
            s.method.clone(),
            format!("{:e}", s.residual),
            s.success.to_string(),
        ])
        .map_err(io::Error::other)?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}

/// Writes `text` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, text: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn cmd_verify(
    id: &str,
    params: &Params,
    config: &VerifyConfig,
    report_path: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    if let Err(e) = config.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    let pair = match load(id, params, err) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let report = match verify_pair(&pair, config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let text = match format {
        Format::Json => render_json(&report),
        Format::Csv => render_csv(&report),
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot serialize report: {e}");
            return EXIT_FAILURE;
        }
    };
    match report_path {
        Some(path) => {
            if let Err(e) = write_atomic(path, &text) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
            let _ = writeln!(
                out,
                "{}: {}/{} successes, max residual {:.3e}, {} fallbacks, invariants {}",
                report.pair,
                report.aggregate.successes,
                report.aggregate.total,
                report.aggregate.max_residual,
                report.aggregate.fallbacks,
                if report.invariants_pass() { "pass" } else { "FAIL" }
            );
        }
        None => {
            let _ = write!(out, "{text}");
        }
    }
    if report.all_succeeded() && report.invariants_pass() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}
