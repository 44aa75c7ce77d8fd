//! `potent-split`: decompose matrix files, re-verify certificates and run the
//! exhaustive sweeps from the command line.
//!
//! Exit codes: 0 success, 1 verification or claim failure, 2 input error,
//! 3 trace outside the prime subfield, 4 derogatory input.

use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use potent_core::canonical::companion_form;
use potent_core::decomp::{check_trace_condition, decompose, Certificate, DecompError, Decomposition};
use potent_core::field::{Field, FieldSpec};
use potent_core::matf::{text, Matrix};
use potent_core::oracle::{exhaustive_sweep_par, sharpness_scan, SweepReport};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_TRACE: i32 = 3;
pub const EXIT_DEROGATORY: i32 = 4;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "POTENT_SPLIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "potent-split", version, about = "Split matrices over GF(p^m) as E + V with E^p = E, V^3 = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose the matrix in FILE and print E, V, the route and the checks.
    Decompose {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
        /// Fail unless V^j = 0 for this j.
        #[arg(long, default_value_t = 3)]
        max_index: usize,
    },
    /// Re-verify a JSON certificate.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_index: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Print the companion form of the matrix in FILE.
    Companion {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Report whether trace(A) lies in the prime subfield.
    CheckTrace {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Decompose every companion matrix of the given sizes.
    Sweep {
        #[command(flatten)]
        field: FieldArgs,
        /// Size or inclusive range, e.g. `3` or `1..7`.
        #[arg(long, default_value = "1..3")]
        n: String,
        #[command(flatten)]
        out: Output,
    },
    /// 3x3 companions over F_3 with trace 1 and no eigenvalue in {0, 1, -1}.
    Sharpness {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long)]
    pub json: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// All m+1 coefficients, low to high, e.g. `1,0,1`.
    #[arg(long)]
    pub modulus: Option<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Parse { path: String, source: text::ParseError },
    #[error("{0}")]
    Decomp(#[from] DecompError),
    #[error("{0}")]
    Failed(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Parse { .. } | CliError::Io(_) => EXIT_INPUT,
            CliError::Decomp(DecompError::TraceNotPrimeSubfield) => EXIT_TRACE,
            CliError::Decomp(DecompError::NotNonderogatory) => EXIT_DEROGATORY,
            CliError::Decomp(DecompError::Matrix(_)) => EXIT_INPUT,
            CliError::Decomp(_) | CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl FieldArgs {
    pub fn build(&self) -> Result<Field, CliError> {
        let modulus = match &self.modulus {
            None if self.m > 1 => {
                return FieldSpec::default_extension(self.p, self.m).ok_or_else(|| {
                    CliError::Input(format!("no default modulus for p={} m={}; pass --modulus", self.p, self.m))
                })
            }
            None => None,
            Some(s) => {
                let t = s.trim().trim_start_matches('[').trim_end_matches(']');
                let coeffs: Result<Vec<u32>, _> = t.split(',').map(|c| c.trim().parse::<u32>()).collect();
                Some(coeffs.map_err(|_| CliError::Input(format!("bad --modulus `{s}`")))?)
            }
        };
        FieldSpec::new(self.p, self.m, modulus).map_err(|e| CliError::Input(e.to_string()))
    }
}

pub fn parse_matrix_file(path: &Path) -> Result<Matrix, CliError> {
    let body = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    text::parse(&body).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

/// `3` or `1..7` (inclusive).
pub fn parse_sizes(s: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::Input(format!("bad --n `{s}`; expected N or LO..HI"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<usize>().map_err(|_| bad())?,
            b.trim().trim_start_matches('=').parse::<usize>().map_err(|_| bad())?,
        ),
        None => {
            let n = s.trim().parse::<usize>().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn thread_cap() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Input(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn emit(out: &Output, stdout: &mut dyn Write, body: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => fs::write(path, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn render_decomposition(d: &Decomposition) -> String {
    let f = d.a.field();
    let rows = |m: &Matrix| {
        (0..m.rows())
            .map(|i| {
                let r: Vec<String> = m.row(i).iter().map(|x| f.format_element(x)).collect();
                format!("  {}\n", r.join(" "))
            })
            .collect::<String>()
    };
    let mut s = format!("{}\nroute: {}", f.header(), d.route);
    if !d.detail.is_empty() {
        s.push_str(&format!(" ({})", d.detail));
    }
    s.push_str(&format!("\nE:\n{}V:\n{}", rows(&d.e), rows(&d.v)));
    s.push_str(&format!(
        "checks: sum_ok={} p_potent_ok={} nil_index={}\n",
        d.checks.sum_ok, d.checks.p_potent_ok, d.checks.nil_index
    ));
    s
}

fn cmd_decompose(file: &Path, out: &Output, max_index: usize, stdout: &mut dyn Write) -> Result<(), CliError> {
    let a = parse_matrix_file(file)?;
    if !a.is_square() {
        return Err(CliError::Input("matrix must be square".into()));
    }
    let d = decompose(&a)?;
    let body = if out.json {
        to_json(&Certificate::from_decomposition(&d))
    } else {
        render_decomposition(&d)
    };
    emit(out, stdout, &body)?;
    if !d.checks.passes(max_index) {
        return Err(CliError::Failed(format!("nil_index {} exceeds --max-index {max_index}", d.checks.nil_index)));
    }
    Ok(())
}

fn cmd_verify(file: &Path, max_index: usize, out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    let body = fs::read_to_string(file).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    let cert: Certificate =
        serde_json::from_str(&body).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    let r = cert.reverify(max_index).map_err(CliError::Input)?;
    let report = if out.json {
        to_json(&serde_json::json!({
            "ok": r.ok(),
            "recomputed": r.recomputed,
            "matches_recorded": r.matches_recorded,
            "nil_bound_ok": r.nil_bound_ok,
        }))
    } else {
        format!(
            "{}: sum_ok={} p_potent_ok={} nil_index={} matches_recorded={}\n",
            if r.ok() { "verified" } else { "REJECTED" },
            r.recomputed.sum_ok,
            r.recomputed.p_potent_ok,
            r.recomputed.nil_index,
            r.matches_recorded
        )
    };
    emit(out, stdout, &report)?;
    if r.ok() {
        Ok(())
    } else {
        Err(CliError::Failed("certificate does not verify".into()))
    }
}

fn cmd_companion(file: &Path, out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    let a = parse_matrix_file(file)?;
    let (c, w) = companion_form(&a).map_err(DecompError::from)?;
    let body = if out.json {
        let coeffs: Vec<String> = c.coeffs().iter().map(|x| c.field().format_element(x)).collect();
        to_json(&serde_json::json!({
            "field": potent_core::decomp::FieldHeader::of(c.field()),
            "n": c.n(),
            "coeffs": coeffs,
            "P": potent_core::decomp::matrix_to_json(&w.p),
        }))
    } else {
        format!("{}\n{}\n", c.field().header(), c.coeffs_text())
    };
    emit(out, stdout, &body)
}

fn cmd_check_trace(file: &Path, out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    let a = parse_matrix_file(file)?;
    if !a.is_square() {
        return Err(CliError::Input("matrix must be square".into()));
    }
    let t = check_trace_condition(&a);
    let trace = a.field().format_element(&a.trace());
    let body = if out.json {
        to_json(&serde_json::json!({ "trace": trace, "t": t }))
    } else {
        match t {
            Some(t) => format!("trace {trace} = {t}·1\n"),
            None => format!("trace {trace} is not in the prime subfield\n"),
        }
    };
    emit(out, stdout, &body)?;
    match t {
        Some(_) => Ok(()),
        None => Err(DecompError::TraceNotPrimeSubfield.into()),
    }
}

fn render_sweep(r: &SweepReport) -> String {
    let mut s = format!(
        "n={} total={} succeeded={} rejected_trace={} failures={}\n",
        r.n,
        r.total,
        r.succeeded,
        r.rejected_trace,
        r.failures.len()
    );
    for (route, count) in &r.route_histogram {
        s.push_str(&format!("  {route:<16} {count}\n"));
    }
    for f in &r.failures {
        s.push_str(&format!("  FAILED companion({}): {} {}\n", f.companion.join(","), f.route, f.detail));
    }
    for o in &r.off_tree {
        s.push_str(&format!("  off-tree companion({}): {} {}\n", o.companion.join(","), o.route, o.detail));
    }
    s
}

/// Runs the sweep for every size in `sizes`.
pub fn sweep_reports(field: &Field, sizes: RangeInclusive<usize>) -> Result<Vec<SweepReport>, CliError> {
    let threads = thread_cap()?;
    sizes
        .map(|n| exhaustive_sweep_par(n, field, threads).map_err(|e| CliError::Input(e.to_string())))
        .collect()
}

fn cmd_sweep(field: &FieldArgs, n: &str, out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    let f = field.build()?;
    let sizes = parse_sizes(n)?;
    let reports = sweep_reports(&f, sizes)?;
    let body = if out.json {
        to_json(&reports)
    } else {
        let mut s = format!("{}\n", f.header());
        for r in &reports {
            s.push_str(&render_sweep(r));
        }
        s
    };
    emit(out, stdout, &body)?;
    let failed: usize = reports.iter().map(|r| r.failures.len()).sum();
    if failed > 0 || reports.iter().any(|r| !r.is_consistent()) {
        return Err(CliError::Failed(format!("{failed} companions failed")));
    }
    Ok(())
}

fn cmd_sharpness(field: &FieldArgs, out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    let f = field.build()?;
    if f.p() != 3 || f.m() != 1 {
        return Err(CliError::Input("sharpness runs over F_3 only".into()));
    }
    let report = sharpness_scan(&f)?;
    let body = if out.json {
        to_json(&report)
    } else {
        let mut s = format!(
            "{}\nqualifying companions: {} (searched {} p-potent 3x3 matrices each)\n",
            f.header(),
            report.qualifying.len(),
            report.p_potents_searched
        );
        for q in &report.qualifying {
            s.push_str(&format!(
                "  companion({}): index 2 impossible={} index 3 nil_index={}\n",
                q.companion.join(","),
                q.index2_impossible,
                q.index3_certificate.checks.nil_index
            ));
        }
        s
    };
    emit(out, stdout, &body)?;
    if report.confirms_claim() {
        Ok(())
    } else {
        Err(CliError::Failed("sharpness claim not confirmed".into()))
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Decompose { file, out, max_index } => cmd_decompose(file, out, *max_index, stdout),
        Command::Verify { file, max_index, out } => cmd_verify(file, *max_index, out, stdout),
        Command::Companion { file, out } => cmd_companion(file, out, stdout),
        Command::CheckTrace { file, out } => cmd_check_trace(file, out, stdout),
        Command::Sweep { field, n, out } => cmd_sweep(field, n, out, stdout),
        Command::Sharpness { field, out } => cmd_sharpness(field, out, stdout),
    }
}

/// Parses `argv` (including the program name) and runs it, returning the
/// exit code. Diagnostics go to `stderr`.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
