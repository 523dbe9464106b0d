//! Command-line front end. [`run`] is the whole program minus process exit,
//! so tests can drive it in-process.
//!
//! Exit codes: 0 ok, 2 parse or usage error, 3 inadmissible model,
//! 4 computation failure, 5 verification failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use specfac_core::verify::{compare_report, spectrum_scale, DEFAULT_SAMPLES, DEFAULT_SPECTRAL_TOL};
use specfac_core::{
    check_admissible, enumerate_factors, full_report, random_admissible, spectra_match, Error, FlipSpec, ReferenceFamily, ReportConfig,
    StateSpaceModel,
};

use crate::json::to_canonical_string;
use crate::model_io::{model_to_string, read_model};
use crate::report::{render_info, render_report, Format};
use crate::write_atomic;

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_INADMISSIBLE: u8 = 3;
pub const EXIT_COMPUTATION: u8 = 4;
pub const EXIT_VERIFICATION: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "specfac", version, about = "Minimal square spectral factors by zero- and pole-flipping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Admissibility, poles, zeros, numerator matrix and the block indices used by --zero-keep / --pole-keep.
    Info {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Build the factor that keeps the listed zero and pole blocks and flips the rest.
    Flip {
        model: PathBuf,
        #[command(flatten)]
        keep: KeepArgs,
        #[command(flatten)]
        check: CheckArgs,
        /// Where to write the flipped model.
        #[arg(long)]
        out: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write every factor of the model's spectral density plus summary.json.
    Enumerate {
        model: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a random admissible model, deterministic in the seed.
    Gen {
        /// State dimension.
        #[arg(long = "n", value_parser = clap::value_parser!(u32).range(1..=64))]
        n: u32,
        /// Output dimension.
        #[arg(long = "m", value_parser = clap::value_parser!(u32).range(1..=64))]
        m: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that CANDIDATE is a spectral factor of the same density as REFERENCE.
    Verify {
        reference: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct KeepArgs {
    /// Zero blocks to keep: comma-separated indices, `all` (default) or `none`.
    #[arg(long, default_value = "all")]
    pub zero_keep: Keep,
    /// Pole blocks to keep: comma-separated indices, `all` (default) or `none`.
    #[arg(long, default_value = "all")]
    pub pole_keep: Keep,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Relative spectral tolerance.
    #[arg(long, default_value_t = DEFAULT_SPECTRAL_TOL)]
    pub tol: f64,
    /// Unit-circle samples for spectral comparisons.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

impl CheckArgs {
    fn config(&self, check_diagram: bool) -> ReportConfig {
        ReportConfig { samples: self.samples, tol: self.tol, check_diagram }
    }
}

/// A block selection as written on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Keep {
    All,
    Indices(Vec<usize>),
}

impl FromStr for Keep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "all" => Ok(Keep::All),
            "" | "none" => Ok(Keep::Indices(Vec::new())),
            list => list
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| format!("invalid block index `{}`", t.trim())))
                .collect::<Result<_, _>>()
                .map(Keep::Indices),
        }
    }
}

impl Keep {
    fn resolve(&self, blocks: usize) -> Vec<usize> {
        match self {
            Keep::All => (0..blocks).collect(),
            Keep::Indices(v) => v.clone(),
        }
    }
}

/// Outcome of a command that did not succeed.
struct Failure {
    code: u8,
    message: String,
}

type Outcome = Result<u8, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn computation(e: Error) -> Failure {
    let code = match &e {
        Error::BlockIndexOutOfRange { .. } => EXIT_PARSE,
        e if e.is_admissibility() => EXIT_INADMISSIBLE,
        _ => EXIT_COMPUTATION,
    };
    fail(code, e.to_string())
}

fn load(path: &Path) -> Result<StateSpaceModel, Failure> {
    read_model(path).map_err(|e| fail(EXIT_PARSE, format!("cannot read model {}: {e}", path.display())))
}

fn admissible(path: &Path) -> Result<ReferenceFamily, Failure> {
    let model = load(path)?;
    check_admissible(&model).map_err(|e| fail(EXIT_INADMISSIBLE, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    write_atomic(path, text.as_bytes()).map_err(|e| fail(EXIT_COMPUTATION, format!("cannot write {}: {e}", path.display())))
}

/// Parse `args` (program name first) and execute. Clap's own help and
/// usage errors are printed here as well.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_PARSE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Outcome {
    let mut emit = |text: &str| {
        let _ = stdout.write_all(text.as_bytes());
    };
    match command {
        Command::Info { model, format } => {
            let fam = admissible(&model)?;
            emit(&render_info(&fam, format));
            Ok(EXIT_OK)
        }
        Command::Flip { model, keep, check, out, report } => {
            let fam = admissible(&model)?;
            let spec = FlipSpec::new(
                &keep.zero_keep.resolve(fam.zero_structure().block_count()),
                &keep.pole_keep.resolve(fam.pole_structure().block_count()),
            );
            spec.validate(&fam).map_err(computation)?;
            if fam.a_is_singular() && !spec.keeps_all_poles(&fam) {
                return Err(computation(Error::SingularA));
            }
            let (rep, flipped) = full_report(&fam, &spec, &check.config(true));
            let flipped = match flipped {
                Some(m) => m,
                None => return Err(fail(EXIT_COMPUTATION, format!("construction failed ({})", rep.failures.join(", ")))),
            };
            write_file(&out, &model_to_string(&flipped))?;
            if let Some(path) = report {
                write_file(&path, &render_report(&rep, check.format))?;
            }
            emit(&render_report(&rep, check.format));
            Ok(if rep.passed() { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Command::Enumerate { model, check, out } => enumerate(&model, &check, &out, &mut emit),
        Command::Gen { n, m, seed, out } => {
            let model = random_admissible(n as usize, m as usize, seed).map_err(computation)?;
            let text = model_to_string(&model);
            match out {
                Some(path) => write_file(&path, &text)?,
                None => emit(&text),
            }
            Ok(EXIT_OK)
        }
        Command::Verify { reference, candidate, check, out } => {
            let fam = admissible(&reference)?;
            let cand = admissible(&candidate)?;
            let rep = compare_report(fam.model(), cand.model(), &check.config(false));
            let text = render_report(&rep, check.format);
            if let Some(path) = out {
                write_file(&path, &text)?;
            }
            emit(&text);
            Ok(if rep.passed() { EXIT_OK } else { EXIT_VERIFICATION })
        }
    }
}

fn keep_label(prefix: &str, keep: &[usize]) -> String {
    if keep.is_empty() {
        format!("{prefix}none")
    } else {
        format!("{prefix}{}", keep.iter().map(usize::to_string).collect::<Vec<_>>().join("."))
    }
}

/// File name of one enumerated factor, e.g. `zkeep0.2_pkeepnone.json`.
pub fn factor_file_name(spec: &FlipSpec) -> String {
    format!("{}_{}.json", keep_label("zkeep", &spec.zero_keep), keep_label("pkeep", &spec.pole_keep))
}

fn enumerate(model: &Path, check: &CheckArgs, out: &Path, emit: &mut dyn FnMut(&str)) -> Outcome {
    let fam = admissible(model)?;
    fam.zero_structure().check_distinct().map_err(computation)?;
    fam.pole_structure().check_distinct().map_err(computation)?;
    let factors = enumerate_factors(&fam).map_err(computation)?;
    std::fs::create_dir_all(out).map_err(|e| fail(EXIT_COMPUTATION, format!("cannot create {}: {e}", out.display())))?;
    let reference = fam.model();
    let tol = check.tol * (1.0 + spectrum_scale(reference, check.samples));
    let mut rows = Vec::with_capacity(factors.len());
    let mut all_pass = true;
    for (spec, factor) in &factors {
        let file = factor_file_name(spec);
        write_file(&out.join(&file), &model_to_string(factor))?;
        let err = spectra_match(reference, factor, check.samples);
        all_pass &= err <= tol;
        let ev =
            |v: specfac_core::Result<Vec<specfac_core::Complex64>>| v.unwrap_or_default().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
        rows.push(json!({
            "file": file,
            "zero_keep": spec.zero_keep,
            "pole_keep": spec.pole_keep,
            "poles": ev(specfac_core::realization::poles(factor)),
            "zeros": ev(specfac_core::realization::zeros(factor)),
            "spectral_error": err,
        }));
    }
    let summary = json!({
        "count": factors.len(),
        "spectral_tolerance": tol,
        "verdict": if all_pass { "pass" } else { "fail" },
        "factors": Value::Array(rows),
    });
    let text = to_canonical_string(&summary);
    write_file(&out.join("summary.json"), &text)?;
    match check.format {
        Format::Json => emit(&text),
        Format::Text => {
            for (spec, _) in &factors {
                emit(&format!("{}\n", factor_file_name(spec)));
            }
            emit(&format!("{} factors, verdict {}\n", factors.len(), if all_pass { "pass" } else { "fail" }));
        }
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFICATION })
}
