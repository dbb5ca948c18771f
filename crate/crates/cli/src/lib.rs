//! Command-line front end for `toric-lambda`.
//!
//! Every command returns an [`Output`] (exit code plus captured streams) so
//! the binary stays a thin wrapper and the commands can be driven in tests.

pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use toric_lambda::constructions::{
    blowup_linear_subspace, blowup_points_of_projective_space, hirzebruch, product_of_projective_spaces,
    projective_space, ConstructionError,
};
use toric_lambda::io::{parse_fan, print_fan};
use toric_lambda::mmp::{classify_variety, length_report, MoriCone};
use toric_lambda::positivity::{analyze_relations, wall_relations};
use toric_lambda::{Fan, MmpError, Mode, PositivityError, SmoothFan};

use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUSED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "TORIC_LAMBDA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "toric-lambda", version, about = "Positivity of exterior powers of tangent bundles on smooth toric varieties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "lambda2-nef")]
    Lambda2Nef,
    #[value(name = "lambda3-ample")]
    Lambda3Ample,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Lambda2Nef => Mode::Lambda2Nef,
            ModeArg::Lambda3Ample => Mode::Lambda3Ample,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `pn N`
    Pn,
    /// `product N1 N2 ...`
    Product,
    /// `blowup-point N [POINTS]`
    BlowupPoint,
    /// `blowup-linear N K`
    BlowupLinear,
    /// `hirzebruch A`
    Hirzebruch,
}

/// Exterior power selection: a single `m` or every `m` from 1 to the rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Power {
    All,
    Single(usize),
}

fn parse_power(s: &str) -> Result<Power, String> {
    if s == "all" {
        return Ok(Power::All);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer or `all`, got `{s}`")),
        Ok(m) => Ok(Power::Single(m)),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the validation flags of a fan file.
    Validate {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Decide nefness and ampleness of the exterior powers of the tangent bundle.
    Analyze {
        path: PathBuf,
        #[arg(long, value_parser = parse_power, default_value = "all")]
        m: Power,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// List wall curve classes, extremal rays and their contractions.
    Contractions {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Run the classification by point blowdowns.
    Classify {
        path: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Write the fan of a standard variety.
    Construct {
        #[arg(value_enum)]
        family: Family,
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Output {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Output::fail(EXIT_USAGE, text)
            } else {
                Output::ok(text)
            }
        }
    }
}

pub fn run(cli: Cli) -> Output {
    match cli.command {
        Command::Validate { path, format } => validate(&path, format),
        Command::Analyze { path, m, format } => analyze(&path, m, format),
        Command::Contractions { path, format } => contractions(&path, format),
        Command::Classify { path, mode, format } => classify(&path, mode.into(), format),
        Command::Construct { family, params, out } => construct(family, &params, out.as_deref()),
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Table => report::render_table(report),
        Format::Structured => report.to_json(),
    }
}

fn read_fan(path: &Path) -> Result<(Vec<u8>, Fan), Output> {
    let bytes = fs::read(path)
        .map_err(|e| Output::fail(EXIT_REFUSED, format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Output::fail(EXIT_REFUSED, format!("{}: not valid UTF-8", path.display())))?;
    let fan = parse_fan(&text).map_err(|e| Output::fail(EXIT_REFUSED, format!("{}: {e}", path.display())))?;
    Ok((bytes, fan))
}

fn read_smooth(path: &Path) -> Result<(Vec<u8>, SmoothFan), Output> {
    let (bytes, fan) = read_fan(path)?;
    let report = fan.validate();
    match report.first_failure() {
        None => Ok((bytes, SmoothFan::new(fan).map_err(|e| Output::fail(EXIT_INTERNAL, e.to_string()))?)),
        Some(f) => Err(Output::fail(
            EXIT_REFUSED,
            format!("{}: invalid fan: {}", path.display(), report::check_line(f)),
        )),
    }
}

fn positivity_failure(e: PositivityError) -> Output {
    match e {
        PositivityError::PowerOutOfRange { .. } => Output::fail(EXIT_USAGE, e.to_string()),
        _ => Output::fail(EXIT_INTERNAL, format!("internal invariant violated: {e}")),
    }
}

fn mmp_failure(e: MmpError) -> Output {
    match e {
        MmpError::DimensionTooSmall { .. } | MmpError::HypothesisFailed { .. } => {
            Output::fail(EXIT_REFUSED, e.to_string())
        }
        MmpError::Positivity(p) => positivity_failure(p),
        _ => Output::fail(EXIT_INTERNAL, e.to_string()),
    }
}

pub fn validate(path: &Path, format: Format) -> Output {
    let (bytes, fan) = match read_fan(path) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let v = fan.validate();
    let mut r = Report::new("validate", &bytes);
    r.validation = Some(report::validation_rows(&v));
    let mut out = Output::ok(render(&r, format));
    if let Some(f) = v.first_failure() {
        out.code = EXIT_REFUSED;
        out.stderr = format!("first failing check: {}\n", report::check_line(f));
    }
    out
}

pub fn analyze(path: &Path, power: Power, format: Format) -> Output {
    let (bytes, fan) = match read_smooth(path) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let n = fan.rank();
    if let Power::Single(m) = power {
        if m > n {
            return Output::fail(EXIT_USAGE, format!("--m {m} is out of range for a fan of rank {n} (1..={n})"));
        }
    }
    let relations = match wall_relations(&fan) {
        Ok(r) => r,
        Err(e) => return positivity_failure(e),
    };
    let verdicts = match analyze_relations(&relations, n) {
        Ok(v) => v,
        Err(e) => return positivity_failure(e),
    };
    let verdicts: Vec<_> = match power {
        Power::All => verdicts,
        Power::Single(m) => verdicts.into_iter().filter(|v| v.m == m).collect(),
    };
    let mut r = Report::new("analyze", &bytes);
    r.fan = Some(report::fan_summary(&fan));
    r.walls = Some(report::wall_rows(&relations, None));
    r.verdicts = Some(report::verdict_rows(&fan, &verdicts));
    Output::ok(render(&r, format))
}

pub fn contractions(path: &Path, format: Format) -> Output {
    let (bytes, fan) = match read_smooth(path) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let cone = match MoriCone::new(&fan) {
        Ok(c) => c,
        Err(e) => return mmp_failure(e),
    };
    let contractions = cone.contractions();
    let lengths = length_report(&cone);
    let mut r = Report::new("contractions", &bytes);
    r.fan = Some(report::fan_summary(&fan));
    r.walls = Some(report::wall_rows(cone.relations(), Some(&cone)));
    r.contractions = Some(report::contraction_rows(&cone, &contractions));
    r.length_check = Some(report::length_rows(&lengths));
    let mut out = Output::ok(render(&r, format));
    if !lengths.is_clean() {
        out.code = EXIT_INTERNAL;
        out.stderr = "length bound violated; see the length check section\n".to_string();
    }
    out
}

pub fn classify(path: &Path, mode: Mode, format: Format) -> Output {
    let (bytes, fan) = match read_smooth(path) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let c = match classify_variety(&fan, mode) {
        Ok(c) => c,
        Err(e) => return mmp_failure(e),
    };
    let mut r = Report::new("classify", &bytes);
    r.fan = Some(report::fan_summary(&fan));
    r.classification = Some(report::classification_row(&mode.to_string(), &c));
    Output::ok(render(&r, format))
}

fn usage(msg: impl Into<String>) -> Output {
    Output::fail(EXIT_USAGE, msg)
}

fn numbers(params: &[String]) -> Result<Vec<usize>, Output> {
    params
        .iter()
        .map(|p| p.parse::<usize>().map_err(|_| usage(format!("parameter `{p}` is not a nonnegative integer"))))
        .collect()
}

pub fn build(family: Family, params: &[String]) -> Result<SmoothFan, Output> {
    let p = numbers(params)?;
    let arity = |lo: usize, hi: usize, shape: &str| {
        if p.len() < lo || p.len() > hi {
            Err(usage(format!("expected parameters `{shape}`, got {} value(s)", p.len())))
        } else {
            Ok(())
        }
    };
    let built: Result<SmoothFan, ConstructionError> = match family {
        Family::Pn => {
            arity(1, 1, "N")?;
            projective_space(p[0])
        }
        Family::Product => {
            arity(1, usize::MAX, "N1 N2 ...")?;
            product_of_projective_spaces(&p)
        }
        Family::BlowupPoint => {
            arity(1, 2, "N [POINTS]")?;
            if p[0] < 2 {
                return Err(usage("blowup-point needs N >= 2"));
            }
            blowup_points_of_projective_space(p[0], p.get(1).copied().unwrap_or(1))
        }
        Family::BlowupLinear => {
            arity(2, 2, "N K")?;
            blowup_linear_subspace(p[0], p[1])
        }
        Family::Hirzebruch => {
            arity(1, 1, "A")?;
            Ok(hirzebruch(p[0] as u64))
        }
    };
    built.map_err(|e| usage(e.to_string()))
}

pub fn construct(family: Family, params: &[String], out: Option<&Path>) -> Output {
    let fan = match build(family, params) {
        Ok(f) => f,
        Err(o) => return o,
    };
    let text = print_fan(fan.fan());
    match out {
        None => Output::ok(text),
        Some(path) => match fs::write(path, &text) {
            Ok(()) => Output::ok(String::new()),
            Err(e) => Output::fail(EXIT_REFUSED, format!("cannot write {}: {e}", path.display())),
        },
    }
}

/// Sizes the global worker pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}
