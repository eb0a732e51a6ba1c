//! Command-line driver: argument parsing, input loading, artifact output and
//! exit codes. All numbers come from the `quasilab` library.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use quasilab::algebra::{parse_qvalues, Algebra, AlgebraError, AlgebraSpec, QValue};
use quasilab::dynamics::DynamicsError;
use quasilab::lattice::LatticeError;
use quasilab::modelset::{ModelSetError, PointSet};
use quasilab::regions::{RegionError, RegionSet};
use quasilab::riesz::RieszError;

mod args;
mod commands;
pub mod config;
pub mod plot;

pub use config::{ExperimentConfig, Ranges};
pub use plot::{emit_plotdata, PlotData, PlotKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NOINPUT: i32 = 66;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Exhausted(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_NOINPUT,
            CliError::Precondition(_) | CliError::Output(_) => EXIT_PRECONDITION,
            CliError::Exhausted(_) => EXIT_EXHAUSTED,
        }
    }
}

impl From<RegionError> for CliError {
    fn from(e: RegionError) -> Self {
        match e {
            RegionError::SearchExhausted(_) => CliError::Exhausted(e.to_string()),
            e => CliError::Precondition(e.to_string()),
        }
    }
}

macro_rules! precondition_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Precondition(e.to_string())
            }
        })*
    };
}

precondition_from!(AlgebraError, LatticeError, ModelSetError, DynamicsError, RieszError);

pub type CliResult<T> = Result<T, CliError>;

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("quasilab: {e}");
            e.code()
        }
    }
}

pub(crate) fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

/// The algebra from a declaration file, or `Q(√2)` with `w1 = √2`.
pub fn load_algebra(path: Option<&Path>) -> CliResult<Algebra> {
    match path {
        Some(p) => Ok(AlgebraSpec::parse(&read_file(p)?)?),
        None => Ok(AlgebraSpec::quadratic(2)?),
    }
}

pub fn parse_values(alg: &Algebra, text: &str) -> CliResult<Vec<QValue>> {
    Ok(parse_qvalues(alg, text)?)
}

pub fn parse_value(alg: &Algebra, text: &str) -> CliResult<QValue> {
    Ok(QValue::parse(alg, text)?)
}

/// Semi-closed interval literals `[a,b)` or `(a,b]`, joined by `|` or `∪`.
pub fn parse_window(alg: &Algebra, text: &str) -> CliResult<RegionSet> {
    let mut parts = Vec::new();
    for raw in text.split(['|', '∪']) {
        let lit = raw.trim();
        let bad = || CliError::Precondition(format!("window `{lit}` is not of the form [a,b) or (a,b]"));
        if lit.chars().count() < 2 {
            return Err(bad());
        }
        let (open, close) = (lit.chars().next().ok_or_else(bad)?, lit.chars().last().ok_or_else(bad)?);
        let inner = &lit[open.len_utf8()..lit.len() - close.len_utf8()];
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let (a, b) = (parse_value(alg, a.trim())?, parse_value(alg, b.trim())?);
        let piece = match (open, close) {
            ('[', ')') => RegionSet::interval(&a, &b)?,
            ('(', ']') => RegionSet::interval_left_open(&a, &b)?,
            _ => return Err(bad()),
        };
        parts.push(piece);
    }
    Ok(RegionSet::union(&parts)?)
}

/// A region given either as a window literal or as a region file.
pub fn load_region(alg: &Algebra, arg: &str) -> CliResult<RegionSet> {
    let t = arg.trim_start();
    if t.starts_with('[') || t.starts_with('(') {
        return parse_window(alg, arg);
    }
    let text = read_file(Path::new(arg))?;
    RegionSet::parse(&text, alg).map_err(|e| CliError::Input(format!("{arg}: {e}")))
}

pub fn load_points(path: &Path) -> CliResult<PointSet> {
    let text = read_file(path)?;
    PointSet::from_csv(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub(crate) fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| CliError::Precondition(format!("bad {what} `{}`", s.trim()))))
        .collect()
}

pub(crate) fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
