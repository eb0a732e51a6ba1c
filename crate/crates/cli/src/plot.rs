//! Two-column plot data with a small JSON descriptor per file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{write_file, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// `Dn.dat`: `n D_n`.
    Discrepancy,
    /// `lmin.dat`: `R λ_min`.
    Bounds,
}

/// Series a report can offer for plotting.
#[derive(Clone, Debug, Default)]
pub struct PlotData {
    pub discrepancy: Vec<(i64, f64)>,
    pub lambda_min: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct Descriptor<'a> {
    data: &'a str,
    columns: [&'a str; 2],
    rows: usize,
    title: &'a str,
}

/// Writes the requested series and its descriptor into `dir`; a missing or
/// empty series is an error and nothing is written.
pub fn emit_plotdata(data: &PlotData, kind: PlotKind, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let (file, columns, title, body, rows) = match kind {
        PlotKind::Discrepancy => {
            let mut s = String::new();
            for (n, d) in &data.discrepancy {
                let _ = writeln!(s, "{n} {d:.16e}");
            }
            ("Dn", ["n", "D_n"], "discrepancy trace", s, data.discrepancy.len())
        }
        PlotKind::Bounds => {
            let mut s = String::new();
            for (r, l) in &data.lambda_min {
                let _ = writeln!(s, "{r} {l:.16e}");
            }
            ("lmin", ["R", "lambda_min"], "smallest Gram eigenvalue against truncation radius", s, data.lambda_min.len())
        }
    };
    if rows == 0 {
        return Err(CliError::Precondition(format!("report has no series for {file}.dat")));
    }
    let dat = dir.join(format!("{file}.dat"));
    let desc = dir.join(format!("{file}.json"));
    let name = format!("{file}.dat");
    let descriptor = Descriptor { data: &name, columns, rows, title };
    write_file(&dat, &body)?;
    write_file(&desc, &(serde_json::to_string_pretty(&descriptor).expect("descriptor serializes") + "\n"))?;
    Ok(vec![dat, desc])
}
