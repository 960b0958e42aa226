//! CSV and report formats shared by all commands.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use dampwave::{DiagnosticsRow, Field, Grid1D};

use crate::error::CliError;

pub const HEADER: [&str; 9] = [
    "t", "l2_u", "h1_u", "l2_ut", "hm1_G", "E_u", "E0_u", "H_lyap", "l2_dist_psi",
];

/// Scientific notation with 15 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn row_fields(r: &DiagnosticsRow) -> [String; 9] {
    [
        r.t,
        r.l2_u,
        r.h1_u,
        r.l2_ut,
        r.hm1_g,
        r.energy,
        r.stationary_energy,
        r.lyapunov,
        r.l2_dist_psi.unwrap_or(r.l2_u),
    ]
    .map(fmt_float)
}

pub fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

pub fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Streams diagnostics rows to a CSV file.
pub struct RowWriter {
    path: PathBuf,
    inner: csv::Writer<BufWriter<File>>,
}

impl RowWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let mut inner = create(path)?;
        inner.write_record(HEADER).map_err(|e| csv_err(path, e))?;
        Ok(RowWriter {
            path: path.to_path_buf(),
            inner,
        })
    }

    pub fn write(&mut self, r: &DiagnosticsRow) -> Result<(), CliError> {
        self.inner
            .write_record(row_fields(r))
            .map_err(|e| csv_err(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Reads two columns of a headed CSV as `(t, value)` pairs.
pub fn read_columns(path: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Csv {
            path: path.to_path_buf(),
            message: format!("no column `{name}`"),
        })
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let parse = |i: usize| {
            rec.get(i).and_then(|s| s.trim().parse::<f64>().ok()).ok_or_else(|| CliError::Csv {
                path: path.to_path_buf(),
                message: format!("record {}: column {} is not a number", n + 1, &headers[i]),
            })
        };
        out.push((parse(ix)?, parse(iy)?));
    }
    Ok(out)
}

/// Writes a profile as `x,psi` rows.
pub fn write_profile(path: &Path, g: &Grid1D, psi: &[f64]) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_record(["x", "psi"]).map_err(|e| csv_err(path, e))?;
    for (i, v) in psi.iter().enumerate() {
        w.write_record([fmt_float(g.x(i)), fmt_float(*v)])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a profile written by [`write_profile`] and checks it against `g`.
pub fn read_profile(path: &Path, g: &Grid1D) -> Result<Field, CliError> {
    let rows = read_columns(path, "x", "psi")?;
    if rows.len() != g.n_interior() {
        return Err(CliError::Csv {
            path: path.to_path_buf(),
            message: format!("profile has {} nodes, grid has {}", rows.len(), g.n_interior()),
        });
    }
    for (i, (x, _)) in rows.iter().enumerate() {
        if (x - g.x(i)).abs() > 1e-9 * (1.0 + g.half_length()) {
            return Err(CliError::Csv {
                path: path.to_path_buf(),
                message: format!("node {i} at x = {x}, grid expects {}", g.x(i)),
            });
        }
    }
    Ok(rows.into_iter().map(|(_, v)| v).collect())
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report(pub Vec<(String, String)>);

impl Report {
    pub fn new() -> Self {
        Report(Vec::new())
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn extend(&mut self, other: Report) {
        self.0.extend(other.0);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `<file>\t<config hash>` lines.
#[derive(Debug, Default)]
pub struct Manifest(Vec<(String, String)>);

impl Manifest {
    pub fn add(&mut self, file: &Path, hash: &str) {
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.0.push((name, hash.to_string()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.0
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text: String = self.0.iter().map(|(f, h)| format!("{f}\t{h}\n")).collect();
        write_text(path, &text)
    }
}
