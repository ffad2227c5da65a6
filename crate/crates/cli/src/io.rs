//! Data files. Floats are written with the shortest representation that
//! round-trips, so identical results give identical bytes.

use crate::CliError;
use fracconv::{Field, SpatialGrid};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// RFC 4180 CSV with a header row and CRLF-free line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(CliError::Internal(format!("{}: row of {} cells under {} columns", path.display(), row.len(), header.len())));
        }
        w.write_record(row.iter().map(Cell::render)).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let header = r.headers().map_err(|e| CliError::io(path, e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| CliError::io(path, e))?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn mkdir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct GridMeta {
    kind: &'static str,
    dim: usize,
    points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outer_radius: Option<f64>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    time: f64,
    columns: &'a [&'a str],
    grid: GridMeta,
}

fn grid_meta(g: &SpatialGrid) -> GridMeta {
    GridMeta {
        kind: g.kind(),
        dim: g.dim(),
        points: g.len(),
        half_width: g.as_uniform().map(|u| u.half_width),
        outer_radius: g.as_stretched().map(|s| s.nodes().last().copied().unwrap_or(0.0)),
    }
}

/// Field as CSV (coordinates, value) plus a JSON sidecar with grid metadata and time.
pub fn write_field(path: &Path, f: &Field) -> Result<(), CliError> {
    let d = f.grid.dim();
    let cols: &[&str] = if d == 1 { &["x", "value"] } else { &["x", "y", "value"] };
    let rows = (0..f.grid.len()).map(|i| {
        let p = f.grid.point(i);
        let mut r: Vec<Cell> = vec![p[0].into()];
        if d == 2 {
            r.push(p[1].into());
        }
        r.push(f.values[i].into());
        r
    });
    write_csv(path, cols, rows)?;
    write_json(&path.with_extension("json"), &Sidecar { time: f.time, columns: cols, grid: grid_meta(&f.grid) })
}

/// All regular files under `root`, sorted, with paths relative to it.
pub fn list_files(root: &Path) -> Result<Vec<PathBuf>, CliError> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
        let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
        for e in entries {
            let e = e.map_err(|e| CliError::io(dir, e))?;
            let p = e.path();
            if p.is_dir() {
                walk(base, &p, out)?;
            } else {
                out.push(p.strip_prefix(base).expect("walk stays under base").to_path_buf());
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, &mut out)?;
    out.sort();
    Ok(out)
}

/// Data files: CSV tables and the effective-config echo. Reports carry wall
/// times and are excluded.
pub fn is_data_file(p: &Path) -> bool {
    p.extension().is_some_and(|e| e == "csv") || p.file_name().is_some_and(|n| n == "effective-config.toml")
}

/// Outcome of comparing the data files of two output trees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeComparison {
    pub files: Vec<FileComparison>,
    pub identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileComparison {
    pub path: String,
    pub bytes_a: Option<u64>,
    pub bytes_b: Option<u64>,
    pub identical: bool,
}

pub fn compare_trees(a: &Path, b: &Path) -> Result<TreeComparison, CliError> {
    let mut names: Vec<PathBuf> = list_files(a)?.into_iter().chain(list_files(b)?).filter(|p| is_data_file(p)).collect();
    names.sort();
    names.dedup();
    let mut files = Vec::new();
    for n in names {
        let ra = fs::read(a.join(&n)).ok();
        let rb = fs::read(b.join(&n)).ok();
        let identical = matches!((&ra, &rb), (Some(x), Some(y)) if x == y);
        files.push(FileComparison {
            path: n.to_string_lossy().replace('\\', "/"),
            bytes_a: ra.as_ref().map(|v| v.len() as u64),
            bytes_b: rb.as_ref().map(|v| v.len() as u64),
            identical,
        });
    }
    let identical = !files.is_empty() && files.iter().all(|f| f.identical);
    Ok(TreeComparison { files, identical })
}

/// A directory that becomes `target` only through [`Staging::promote`]; dropped
/// unpromoted, it is deleted.
pub struct Staging {
    dir: PathBuf,
    target: PathBuf,
    promoted: bool,
}

impl Staging {
    pub fn new(target: &Path) -> Result<Self, CliError> {
        let parent = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        mkdir(parent)?;
        let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        let mut k = 0u32;
        let dir = loop {
            let d = parent.join(format!(".staging-{name}-{}-{k}", std::process::id()));
            if !d.exists() {
                break d;
            }
            k += 1;
        };
        mkdir(&dir)?;
        Ok(Staging { dir, target: target.to_path_buf(), promoted: false })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Replaces `target` by the staged tree.
    pub fn promote(mut self) -> Result<PathBuf, CliError> {
        if self.target.exists() {
            fs::remove_dir_all(&self.target).map_err(|e| CliError::io(&self.target, e))?;
        }
        fs::rename(&self.dir, &self.target).map_err(|e| CliError::io(&self.target, e))?;
        self.promoted = true;
        Ok(self.target.clone())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.promoted {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}
