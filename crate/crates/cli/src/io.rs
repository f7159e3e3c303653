use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::CliError;

/// Up to 12 significant digits, plain decimal for ordinary magnitudes.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap();
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn round_json(x: f64) -> Value {
    if x.is_finite() {
        let rounded: f64 = format!("{x:.11e}").parse().unwrap();
        json!(rounded)
    } else {
        json!(fmt_float(x))
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => "NA".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => round_json(*x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.into_inner()
            .map_err(|e| CliError::Compute(format!("csv buffer: {e}")))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .headers
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Writes `body` to `out` (or stdout) and, for files, the replay sidecar
/// `<out>.json`.
pub fn emit(body: &[u8], out: Option<&Path>, sidecar: &Value) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| write_err(path, e))?;
            let side = sidecar_path(path);
            let text = serde_json::to_string_pretty(sidecar)? + "\n";
            std::fs::write(&side, text).map_err(|e| write_err(&side, e))?;
            log::info!("wrote {} and {}", path.display(), side.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Compute(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Compute(format!("cannot write {}: {e}", path.display()))
}

pub fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Validation(format!("cannot open {}: {e}", path.display())))
}

fn reader(path: &Path) -> Result<csv::Reader<File>, CliError> {
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, CliError> {
    headers.iter().position(|h| h == name).ok_or_else(|| {
        CliError::Validation(format!(
            "{}: no column named {name:?} (found {:?})",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        ))
    })
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn parse_field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    col: usize,
    name: &str,
    path: &Path,
) -> Result<T, CliError> {
    let raw = rec.get(col).unwrap_or("");
    raw.parse().map_err(|_| {
        CliError::Validation(format!(
            "{} line {}: cannot parse {name} {raw:?}",
            path.display(),
            line_of(rec)
        ))
    })
}

/// Reads `index,<column>` rows keyed by 1-based index; returns values in
/// index order. Indices must be exactly 1..=n.
pub fn read_scores(path: &Path, value_col: &str) -> Result<Vec<f64>, CliError> {
    let pairs = read_indexed(path, value_col, |s| s.parse::<f64>().ok().filter(|v| v.is_finite()))?;
    let n = pairs.len();
    let mut out = vec![f64::NAN; n];
    for (idx, v, line) in pairs {
        if idx == 0 || idx > n {
            return Err(CliError::Validation(format!(
                "{} line {line}: index {idx} outside 1..={n}",
                path.display()
            )));
        }
        if !out[idx - 1].is_nan() {
            return Err(CliError::Validation(format!(
                "{} line {line}: duplicate index {idx}",
                path.display()
            )));
        }
        out[idx - 1] = v;
    }
    Ok(out)
}

/// Reads `index,<column>` with integer values, checking every index exists
/// among the `n` scored items and appears once.
pub fn read_assignment(path: &Path, value_col: &str, n: usize) -> Result<Vec<usize>, CliError> {
    let pairs = read_indexed(path, value_col, |s| s.parse::<usize>().ok())?;
    let mut out: Vec<Option<usize>> = vec![None; n];
    for (idx, v, line) in pairs {
        if idx == 0 || idx > n {
            return Err(CliError::Validation(format!(
                "{} line {line}: index {idx} not present in scores (items are 1..={n})",
                path.display()
            )));
        }
        if out[idx - 1].replace(v).is_some() {
            return Err(CliError::Validation(format!(
                "{} line {line}: duplicate index {idx}",
                path.display()
            )));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                CliError::Validation(format!("{}: index {} is missing", path.display(), i + 1))
            })
        })
        .collect()
}

fn read_indexed<T>(
    path: &Path,
    value_col: &str,
    parse: impl Fn(&str) -> Option<T>,
) -> Result<Vec<(usize, T, u64)>, CliError> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    let ic = column(&headers, "index", path)?;
    let vc = column(&headers, value_col, path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let idx: usize = parse_field(&rec, ic, "index", path)?;
        let raw = rec.get(vc).unwrap_or("");
        let v = parse(raw).ok_or_else(|| {
            CliError::Validation(format!(
                "{} line {}: cannot parse {value_col} {raw:?}",
                path.display(),
                line_of(&rec)
            ))
        })?;
        out.push((idx, v, line_of(&rec)));
    }
    if out.is_empty() {
        return Err(CliError::Validation(format!("{}: no rows", path.display())));
    }
    Ok(out)
}

/// First column of a headed CSV as numbers.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(parse_field::<f64>(&rec, 0, "value", path)?);
    }
    if out.is_empty() {
        return Err(CliError::Validation(format!("{}: no rows", path.display())));
    }
    Ok(out)
}

/// Parses `"10,20,30"` or `"a..=b"` / `"a..=b:step"` style grids.
pub fn parse_grid(s: &str) -> Result<Vec<usize>, String> {
    if let Some((a, rest)) = s.split_once("..=") {
        let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        let (a, b, step) = (p(a)?, p(b)?, p(step)?);
        if step == 0 || a > b {
            return Err(format!("empty range {s:?}"));
        }
        return Ok((a..=b).step_by(step).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

/// Groups a slice of blocks/ranks by value for error messages.
pub fn duplicates(values: &[usize]) -> Vec<usize> {
    let mut seen = HashMap::new();
    for &v in values {
        *seen.entry(v).or_insert(0usize) += 1;
    }
    let mut d: Vec<usize> = seen.into_iter().filter(|&(_, c)| c > 1).map(|(v, _)| v).collect();
    d.sort_unstable();
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_twelve_digits() {
        assert_eq!(fmt_float(2.5), "2.5");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(-2.0 / 3.0 * 1e20), "-6.66666666667e19");
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_float(123_456_789.123_456_78), "123456789.123");
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("2..=5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_grid("10..=30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_grid("64, 128").unwrap(), vec![64, 128]);
        assert!(parse_grid("5..=2").is_err());
        assert!(parse_grid("a").is_err());
    }
}
