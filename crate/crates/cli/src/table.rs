//! Result tables and their CSV/JSON emission.

use anyhow::{Context, Result};
use planar_density::measures::PointMeasure;
use planar_density::Vec2;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    B(bool),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        serde_json::Number::from_f64(v).expect("finite").to_string()
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::F(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::F(v) => s.serialize_str(&fmt_f64(*v)),
            Cell::U(v) => s.serialize_u64(*v),
            Cell::S(v) => s.serialize_str(v),
            Cell::B(v) => s.serialize_bool(*v),
            Cell::Null => s.serialize_unit(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

/// One output row. Every row carries the trusted window and provenance of
/// the measure it was computed on, empty when none is involved.
#[derive(Clone, Debug, Default)]
pub struct Row {
    values: Vec<(&'static str, Cell)>,
    window: Option<(f64, f64)>,
    provenance: Option<String>,
    asserted: bool,
    pass: bool,
    error: Option<String>,
}

impl Row {
    pub fn new() -> Self {
        Self {
            pass: true,
            ..Default::default()
        }
    }

    pub fn with(mut self, key: &'static str, v: impl Into<Cell>) -> Self {
        self.values.push((key, v.into()));
        self
    }

    pub fn point(self, prefix: &'static str, p: Vec2) -> Self {
        let (kx, ky) = point_keys(prefix);
        self.with(kx, p.x).with(ky, p.y)
    }

    pub fn measure(mut self, mu: &PointMeasure) -> Self {
        self.window = Some(mu.trusted_window());
        self.provenance = Some(serde_json::to_string(mu.provenance()).expect("provenance serializes"));
        self
    }

    /// Marks the row as asserted; `pass` feeds the exit code.
    pub fn check(mut self, pass: bool) -> Self {
        self.asserted = true;
        self.pass = self.pass && pass;
        self
    }

    /// Records an error; asserted rows with errors fail.
    pub fn error(mut self, msg: impl ToString, asserted: bool) -> Self {
        self.error = Some(msg.to_string());
        self.asserted = asserted;
        self.pass = false;
        self
    }

    pub fn asserted(&self) -> bool {
        self.asserted
    }

    pub fn passed(&self) -> bool {
        self.pass
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.values.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    fn cells(&self) -> Vec<(&'static str, Cell)> {
        let mut out = self.values.clone();
        let (lo, hi) = match self.window {
            Some((a, b)) => (Cell::F(a), Cell::F(b)),
            None => (Cell::Null, Cell::Null),
        };
        out.push(("window_lo", lo));
        out.push(("window_hi", hi));
        out.push(("provenance", self.provenance.clone().into()));
        out.push(("asserted", Cell::B(self.asserted)));
        out.push(("pass", Cell::B(!self.asserted || self.pass)));
        out.push(("error", self.error.clone().into()));
        out
    }
}

const STANDARD_COLUMNS: [&str; 6] = ["window_lo", "window_hi", "provenance", "asserted", "pass", "error"];

fn point_keys(prefix: &'static str) -> (&'static str, &'static str) {
    match prefix {
        "center" => ("center_x", "center_y"),
        "y" => ("y_x", "y_y"),
        "nu" => ("nu_x", "nu_y"),
        "nu1" => ("nu1_x", "nu1_y"),
        "nu2" => ("nu2_x", "nu2_y"),
        "b" => ("b_x", "b_y"),
        "witness" => ("witness_x", "witness_y"),
        "direction" => ("direction_x", "direction_y"),
        "normal" => ("normal_x", "normal_y"),
        "point" => ("point_x", "point_y"),
        "x0" => ("x0_x", "x0_y"),
        other => panic!("no column names for point {other}"),
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: &'static str,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(name: &'static str, rows: Vec<Row>) -> Self {
        Self { name, rows }
    }

    /// Column names in first-seen order.
    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols: Vec<&'static str> = Vec::new();
        for r in &self.rows {
            for (k, _) in &r.values {
                if !cols.contains(k) {
                    cols.push(k);
                }
            }
        }
        cols.extend(STANDARD_COLUMNS);
        cols
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let cols = self.columns();
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&cols)?;
        for r in &self.rows {
            let cells = r.cells();
            let rec: Vec<String> = cols
                .iter()
                .map(|c| cells.iter().find(|(k, _)| k == c).map_or(String::new(), |(_, v)| v.csv()))
                .collect();
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

struct RowJson<'a>(&'a Row);

impl Serialize for RowJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let cells = self.0.cells();
        let mut m = s.serialize_map(Some(cells.len()))?;
        for (k, v) in &cells {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

struct TableJson<'a>(&'a Table);

impl Serialize for TableJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<RowJson> = self.0.rows.iter().map(RowJson).collect();
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("name", self.0.name)?;
        m.serialize_entry("rows", &rows)?;
        m.end()
    }
}

/// Everything one run produces.
#[derive(Clone, Debug)]
pub struct Report {
    pub experiment: &'static str,
    pub seed: u64,
    pub tables: Vec<Table>,
    /// Extra structured output (scan headers, certificates).
    pub summary: serde_json::Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Report {
    pub fn asserted(&self) -> usize {
        self.tables.iter().flat_map(|t| &t.rows).filter(|r| r.asserted()).count()
    }

    pub fn failed(&self) -> usize {
        self.tables
            .iter()
            .flat_map(|t| &t.rows)
            .filter(|r| r.asserted() && !r.passed())
            .count()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn header(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.experiment,
            "seed": self.seed,
            "asserted_rows": self.asserted(),
            "failed_rows": self.failed(),
            "summary": self.summary,
        })
    }

    /// Writes `<experiment>.json`, or one CSV per table plus
    /// `<experiment>_summary.json`. Returns the files written.
    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        match format {
            Format::Json => {
                let doc = JsonDoc {
                    header: self.header(),
                    tables: self.tables.iter().map(TableJson).collect(),
                };
                let path = dir.join(format!("{}.json", self.experiment));
                write_json(&path, &doc)?;
                written.push(path);
            }
            Format::Csv => {
                for t in &self.tables {
                    let path = dir.join(format!("{}_{}.csv", self.experiment, t.name));
                    let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    t.write_csv(std::io::BufWriter::new(f))?;
                    written.push(path);
                }
                let mut doc = self.header();
                doc["tables"] = self.tables.iter().map(|t| t.name).collect::<Vec<_>>().into();
                let path = dir.join(format!("{}_report.json", self.experiment));
                write_json(&path, &doc)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    #[serde(flatten)]
    header: serde_json::Value,
    tables: Vec<TableJson<'a>>,
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, v)?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_standard_columns_last() {
        let t = Table::new("x", vec![Row::new().with("a", 1.5).check(true), Row::new().with("b", "s")]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "a,b,window_lo,window_hi,provenance,asserted,pass,error"
        );
        assert_eq!(lines.next().unwrap(), "1.5,,,,,true,true,");
        assert_eq!(lines.next().unwrap(), ",s,,,,false,true,");
    }

    #[test]
    fn failed_counts_only_asserted_rows() {
        let rows = vec![
            Row::new().check(false),
            Row::new().error("boom", false),
            Row::new().check(true),
        ];
        let r = Report {
            experiment: "density",
            seed: 0,
            tables: vec![Table::new("t", rows)],
            summary: serde_json::Value::Null,
        };
        assert_eq!(r.asserted(), 2);
        assert_eq!(r.failed(), 1);
    }

    #[test]
    fn non_finite_floats_are_spelled_out() {
        assert_eq!(Cell::F(f64::INFINITY).csv(), "inf");
        assert_eq!(serde_json::to_string(&Cell::F(f64::NAN)).unwrap(), "\"nan\"");
        assert_eq!(Cell::F(2.0).csv(), "2.0");
    }
}
