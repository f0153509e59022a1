//! Command reports: tolerance checks, CSV tables and log-log plot series.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

/// Acceptance bound on a measured value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// Closed interval.
    Between(f64, f64),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
            Bound::Between(lo, hi) => v >= lo && v <= hi,
        }
    }

    pub fn within(target: f64, tol: f64) -> Self {
        Bound::Between(target - tol, target + tol)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Two-column series for a log-log plot, kept in insertion order.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            name: name.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub series: Vec<Series>,
}

/// Text form of a number in tables: shortest round-trip representation.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map(|n| n.to_string()).unwrap_or_default()
    } else {
        format!("{x}")
    }
}

pub fn point(p: &[f64]) -> Vec<String> {
    p.iter().map(|v| num(*v)).collect()
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            seed,
            ..Default::default()
        }
    }

    pub fn param<V: Serialize>(&mut self, key: &str, v: V) {
        self.parameters.insert(key.into(), serde_json::to_value(v).expect("serializable parameter"));
    }

    /// Records a check; NaN values fail every bound.
    pub fn check(&mut self, name: &str, value: f64, bound: Bound) -> bool {
        let passed = bound.holds(value);
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            passed,
        });
        passed
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
        for (k, v) in other.parameters {
            self.parameters.insert(format!("{prefix}.{k}"), v);
        }
        for mut t in other.tables {
            t.name = format!("{prefix}-{}", t.name);
            self.tables.push(t);
        }
        for mut s in other.series {
            s.name = format!("{prefix}-{}", s.name);
            self.series.push(s);
        }
    }

    /// JSON summary: parameters, checks, certificate and the overall verdict.
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            #[serde(flatten)]
            report: &'a Report,
            passed: bool,
            tables: Vec<String>,
            plots: Vec<String>,
        }
        let s = Summary {
            report: self,
            passed: self.passed(),
            tables: self.tables.iter().map(|t| self.table_file(t)).collect(),
            plots: self.series.iter().map(|s| self.plot_file(s)).collect(),
        };
        let mut out = serde_json::to_string_pretty(&s).expect("report serializes");
        out.push('\n');
        out
    }

    fn table_file(&self, t: &Table) -> String {
        format!("{}-{}.csv", self.command, t.name)
    }

    fn plot_file(&self, s: &Series) -> String {
        format!("{}-{}.plot.csv", self.command, s.name)
    }

    /// Writes `<command>.json`, one CSV per table and one per plot series.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join(format!("{}.json", self.command));
        fs::write(&path, self.summary_json())?;
        written.push(path);
        for t in &self.tables {
            let path = dir.join(self.table_file(t));
            fs::write(&path, table_csv(t))?;
            written.push(path);
        }
        for (file, body) in emit_plotdata(self) {
            let path = dir.join(file);
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn table_csv(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header).expect("in-memory write");
    for r in &t.rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// CSV body of one series: header from the axis labels, points in order.
pub fn series_csv(s: &Series) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([&s.x_label, &s.y_label]).expect("in-memory write");
    for (x, y) in &s.points {
        w.write_record([num(*x), num(*y)]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Plot files of a report as `(file name, CSV body)`. A report without series
/// yields a single header-only file.
pub fn emit_plotdata(report: &Report) -> Vec<(String, String)> {
    if report.series.is_empty() {
        let empty = Series::new("empty", "x", "y");
        return vec![(report.plot_file(&empty), series_csv(&empty))];
    }
    report.series.iter().map(|s| (report.plot_file(s), series_csv(s))).collect()
}
