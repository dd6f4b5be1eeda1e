//! Parameter sweeps over relay placement, relay height, rate and coverage
//! extension, with CSV and JSON output.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::Cell;
use crate::config::CellConfig;
use crate::error::{Error, Result};
use crate::geometry::UserPosition;
use crate::metrics::{dtx_only_report, energy_report, EstimatorOptions};
use crate::pathloss::ScenarioTable;
use crate::rea::{characteristic_distances, ReaOutcome};
use crate::schemes::{Alpha, Direction, SchemeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Relay to base station distance, meters.
    RelayDistance,
    /// Relay height, meters.
    RelayHeight,
    /// Target rate, bits/s/Hz.
    Rate,
    /// Coverage extension fraction.
    Beta,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::RelayDistance => "relay-distance",
            SweepParameter::RelayHeight => "relay-height",
            SweepParameter::Rate => "rate",
            SweepParameter::Beta => "beta",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relay-distance" | "dr" | "d_r" => Ok(SweepParameter::RelayDistance),
            "relay-height" | "hr" | "h_r" => Ok(SweepParameter::RelayHeight),
            "rate" => Ok(SweepParameter::Rate),
            "beta" => Ok(SweepParameter::Beta),
            _ => Err(Error::Config(format!("unknown sweep parameter {s:?}"))),
        }
    }
}

/// A one-dimensional sweep around a fixed cell configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    #[serde(default)]
    pub cell: CellConfig,
    /// Relayed schemes to evaluate; DTx entries are ignored.
    #[serde(default = "default_schemes")]
    pub schemes: Vec<SchemeId>,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    #[serde(default = "default_alpha")]
    pub alpha: Alpha,
    /// Coverage extension used when `parameter` is not `beta`.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub estimator: EstimatorOptions,
    /// Metric columns to emit; empty means all. The identifying columns up to
    /// `reason` are always emitted.
    #[serde(default)]
    pub metrics: Vec<String>,
}

fn default_schemes() -> Vec<SchemeId> {
    vec![SchemeId::FullDf, SchemeId::EoPdf]
}

fn default_direction() -> Direction {
    Direction::Uplink
}

fn default_alpha() -> Alpha {
    Alpha::TwoHop
}

fn default_beta() -> f64 {
    1.0
}

impl SweepSpec {
    /// Relay-distance sweep of `cell` at full coverage extension.
    pub fn relay_distance(cell: CellConfig, start: f64, stop: f64, step: f64) -> Self {
        SweepSpec {
            parameter: SweepParameter::RelayDistance,
            start,
            stop,
            step,
            cell,
            schemes: default_schemes(),
            direction: default_direction(),
            alpha: default_alpha(),
            beta: default_beta(),
            estimator: EstimatorOptions::default(),
            metrics: Vec::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<sweep spec>".into(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("sweep step must be positive, got {}", self.step)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(Error::Config(format!(
                "sweep range [{}, {}] is empty",
                self.start, self.stop
            )));
        }
        let beta_ok = |b: f64| (0.0..=1.0).contains(&b);
        if !beta_ok(self.beta) {
            return Err(Error::Config(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if self.parameter == SweepParameter::Beta && !(beta_ok(self.start) && beta_ok(self.stop)) {
            return Err(Error::Config("beta sweep range must lie in [0, 1]".into()));
        }
        if !self.schemes.iter().any(|s| s.is_relayed()) {
            return Err(Error::Config("sweep needs at least one relayed scheme".into()));
        }
        if let Some(bad) = self.metrics.iter().find(|m| !METRIC_COLUMNS.contains(&m.as_str())) {
            return Err(Error::Config(format!(
                "unknown sweep metric {bad}; expected one of {}",
                METRIC_COLUMNS.join(", ")
            )));
        }
        Ok(())
    }

    /// Columns to emit, in table order.
    pub fn columns(&self) -> Vec<&'static str> {
        COLUMNS
            .iter()
            .enumerate()
            .filter(|(i, c)| *i < ID_COLUMNS || self.metrics.is_empty() || self.metrics.iter().any(|m| m == *c))
            .map(|(_, c)| *c)
            .collect()
    }

    /// Sweep points. The stop value is included when it falls on the grid up
    /// to rounding.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn relayed(&self) -> Vec<SchemeId> {
        let mut out: Vec<SchemeId> = Vec::new();
        for s in &self.schemes {
            if s.is_relayed() && !out.contains(s) {
                out.push(*s);
            }
        }
        out
    }
}

/// Column names, with units, in emission order.
pub const COLUMNS: [&str; 22] = [
    "index",
    "parameter",
    "value",
    "scheme",
    "direction",
    "alpha",
    "relay_distance_m",
    "relay_height_m",
    "rate_bit_s_hz",
    "beta",
    "accepted",
    "reason",
    "d_min_m",
    "r_dtx_m",
    "r_cov_max_m",
    "r_cov_m",
    "p_rtx",
    "e_avg_j",
    "e_per_area_j_m2",
    "cost_ratio",
    "energy_gain_db",
    "edge_gain_db",
];

const ID_COLUMNS: usize = 12;

/// Columns selectable through [`SweepSpec::metrics`].
pub const METRIC_COLUMNS: &[&str] = COLUMNS.split_at(ID_COLUMNS).1;

/// One sweep point for one scheme. Metric fields are empty on rejected
/// points; `reason` then carries the rejection or error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub parameter: SweepParameter,
    pub value: f64,
    pub scheme: SchemeId,
    pub direction: Direction,
    pub alpha: Alpha,
    #[serde(rename = "relay_distance_m")]
    pub relay_distance: f64,
    #[serde(rename = "relay_height_m")]
    pub relay_height: f64,
    #[serde(rename = "rate_bit_s_hz")]
    pub rate: f64,
    pub beta: f64,
    pub accepted: bool,
    pub reason: String,
    #[serde(rename = "d_min_m")]
    pub d_min: Option<f64>,
    #[serde(rename = "r_dtx_m")]
    pub r_dtx: Option<f64>,
    /// Maximal coverage radius of the relay-extended cell.
    #[serde(rename = "r_cov_max_m")]
    pub r_cov_max: Option<f64>,
    /// Coverage radius at this point's extension.
    #[serde(rename = "r_cov_m")]
    pub r_cov: Option<f64>,
    pub p_rtx: Option<f64>,
    #[serde(rename = "e_avg_j")]
    pub e_avg: Option<f64>,
    #[serde(rename = "e_per_area_j_m2")]
    pub e_per_area: Option<f64>,
    pub cost_ratio: Option<f64>,
    /// Cell-average gain over DTx with coverage pinned to `R_DTx`.
    pub energy_gain_db: Option<f64>,
    /// Per-position gain over DTx at `(R_DTx, 0)`.
    pub edge_gain_db: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    index: usize,
    value: f64,
    scheme: SchemeId,
}

fn point_config(spec: &SweepSpec, value: f64) -> (CellConfig, f64) {
    let mut cfg = spec.cell.clone();
    let mut beta = spec.beta;
    match spec.parameter {
        SweepParameter::RelayDistance => cfg.relay_distance = value,
        SweepParameter::RelayHeight => cfg.relay_height = value,
        SweepParameter::Rate => cfg.rate = value,
        SweepParameter::Beta => beta = value,
    }
    (cfg, beta)
}

fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Radius of a cell extended by `beta` between the DTx radius and the
/// maximal relay-aided coverage.
pub fn extended_radius(r_dtx: f64, r_cov_max: f64, beta: f64) -> f64 {
    r_dtx + beta * (r_cov_max - r_dtx)
}

fn outcome_with_radius(outcome: &ReaOutcome, r_cov: f64) -> ReaOutcome {
    let mut o = *outcome;
    o.distances.r_cov = r_cov;
    o
}

fn evaluate(spec: &SweepSpec, table: &ScenarioTable, p: Point) -> SweepRow {
    let (cfg, beta) = point_config(spec, p.value);
    let mut row = SweepRow {
        index: p.index,
        parameter: spec.parameter,
        value: p.value,
        scheme: p.scheme,
        direction: spec.direction,
        alpha: spec.alpha,
        relay_distance: cfg.relay_distance,
        relay_height: cfg.relay_height,
        rate: cfg.rate,
        beta,
        accepted: false,
        reason: String::new(),
        d_min: None,
        r_dtx: None,
        r_cov_max: None,
        r_cov: None,
        p_rtx: None,
        e_avg: None,
        e_per_area: None,
        cost_ratio: None,
        energy_gain_db: None,
        edge_gain_db: None,
    };
    if let Err(e) = fill(&mut row, spec, table, cfg, beta) {
        row.accepted = false;
        row.reason = e.to_string();
    }
    row
}

fn fill(row: &mut SweepRow, spec: &SweepSpec, table: &ScenarioTable, cfg: CellConfig, beta: f64) -> Result<()> {
    let cell = Cell::new(cfg, table)?;
    let dir = spec.direction;
    let outcome = characteristic_distances(&cell, dir, row.scheme, spec.alpha)?;
    let cd = outcome.distances;
    row.d_min = Some(cd.d_min);
    row.r_dtx = Some(cd.r_dtx);
    if let Some(r) = outcome.rejection {
        row.reason = r.to_string();
        return Ok(());
    }
    row.r_cov_max = Some(cd.r_cov);
    let r_cov = extended_radius(cd.r_dtx, cd.r_cov, beta);
    row.r_cov = Some(r_cov);
    let report = energy_report(
        &cell,
        &outcome_with_radius(&outcome, r_cov),
        spec.alpha,
        &spec.estimator,
    )?;
    row.p_rtx = Some(report.p_rtx);
    row.e_avg = Some(report.e_total_avg);
    row.e_per_area = Some(report.e_per_area);
    row.cost_ratio = Some(report.cost_ratio);

    let pinned = if beta == 0.0 {
        report
    } else {
        energy_report(
            &cell,
            &outcome_with_radius(&outcome, cd.r_dtx),
            spec.alpha,
            &spec.estimator,
        )?
    };
    let dtx = dtx_only_report(&cell, dir, cd.r_dtx);
    row.energy_gain_db = Some(db(dtx.e_total_avg / pinned.e_total_avg));
    row.edge_gain_db = edge_gain(&cell, dir, row.scheme, spec.alpha, cd.r_dtx).map(db);
    row.accepted = true;
    Ok(())
}

/// `E_DTx / E_scheme` at `(r, 0)`, when both are feasible there.
fn edge_gain(cell: &Cell, dir: Direction, scheme: SchemeId, alpha: Alpha, r: f64) -> Option<f64> {
    let u = UserPosition::new(r, 0.0);
    let d = cell.energy(SchemeId::Dtx, u, dir, alpha);
    let s = cell.energy(scheme, u, dir, alpha);
    (d.feasible() && s.feasible()).then(|| d.required() / s.required())
}

/// Evaluates every sweep point for every relayed scheme. Points run in
/// parallel; rows come back ordered by point, then by scheme.
pub fn run_sweep(spec: &SweepSpec, table: &ScenarioTable) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let schemes = spec.relayed();
    let points: Vec<Point> = spec
        .values()
        .into_iter()
        .enumerate()
        .flat_map(|(index, value)| schemes.iter().map(move |&scheme| Point { index, value, scheme }))
        .collect();
    Ok(points.into_par_iter().map(|p| evaluate(spec, table, p)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown output format {s:?}"))),
        }
    }
}

/// Writes rows as CSV with a header row, even when `rows` is empty.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n").map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Ordered subset of a row's fields.
struct Projected<'a> {
    fields: &'a serde_json::Map<String, serde_json::Value>,
    columns: &'a [&'a str],
}

impl Serialize for Projected<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.columns.len()))?;
        for c in self.columns {
            m.serialize_entry(c, &self.fields[*c])?;
        }
        m.end()
    }
}

fn cell_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Null => String::new(),
        serde_json::Value::String(s) => s.clone(),
        v => v.to_string(),
    }
}

/// Writes `columns` of every row; all columns give the same bytes as
/// [`write_csv`] and [`write_json`].
pub fn write_columns<W: Write>(rows: &[SweepRow], columns: &[&str], format: Format, mut out: W) -> Result<()> {
    if let Some(bad) = columns.iter().find(|c| !COLUMNS.contains(c)) {
        return Err(Error::Config(format!("unknown sweep column {bad}")));
    }
    if columns == COLUMNS {
        return match format {
            Format::Csv => write_csv(rows, out),
            Format::Json => write_json(rows, out),
        };
    }
    let values = rows
        .iter()
        .map(|r| match serde_json::to_value(r)? {
            serde_json::Value::Object(m) => Ok(m),
            _ => unreachable!("rows serialize as maps"),
        })
        .collect::<Result<Vec<_>>>()?;
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(columns)?;
            for m in &values {
                w.write_record(columns.iter().map(|c| cell_text(&m[*c])))?;
            }
            w.flush().map_err(|e| Error::Csv(e.into()))?;
        }
        Format::Json => {
            let projected: Vec<Projected> = values.iter().map(|fields| Projected { fields, columns }).collect();
            serde_json::to_writer_pretty(&mut out, &projected)?;
            out.write_all(b"\n").map_err(|e| Error::Csv(e.into()))?;
        }
    }
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
    Ok(rows)
}

pub fn read_json<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    Ok(serde_json::from_reader(input)?)
}

/// Writes `columns` of the table to `path` in `format`.
pub fn emit(rows: &[SweepRow], columns: &[&str], format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let res = write_columns(rows, columns, format, std::io::BufWriter::new(file));
    res.map_err(|e| match e {
        Error::Csv(c) if c.is_io_error() => match c.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        },
        e => e,
    })
}
