//! Python module `relay_rea`. Structured results cross the boundary as plain
//! dicts and lists built from the core types' serde representation.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::de::DeserializeOwned;
use serde::Serialize;

use ::relay_rea as core;
use core::{Alpha, Direction, SchemeId, UserPosition};

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

fn table(path: Option<&str>) -> PyResult<core::ScenarioTable> {
    match path {
        Some(p) => core::ScenarioTable::from_path(p).map_err(err),
        None => Ok(core::ScenarioTable::winner2()),
    }
}

/// A validated cell: configuration plus resolved path-loss links.
///
/// `config` is a dict of configuration fields (missing keys take defaults);
/// `scenario_table` is an optional path to a TOML scenario table.
#[pyclass(name = "Cell", frozen)]
struct PyCell {
    inner: core::Cell,
}

#[pymethods]
impl PyCell {
    #[new]
    #[pyo3(signature = (config=None, scenario_table=None))]
    fn new(config: Option<&Bound<'_, PyAny>>, scenario_table: Option<&str>) -> PyResult<Self> {
        let cfg: core::CellConfig = match config {
            Some(c) => from_py(c)?,
            None => core::CellConfig::default(),
        };
        let inner = core::Cell::new(cfg, &table(scenario_table)?).map_err(err)?;
        Ok(PyCell { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, scenario_table=None))]
    fn from_toml(path: &str, scenario_table: Option<&str>) -> PyResult<Self> {
        let cfg = core::CellConfig::from_path(path).map_err(err)?;
        let inner = core::Cell::new(cfg, &table(scenario_table)?).map_err(err)?;
        Ok(PyCell { inner })
    }

    #[getter]
    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.cfg)
    }

    #[getter]
    fn regime(&self) -> String {
        self.inner.cfg.regime().to_string()
    }

    /// Per-position energies of one scheme at polar position (r, theta).
    #[pyo3(signature = (scheme, r, theta, direction="up", alpha="0"))]
    fn energy<'py>(
        &self,
        py: Python<'py>,
        scheme: &str,
        r: f64,
        theta: f64,
        direction: &str,
        alpha: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let e = self.inner.energy(
            parse::<SchemeId>(scheme)?,
            UserPosition::new(r, theta),
            parse::<Direction>(direction)?,
            parse::<Alpha>(alpha)?,
        );
        to_py(py, &e)
    }

    /// Characteristic distances and acceptance of a relayed scheme's REA.
    #[pyo3(signature = (scheme="fulldf", direction="up", alpha="0"))]
    fn rea<'py>(&self, py: Python<'py>, scheme: &str, direction: &str, alpha: &str) -> PyResult<Bound<'py, PyAny>> {
        let o = core::characteristic_distances(&self.inner, parse(direction)?, parse(scheme)?, parse(alpha)?)
            .map_err(err)?;
        to_py(py, &o)
    }

    /// Analytic cell-average energy report for an accepted configuration.
    #[pyo3(signature = (scheme="fulldf", direction="up", alpha="0", estimator=None))]
    fn energy_report<'py>(
        &self,
        py: Python<'py>,
        scheme: &str,
        direction: &str,
        alpha: &str,
        estimator: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let alpha: Alpha = parse(alpha)?;
        let est = match estimator {
            Some(e) => from_py(e)?,
            None => core::EstimatorOptions::default(),
        };
        let o = core::characteristic_distances(&self.inner, parse(direction)?, parse(scheme)?, alpha).map_err(err)?;
        let rep = py
            .detach(|| core::energy_report(&self.inner, &o, alpha, &est))
            .map_err(err)?;
        to_py(py, &rep)
    }

    /// Monte-Carlo user drops compared against the analytic model.
    #[pyo3(signature = (schemes=vec!["dtx".to_owned(), "fulldf".to_owned()], direction="up", samples=100_000, seed=1, alpha="0"))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        schemes: Vec<String>,
        direction: &str,
        samples: usize,
        seed: u64,
        alpha: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let set = schemes
            .iter()
            .map(|s| parse::<SchemeId>(s))
            .collect::<PyResult<Vec<_>>>()?;
        let opts = core::SimOptions {
            samples,
            seed,
            alpha: parse(alpha)?,
            ..core::SimOptions::default()
        };
        let dir = parse(direction)?;
        let res = py
            .detach(|| core::simulate(&self.inner, dir, &set, &opts))
            .map_err(err)?;
        to_py(py, &res)
    }

    fn __repr__(&self) -> String {
        let c = &self.inner.cfg;
        format!(
            "Cell(regime={}, relay_distance={}, relay_height={}, rate={})",
            c.regime(),
            c.relay_distance,
            c.relay_height,
            c.rate
        )
    }
}

/// Path loss in dB of a named scenario from the table.
#[pyfunction]
#[pyo3(signature = (scenario, d, h_tx, h_rx, fc=None, scenario_table=None))]
fn pathloss_db(
    scenario: &str,
    d: f64,
    h_tx: f64,
    h_rx: f64,
    fc: Option<f64>,
    scenario_table: Option<&str>,
) -> PyResult<f64> {
    let fc = fc.unwrap_or(core::CellConfig::default().carrier_ghz);
    let t = table(scenario_table)?;
    let s = t
        .scenario(scenario)
        .ok_or_else(|| PyValueError::new_err(format!("unknown scenario {scenario}")))?;
    core::pathloss_db(s, d, h_tx, h_rx, fc).map_err(err)
}

/// Run a parameter sweep. `spec` is a dict with the sweep-file fields or a
/// path to a TOML sweep file. Returns a list of row dicts holding the
/// spec's selected columns.
#[pyfunction]
#[pyo3(signature = (spec, scenario_table=None))]
fn sweep<'py>(py: Python<'py>, spec: &Bound<'py, PyAny>, scenario_table: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let spec: core::SweepSpec = match spec.extract::<String>() {
        Ok(path) => core::SweepSpec::from_path(path).map_err(err)?,
        Err(_) => from_py(spec)?,
    };
    spec.validate().map_err(err)?;
    let t = table(scenario_table)?;
    let rows = py.detach(|| core::run_sweep(&spec, &t)).map_err(err)?;
    let mut buf = Vec::new();
    core::sweep::write_columns(&rows, &spec.columns(), core::Format::Json, &mut buf).map_err(err)?;
    py.import("json")?
        .call_method1("loads", (String::from_utf8_lossy(&buf),))
}

#[pymodule]
#[pyo3(name = "relay_rea")]
fn relay_rea_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCell>()?;
    m.add_function(wrap_pyfunction!(pathloss_db, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
