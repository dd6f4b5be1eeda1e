//! `relay-rea`: characteristic distances, cell averages, Monte-Carlo
//! validation and parameter sweeps from the command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use relay_rea::metrics::energy_report;
use relay_rea::rea::characteristic_distances;
use relay_rea::sweep::write_columns;
use relay_rea::{
    run_sweep, simulate, Alpha, Cell, CellConfig, Direction, Error, EstimatorOptions, Format, ScenarioTable, SchemeId,
    SimOptions, SweepParameter, SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "relay-rea",
    version,
    about = "Relay efficiency area model for relay-aided cells"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Cell configuration (TOML). Defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Path-loss scenario table (TOML). Defaults to the bundled WINNER II table.
    #[arg(long, global = true)]
    scenario_table: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Dir::Up)]
    direction: Dir,
    #[arg(long, global = true, value_enum, default_value_t = SchemeArg::All)]
    scheme: SchemeArg,
    /// Full-DF destination combining: 0 two-hop, 1 repetition.
    #[arg(long, global = true, default_value = "0")]
    alpha: Alpha,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Monte-Carlo user drops.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the characteristic distances of each relayed scheme.
    Rea,
    /// Cell-averaged energies and relaying probability.
    Metrics,
    /// Monte-Carlo validation of the REA model.
    Simulate,
    /// Parameter sweep, from a spec file or from flags.
    Sweep(SweepArgs),
    /// Check the configuration and scenario table.
    ValidateConfig,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep spec (TOML); overrides the flags below and `--config`.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "relay-distance")]
    param: SweepParameter,
    #[arg(long, default_value_t = 100.0)]
    start: f64,
    #[arg(long, default_value_t = 1500.0)]
    stop: f64,
    #[arg(long, default_value_t = 25.0)]
    step: f64,
    /// Coverage extension when not sweeping beta.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Comma-separated metric columns to emit (default all).
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Up,
    Down,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Dtx,
    Fulldf,
    Eopdf,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl Common {
    fn direction(&self) -> Direction {
        match self.direction {
            Dir::Up => Direction::Uplink,
            Dir::Down => Direction::Downlink,
        }
    }

    /// Scheme set competing at each position.
    fn set(&self) -> Vec<SchemeId> {
        match self.scheme {
            SchemeArg::Dtx => vec![SchemeId::Dtx],
            SchemeArg::Fulldf => vec![SchemeId::Dtx, SchemeId::FullDf],
            SchemeArg::Eopdf => vec![SchemeId::Dtx, SchemeId::EoPdf],
            SchemeArg::All => SchemeId::ALL.to_vec(),
        }
    }

    fn relayed(&self) -> Vec<SchemeId> {
        self.set().into_iter().filter(|s| s.is_relayed()).collect()
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    fn estimator(&self) -> EstimatorOptions {
        EstimatorOptions {
            seed: self.seed,
            ..EstimatorOptions::default()
        }
    }

    fn table(&self) -> relay_rea::Result<ScenarioTable> {
        match &self.scenario_table {
            Some(p) => ScenarioTable::from_path(p),
            None => Ok(ScenarioTable::winner2()),
        }
    }

    fn cell_config(&self) -> relay_rea::Result<CellConfig> {
        match &self.config {
            Some(p) => CellConfig::from_path(p),
            None => Ok(CellConfig::default()),
        }
    }

    fn cell(&self) -> relay_rea::Result<Cell> {
        let table = self.table()?;
        Cell::new(self.cell_config()?, &table)
    }
}

#[derive(Serialize)]
struct ReaRow {
    scheme: SchemeId,
    direction: Direction,
    alpha: Alpha,
    accepted: bool,
    reason: String,
    #[serde(rename = "d_min_m")]
    d_min: f64,
    #[serde(rename = "r_dtx_m")]
    r_dtx: f64,
    #[serde(rename = "x_max_m")]
    x_max: f64,
    #[serde(rename = "r_max_m")]
    r_max: f64,
    #[serde(rename = "r_cov_m")]
    r_cov: f64,
    #[serde(rename = "d_rtx_m")]
    d_rtx: f64,
    #[serde(rename = "energy_boundary_m")]
    energy_boundary: Option<f64>,
}

#[derive(Serialize)]
struct MetricsRow {
    scheme: SchemeId,
    direction: Direction,
    alpha: Alpha,
    accepted: bool,
    reason: String,
    #[serde(rename = "r_cov_m")]
    r_cov: Option<f64>,
    p_rtx: Option<f64>,
    #[serde(rename = "e_dtx_avg_j")]
    e_dtx_avg: Option<f64>,
    #[serde(rename = "e_user_avg_j")]
    e_user_avg: Option<f64>,
    #[serde(rename = "e_relay_avg_j")]
    e_relay_avg: Option<f64>,
    #[serde(rename = "e_bs_avg_j")]
    e_bs_avg: Option<f64>,
    #[serde(rename = "e_avg_j")]
    e_total_avg: Option<f64>,
    #[serde(rename = "e_per_area_j_m2")]
    e_per_area: Option<f64>,
    cost_ratio: Option<f64>,
    method: Option<String>,
    rel_se: Option<f64>,
}

#[derive(Serialize)]
struct SimRow {
    scheme: SchemeId,
    direction: Direction,
    n_samples: usize,
    seed: u64,
    #[serde(rename = "r_cov_m")]
    r_cov: f64,
    p_rtx_hat: f64,
    p_rtx_se: f64,
    p_rtx_model: f64,
    #[serde(rename = "e_avg_hat_j")]
    e_total_hat: f64,
    #[serde(rename = "e_avg_se_j")]
    e_total_se: f64,
    #[serde(rename = "e_avg_model_j")]
    e_total_model: f64,
    energy_model_error: f64,
    decision_mismatch_rate: f64,
    mismatch_near_line: f64,
    outage_rate: f64,
}

fn rea_rows(c: &Common) -> relay_rea::Result<Vec<ReaRow>> {
    let cell = c.cell()?;
    let dir = c.direction();
    c.relayed()
        .into_iter()
        .map(|s| {
            let o = characteristic_distances(&cell, dir, s, c.alpha)?;
            let d = o.distances;
            Ok(ReaRow {
                scheme: s,
                direction: dir,
                alpha: c.alpha,
                accepted: o.accepted(),
                reason: o.rejection.map(|r| r.to_string()).unwrap_or_default(),
                d_min: d.d_min,
                r_dtx: d.r_dtx,
                x_max: d.x_max,
                r_max: d.r_max,
                r_cov: d.r_cov,
                d_rtx: o.d_rtx,
                energy_boundary: o.energy_boundary.map(|e| e.distance),
            })
        })
        .collect()
}

fn metrics_rows(c: &Common) -> relay_rea::Result<Vec<MetricsRow>> {
    let cell = c.cell()?;
    let dir = c.direction();
    let opts = c.estimator();
    c.relayed()
        .into_iter()
        .map(|s| {
            let o = characteristic_distances(&cell, dir, s, c.alpha)?;
            let mut row = MetricsRow {
                scheme: s,
                direction: dir,
                alpha: c.alpha,
                accepted: o.accepted(),
                reason: o.rejection.map(|r| r.to_string()).unwrap_or_default(),
                r_cov: None,
                p_rtx: None,
                e_dtx_avg: None,
                e_user_avg: None,
                e_relay_avg: None,
                e_bs_avg: None,
                e_total_avg: None,
                e_per_area: None,
                cost_ratio: None,
                method: None,
                rel_se: None,
            };
            if o.accepted() {
                let r = energy_report(&cell, &o, c.alpha, &opts)?;
                row.r_cov = Some(o.distances.r_cov);
                row.p_rtx = Some(r.p_rtx);
                row.e_dtx_avg = Some(r.e_dtx_avg);
                row.e_user_avg = Some(r.e_user_avg);
                row.e_relay_avg = Some(r.e_relay_avg);
                row.e_bs_avg = Some(r.e_bs_avg);
                row.e_total_avg = Some(r.e_total_avg);
                row.e_per_area = Some(r.e_per_area);
                row.cost_ratio = Some(r.cost_ratio);
                row.method = Some(serde_json::to_value(r.method)?.as_str().unwrap_or_default().to_owned());
                row.rel_se = Some(r.rel_se);
            }
            Ok(row)
        })
        .collect()
}

fn sim_rows(c: &Common) -> relay_rea::Result<Vec<SimRow>> {
    let cell = c.cell()?;
    let opts = SimOptions {
        samples: c.samples,
        seed: c.seed,
        alpha: c.alpha,
        estimator: c.estimator(),
        ..SimOptions::default()
    };
    let r = simulate(&cell, c.direction(), &c.set(), &opts)?;
    Ok(vec![SimRow {
        scheme: r.scheme,
        direction: r.direction,
        n_samples: r.n_samples,
        seed: c.seed,
        r_cov: r.r_cov,
        p_rtx_hat: r.p_rtx_hat.value,
        p_rtx_se: r.p_rtx_hat.se,
        p_rtx_model: r.p_rtx_model,
        e_total_hat: r.e_total_hat.value,
        e_total_se: r.e_total_hat.se,
        e_total_model: r.e_total_model,
        energy_model_error: r.energy_model_error,
        decision_mismatch_rate: r.decision_mismatch_rate,
        mismatch_near_line: r.mismatch_near_line,
        outage_rate: r.outage_rate,
    }])
}

fn sweep_spec(c: &Common, a: &SweepArgs) -> relay_rea::Result<SweepSpec> {
    if let Some(p) = &a.spec {
        return SweepSpec::from_path(p);
    }
    let spec = SweepSpec {
        parameter: a.param,
        start: a.start,
        stop: a.stop,
        step: a.step,
        cell: c.cell_config()?,
        schemes: c.relayed(),
        direction: c.direction(),
        alpha: c.alpha,
        beta: a.beta,
        estimator: c.estimator(),
        metrics: a.metrics.clone(),
    };
    spec.validate()?;
    Ok(spec)
}

/// Serializes `rows` as CSV with a header, or as a JSON array.
fn write_rows<T: Serialize, W: Write>(rows: &[T], format: Format, out: W) -> relay_rea::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| Error::Csv(e.into()))?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n").map_err(|e| Error::Csv(e.into()))?;
        }
    }
    Ok(())
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> relay_rea::Result<()>) -> Result<(), String> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w).map_err(|e| format!("writing {}: {e}", p.display()))?;
            w.flush().map_err(|e| format!("writing {}: {e}", p.display()))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| e.to_string())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), (u8, String)> {
    let c = &cli.common;
    let fail = |e: Error| (exit_code(&e), e.to_string());
    let out = c.out.as_deref();
    let format = c.format();
    let emitted = match &cli.command {
        Command::Rea => {
            let rows = rea_rows(c).map_err(fail)?;
            with_output(out, |w| write_rows(&rows, format, w))
        }
        Command::Metrics => {
            let rows = metrics_rows(c).map_err(fail)?;
            with_output(out, |w| write_rows(&rows, format, w))
        }
        Command::Simulate => {
            let rows = sim_rows(c).map_err(fail)?;
            with_output(out, |w| write_rows(&rows, format, w))
        }
        Command::Sweep(a) => {
            let spec = sweep_spec(c, a).map_err(fail)?;
            let table = c.table().map_err(fail)?;
            let rows = run_sweep(&spec, &table).map_err(fail)?;
            with_output(out, |w| write_columns(&rows, &spec.columns(), format, w))
        }
        Command::ValidateConfig => {
            let cell = c.cell().map_err(fail)?;
            let cfg = &cell.cfg;
            with_output(out, |w| {
                writeln!(
                    w,
                    "ok: {} relay at {} m, height {} m, rate {} bit/s/Hz",
                    cfg.regime(),
                    cfg.relay_distance,
                    cfg.relay_height,
                    cfg.rate
                )
                .map_err(|e| Error::Csv(e.into()))
            })
        }
    };
    emitted.map_err(|m| (1, m))
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
