//! Single-slope WINNER II style path loss and the link-gain dispatch between
//! the direct, user-relay and relay-BS links.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{CellConfig, Regime};
use crate::error::{Error, Result};
use crate::geometry::{user_relay_distance, UserPosition};

/// Shortest link distance fed to the path-loss model, in meters.
pub const MIN_LINK_DISTANCE: f64 = 1.0;

const DEFAULT_TABLE: &str = include_str!("../data/winner2_scenarios.toml");

/// Constants of one path-loss scenario, in the dB domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossScenario {
    pub name: String,
    /// Distance coefficient, dB per decade.
    pub a: f64,
    /// Offset, dB.
    pub b: f64,
    /// Carrier-frequency coefficient, dB per decade of `fc / 5 GHz`.
    pub c: f64,
    /// Antenna-height coefficient, dB per decade of `(h_tx - 1)(h_rx - 1)`.
    pub d: f64,
    pub los: bool,
    /// Extra distance coefficient per decade of the higher antenna height.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub a_height: f64,
    /// Extra offset per decade of the higher antenna height.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub b_height: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// A scenario evaluated for fixed antenna heights and carrier: the gain is
/// `1 / (k * d^(exponent / 10))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedLink {
    /// Distance coefficient `A` in dB per decade.
    pub exponent: f64,
    /// Linear distance-independent loss factor `K`.
    pub k: f64,
}

impl ResolvedLink {
    /// Linear power gain at distance `d` (clamped to [`MIN_LINK_DISTANCE`]).
    #[inline]
    pub fn gain(&self, d: f64) -> f64 {
        let d = d.max(MIN_LINK_DISTANCE);
        1.0 / (self.k * d.powf(self.exponent / 10.0))
    }

    /// `k * d^(A/10)`, i.e. the inverse gain, without distance clamping.
    #[inline]
    pub fn loss(&self, d: f64) -> f64 {
        self.k * d.powf(self.exponent / 10.0)
    }
}

impl PathLossScenario {
    fn check_heights(h_tx: f64, h_rx: f64) -> Result<()> {
        if !(h_tx > 1.0 && h_rx > 1.0) {
            return Err(Error::Domain(format!(
                "antenna heights must exceed 1 m, got {h_tx} m and {h_rx} m"
            )));
        }
        Ok(())
    }

    fn coefficients(&self, h_tx: f64, h_rx: f64) -> Result<(f64, f64)> {
        Self::check_heights(h_tx, h_rx)?;
        let h = h_tx.max(h_rx).log10();
        let a = self.a + self.a_height * h;
        let b = self.b + self.b_height * h;
        if !(a > 0.0) {
            return Err(Error::Domain(format!(
                "scenario {} has non-positive distance coefficient {a}",
                self.name
            )));
        }
        Ok((a, b))
    }

    /// Resolves the scenario into the `(A, K)` form for the given heights and carrier.
    pub fn resolve(&self, h_tx: f64, h_rx: f64, fc: f64) -> Result<ResolvedLink> {
        if !(fc > 0.0) {
            return Err(Error::Domain(format!("carrier frequency must be positive, got {fc}")));
        }
        let (a, b) = self.coefficients(h_tx, h_rx)?;
        let k =
            10f64.powf(b / 10.0) * (fc / 5.0).powf(self.c / 10.0) * ((h_tx - 1.0) * (h_rx - 1.0)).powf(self.d / 10.0);
        Ok(ResolvedLink { exponent: a, k })
    }
}

/// Path loss in dB at distance `d` (m) between antennas at `h_tx`, `h_rx` (m)
/// on carrier `fc` (GHz).
pub fn pathloss_db(scenario: &PathLossScenario, d: f64, h_tx: f64, h_rx: f64, fc: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("link distance must be positive, got {d}")));
    }
    if !(fc > 0.0) {
        return Err(Error::Domain(format!("carrier frequency must be positive, got {fc}")));
    }
    let (a, b) = scenario.coefficients(h_tx, h_rx)?;
    Ok(a * d.log10() + b + scenario.c * (fc / 5.0).log10() + scenario.d * ((h_tx - 1.0) * (h_rx - 1.0)).log10())
}

/// Linear power gain `|h|^2 = 10^(-PL/10)`.
pub fn gain_linear(scenario: &PathLossScenario, d: f64, h_tx: f64, h_rx: f64, fc: f64) -> Result<f64> {
    Ok(10f64.powf(-pathloss_db(scenario, d, h_tx, h_rx, fc)? / 10.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkRole {
    Direct,
    UserRelay,
    RelayBs,
}

impl fmt::Display for LinkRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkRole::Direct => "direct",
            LinkRole::UserRelay => "user-relay",
            LinkRole::RelayBs => "relay-bs",
        })
    }
}

/// Linear power gains of the three links seen from one user position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    /// User to base station.
    pub gd: f64,
    /// User to relay.
    pub gs: f64,
    /// Relay to base station.
    pub gr: f64,
}

#[derive(Debug, Deserialize)]
struct TableFile {
    scenario: Vec<PathLossScenario>,
    assignment: Vec<AssignmentRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AssignmentRecord {
    link: LinkRole,
    regime: Regime,
    los: bool,
    scenario: String,
}

type AssignmentKey = (LinkRole, Regime, bool);

/// Scenario assignment for every link role, relay regime and LOS state.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTable {
    scenarios: BTreeMap<String, PathLossScenario>,
    assignments: BTreeMap<AssignmentKey, String>,
}

/// Combinations every table must resolve (vicinity and base-station-like relays).
pub const REQUIRED_ASSIGNMENTS: [AssignmentKey; 10] = [
    (LinkRole::UserRelay, Regime::Vicinity, true),
    (LinkRole::UserRelay, Regime::Vicinity, false),
    (LinkRole::UserRelay, Regime::BsLike, true),
    (LinkRole::UserRelay, Regime::BsLike, false),
    (LinkRole::RelayBs, Regime::Vicinity, true),
    (LinkRole::RelayBs, Regime::BsLike, true),
    (LinkRole::Direct, Regime::Vicinity, true),
    (LinkRole::Direct, Regime::Vicinity, false),
    (LinkRole::Direct, Regime::BsLike, true),
    (LinkRole::Direct, Regime::BsLike, false),
];

impl ScenarioTable {
    /// The bundled WINNER II table.
    pub fn winner2() -> Self {
        Self::from_toml_str(DEFAULT_TABLE).expect("bundled scenario table is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: TableFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<scenario table>".into(),
            message: e.to_string(),
        })?;
        Self::build(file)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: TableFile = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::build(file)
    }

    fn build(file: TableFile) -> Result<Self> {
        let mut scenarios = BTreeMap::new();
        for s in file.scenario {
            if !(s.a > 0.0) {
                return Err(Error::Config(format!(
                    "scenario {} must have a positive distance coefficient",
                    s.name
                )));
            }
            if let Some(prev) = scenarios.insert(s.name.clone(), s) {
                return Err(Error::Config(format!("duplicate scenario name {}", prev.name)));
            }
        }
        let mut assignments = BTreeMap::new();
        for rec in file.assignment {
            if !scenarios.contains_key(&rec.scenario) {
                return Err(Error::Config(format!(
                    "assignment {} / {} / {} refers to unknown scenario {}",
                    rec.link,
                    rec.regime,
                    los_label(rec.los),
                    rec.scenario
                )));
            }
            let key = (rec.link, rec.regime, rec.los);
            if assignments.insert(key, rec.scenario).is_some() {
                return Err(Error::Config(format!(
                    "duplicate assignment for {} / {} / {}",
                    rec.link,
                    rec.regime,
                    los_label(rec.los)
                )));
            }
        }
        let table = ScenarioTable { scenarios, assignments };
        let missing: Vec<String> = REQUIRED_ASSIGNMENTS
            .iter()
            .filter(|k| !table.assignments.contains_key(k))
            .map(|(l, r, los)| format!("{l} / {r} / {}", los_label(*los)))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "scenario table lacks assignments for: {}",
                missing.join(", ")
            )));
        }
        Ok(table)
    }

    pub fn scenario(&self, name: &str) -> Option<&PathLossScenario> {
        self.scenarios.get(name)
    }

    pub fn scenarios(&self) -> impl Iterator<Item = &PathLossScenario> {
        self.scenarios.values()
    }

    /// Scenario serving `link` for the given regime and LOS state.
    pub fn lookup(&self, link: LinkRole, regime: Regime, los: bool) -> Result<&PathLossScenario> {
        self.assignments
            .get(&(link, regime, los))
            .and_then(|name| self.scenarios.get(name))
            .ok_or_else(|| {
                Error::Config(format!(
                    "no scenario assigned to the {link} link for a {regime} relay under {}",
                    los_label(los)
                ))
            })
    }
}

fn los_label(los: bool) -> &'static str {
    if los {
        "LOS"
    } else {
        "NLOS"
    }
}

/// The three links of a cell configuration, resolved once for repeated
/// evaluation at many user positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLinks {
    pub direct: ResolvedLink,
    pub access: ResolvedLink,
    pub backhaul: ResolvedLink,
    pub relay_distance: f64,
}

impl CellLinks {
    pub fn new(cfg: &CellConfig, table: &ScenarioTable) -> Result<Self> {
        let regime = cfg.regime();
        let fc = cfg.carrier_ghz;
        let direct =
            table
                .lookup(LinkRole::Direct, regime, cfg.direct_los)?
                .resolve(cfg.bs_height, cfg.user_height, fc)?;
        let access = table.lookup(LinkRole::UserRelay, regime, cfg.user_relay_los)?.resolve(
            cfg.relay_height,
            cfg.user_height,
            fc,
        )?;
        let backhaul =
            table
                .lookup(LinkRole::RelayBs, regime, cfg.relay_bs_los)?
                .resolve(cfg.bs_height, cfg.relay_height, fc)?;
        Ok(CellLinks {
            direct,
            access,
            backhaul,
            relay_distance: cfg.relay_distance,
        })
    }

    #[inline]
    pub fn gains(&self, user: UserPosition) -> LinkGains {
        LinkGains {
            gd: self.direct.gain(user.r),
            gs: self.access.gain(user_relay_distance(user, self.relay_distance)),
            gr: self.backhaul.gain(self.relay_distance),
        }
    }
}

/// Link gains at `user` for the configuration and scenario table.
pub fn link_gains(cfg: &CellConfig, user: UserPosition, table: &ScenarioTable) -> Result<LinkGains> {
    Ok(CellLinks::new(cfg, table)?.gains(user))
}
