//! Cell configuration: node heights, relay placement, power budgets and the
//! link conditions used to pick path-loss scenarios.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relay deployment regime, which selects the user-relay and relay-BS
/// path-loss scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Relay below rooftop.
    Vicinity,
    /// Relay above rooftop, with a free-space link to the base station.
    BsLike,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Vicinity => "vicinity",
            Regime::BsLike => "bs-like",
        })
    }
}

/// How the regime is chosen: from the relay height, or forced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeChoice {
    #[default]
    Auto,
    Vicinity,
    BsLike,
}

/// Geometry, power and propagation parameters of one relay-aided cell.
///
/// Heights and distances are in meters, powers in watts, the carrier in GHz
/// and the rate in bits/s/Hz. Defaults follow the usual urban macro setup:
/// 2.6 GHz, 30 m base station, 1.5 m user, 500 mW user and 1 W relay budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellConfig {
    pub bs_height: f64,
    pub relay_height: f64,
    pub user_height: f64,
    /// Distance between relay and base station.
    pub relay_distance: f64,
    pub p_user_max: f64,
    pub p_relay_max: f64,
    pub p_bs_max: f64,
    pub noise: f64,
    pub carrier_ghz: f64,
    pub rate: f64,
    pub direct_los: bool,
    pub user_relay_los: bool,
    pub relay_bs_los: bool,
    /// Relays at or below this height are treated as vicinity relays.
    pub regime_threshold: f64,
    pub regime: RegimeChoice,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            bs_height: 30.0,
            relay_height: 20.0,
            user_height: 1.5,
            relay_distance: 500.0,
            p_user_max: 0.5,
            p_relay_max: 1.0,
            p_bs_max: 0.5,
            noise: 5e-13,
            carrier_ghz: 2.6,
            rate: 3.0,
            direct_los: true,
            user_relay_los: true,
            relay_bs_los: true,
            regime_threshold: 20.0,
            regime: RegimeChoice::Auto,
        }
    }
}

impl CellConfig {
    pub fn regime(&self) -> Regime {
        match self.regime {
            RegimeChoice::Vicinity => Regime::Vicinity,
            RegimeChoice::BsLike => Regime::BsLike,
            RegimeChoice::Auto if self.relay_height <= self.regime_threshold => Regime::Vicinity,
            RegimeChoice::Auto => Regime::BsLike,
        }
    }

    /// Checks the parameter domains and rejects a LOS direct link paired with
    /// a NLOS user-relay link, a setup where relaying is never used.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("relay_distance", self.relay_distance),
            ("p_user_max", self.p_user_max),
            ("p_relay_max", self.p_relay_max),
            ("p_bs_max", self.p_bs_max),
            ("noise", self.noise),
            ("carrier_ghz", self.carrier_ghz),
            ("rate", self.rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let heights = [
            ("bs_height", self.bs_height),
            ("relay_height", self.relay_height),
            ("user_height", self.user_height),
        ];
        for (name, v) in heights {
            if !(v > 1.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must exceed 1 m, got {v}")));
            }
        }
        if self.direct_los && !self.user_relay_los {
            return Err(Error::Config(
                "a LOS direct link with a NLOS user-relay link is not a relaying configuration".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: CellConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<cell config>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: CellConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `2^R - 1`: the SNR needed for rate `R` over the whole block.
    #[inline]
    pub fn snr_full(&self) -> f64 {
        self.rate.exp2() - 1.0
    }

    /// `2^(2R) - 1`: the SNR needed for rate `2R` over half a block.
    #[inline]
    pub fn snr_half(&self) -> f64 {
        (2.0 * self.rate).exp2() - 1.0
    }
}
