//! A validated cell configuration with its links resolved, the entry point for
//! per-position evaluation.

use crate::config::CellConfig;
use crate::error::Result;
use crate::geometry::UserPosition;
use crate::pathloss::{CellLinks, LinkGains, ScenarioTable};
use crate::schemes::{self, Alpha, Direction, SchemeEnergy, SchemeId};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub cfg: CellConfig,
    pub links: CellLinks,
}

impl Cell {
    pub fn new(cfg: CellConfig, table: &ScenarioTable) -> Result<Self> {
        cfg.validate()?;
        let links = CellLinks::new(&cfg, table)?;
        Ok(Cell { cfg, links })
    }

    pub fn relay_distance(&self) -> f64 {
        self.cfg.relay_distance
    }

    #[inline]
    pub fn gains(&self, user: UserPosition) -> LinkGains {
        self.links.gains(user)
    }

    pub fn energy(&self, scheme: SchemeId, user: UserPosition, dir: Direction, alpha: Alpha) -> SchemeEnergy {
        let g = self.gains(user);
        match scheme {
            SchemeId::Dtx => schemes::dtx_energy(&g, &self.cfg, dir),
            SchemeId::FullDf => schemes::fulldf_energy(&g, &self.cfg, dir, alpha),
            SchemeId::EoPdf => schemes::eopdf_energy(&g, &self.cfg, dir),
        }
    }

    pub fn best(
        &self,
        user: UserPosition,
        dir: Direction,
        set: &[SchemeId],
        alpha: Alpha,
    ) -> Option<(SchemeId, SchemeEnergy)> {
        schemes::best_scheme(&self.gains(user), &self.cfg, dir, set, alpha)
    }
}
