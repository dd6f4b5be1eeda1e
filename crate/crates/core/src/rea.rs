//! Relay efficiency area: the characteristic distances bounding the set of
//! positions where a relayed scheme is used, and the membership predicate.
//!
//! The REA is the part of the sector right of the line `x = D_min` or
//! outside the DTx disk of radius `R_DTx`, intersected with the disk of
//! center `(X_max, 0)` and radius `R_max`.

use std::f64::consts::FRAC_PI_6;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cell::Cell;
use crate::error::{Error, Result};
use crate::geometry::{sector_contains, UserPosition};
use crate::numeric::{bisect_predicate, find_root, scan_bracket, Bracket};
use crate::schemes::{source_budget, Alpha, Direction, SchemeId};

const COS30: f64 = 0.866_025_403_784_438_6;

/// Scan resolution for boundary brackets, meters.
pub const SCAN_STEP: f64 = 1.0;
/// Width of refined energy and relaying boundaries, meters.
pub const ROOT_TOL: f64 = 1e-9;
/// Width of refined outage boundaries, meters.
pub const OUTAGE_TOL: f64 = 1e-4;
const OUTAGE_SCAN_STEP: f64 = 5.0;
const OUTAGE_SCAN_LIMIT: f64 = 100_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicDistances {
    /// Abscissa of the inner straight-line bound.
    pub d_min: f64,
    /// Radius of the DTx feasibility disk.
    pub r_dtx: f64,
    /// Center abscissa of the outer disk.
    pub x_max: f64,
    /// Radius of the outer disk.
    pub r_max: f64,
    /// Coverage radius of the hexagonal cell.
    pub r_cov: f64,
}

/// How the energy boundary along the relay axis was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Crossing,
    /// The relayed scheme is cheaper from the base station on.
    Everywhere,
    /// The relayed scheme is never cheaper on the searched segment.
    Nowhere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBoundary {
    pub distance: f64,
    pub kind: BoundaryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Rejection {
    /// The relay-to-destination or source-to-relay hop between the base
    /// station and the relay cannot be closed within budget.
    BackhaulOutage,
    /// The relayed coverage does not reach beyond the DTx disk.
    CoverageBelowDtx { r_cov: f64, r_dtx: f64 },
    /// The outer disk does not reach the sector edge.
    DegenerateOuterDisk { x_max: f64, r_max: f64 },
    /// The inner bound lies beyond the relay.
    InnerBoundBeyondRelay { d_min: f64, relay_distance: f64 },
    /// Part of the sector edge lies outside both the DTx disk and the outer
    /// disk, so some users of the cell are in outage.
    CoverageHole { from: f64, to: f64 },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::BackhaulOutage => f.write_str("base station to relay hop in outage"),
            Rejection::CoverageBelowDtx { r_cov, r_dtx } => {
                write!(f, "coverage radius {r_cov:.3} m below DTx radius {r_dtx:.3} m")
            }
            Rejection::DegenerateOuterDisk { x_max, r_max } => {
                write!(
                    f,
                    "outer disk (center {x_max:.3} m, radius {r_max:.3} m) misses the sector edge"
                )
            }
            Rejection::InnerBoundBeyondRelay { d_min, relay_distance } => {
                write!(f, "inner bound {d_min:.3} m beyond relay at {relay_distance:.3} m")
            }
            Rejection::CoverageHole { from, to } => {
                write!(f, "sector edge uncovered between {from:.3} m and {to:.3} m")
            }
        }
    }
}

/// Characteristic distances of one scheme and direction, with the rejection
/// reason when the relay position is not usable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReaOutcome {
    pub scheme: SchemeId,
    pub direction: Direction,
    pub alpha: Alpha,
    pub distances: CharacteristicDistances,
    /// Relaying-condition distance along the relay axis.
    pub d_rtx: f64,
    pub energy_boundary: Option<EnergyBoundary>,
    pub rejection: Option<Rejection>,
}

impl ReaOutcome {
    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }

    /// The distances of an accepted configuration, or a configuration error
    /// carrying the rejection reason.
    pub fn require(&self) -> Result<&CharacteristicDistances> {
        match &self.rejection {
            None => Ok(&self.distances),
            Some(r) => Err(Error::Config(format!(
                "{} {} relay at {} m rejected: {r}",
                self.scheme, self.direction, self.distances.x_max
            ))),
        }
    }
}

/// Radius of the disk where DTx is feasible.
pub fn r_dtx(cell: &Cell, dir: Direction) -> f64 {
    let d = &cell.links.direct;
    let p = source_budget(&cell.cfg, dir);
    (p / (d.k * cell.cfg.noise * cell.cfg.snr_full())).powf(10.0 / d.exponent)
}

/// Radius around the relay where the relay-user hop of Full-DF is feasible.
pub fn r_df_o(cell: &Cell, dir: Direction) -> f64 {
    let s = &cell.links.access;
    let p = match dir {
        Direction::Uplink => cell.cfg.p_user_max,
        Direction::Downlink => cell.cfg.p_relay_max,
    };
    (2.0 * p / (s.k * cell.cfg.noise * cell.cfg.snr_half())).powf(10.0 / s.exponent)
}

/// Relaying-condition residual along the relay axis, zero where the direct
/// and user-relay gains are equal.
pub fn relaying_condition(cell: &Cell, r: f64) -> f64 {
    let (d, s) = (&cell.links.direct, &cell.links.access);
    (d.k / s.k).powf(20.0 / s.exponent) * r.powf(2.0 * d.exponent / s.exponent) - (r - cell.relay_distance()).powi(2)
}

/// Closed form of the relaying-condition distance, valid for equal exponents.
pub fn d_rtx_closed_form(cell: &Cell) -> f64 {
    let (d, s) = (&cell.links.direct, &cell.links.access);
    cell.relay_distance() / ((d.k / s.k).powf(10.0 / s.exponent) + 1.0)
}

/// Distance on the relay axis where the direct and user-relay gains are
/// equal. Downlink relaying is always admissible, so it is 0 there.
pub fn d_rtx(cell: &Cell, dir: Direction) -> Result<f64> {
    if dir == Direction::Downlink {
        return Ok(0.0);
    }
    let dr = cell.relay_distance();
    let f = |r: f64| relaying_condition(cell, r);
    let bracket = scan_bracket(f, 0.0, dr, SCAN_STEP).ok_or_else(|| {
        Error::Config(format!(
            "relaying condition has no sign change on [0, {dr}] m: f(0) = {}, f(D_r) = {}",
            f(0.0),
            f(dr)
        ))
    })?;
    find_root(f, bracket, ROOT_TOL)
}

/// Energy gap `E_DTx - E_scheme` at distance `r` on the relay axis, using
/// budget-free energies.
pub fn energy_gap(cell: &Cell, dir: Direction, scheme: SchemeId, alpha: Alpha, r: f64) -> f64 {
    let u = UserPosition::new(r, 0.0);
    cell.energy(SchemeId::Dtx, u, dir, alpha).required() - cell.energy(scheme, u, dir, alpha).required()
}

fn search_limit(cell: &Cell, dir: Direction) -> f64 {
    cell.relay_distance() + r_df_o(cell, dir)
}

fn energy_boundary_scan(cell: &Cell, dir: Direction, scheme: SchemeId, alpha: Alpha) -> Result<EnergyBoundary> {
    let f = |r: f64| energy_gap(cell, dir, scheme, alpha, r);
    let limit = search_limit(cell, dir);
    if f(0.0) >= 0.0 {
        return Ok(EnergyBoundary {
            distance: 0.0,
            kind: BoundaryKind::Everywhere,
        });
    }
    match scan_bracket(f, 0.0, limit, SCAN_STEP) {
        Some(b) => Ok(EnergyBoundary {
            distance: find_root(f, b, ROOT_TOL)?,
            kind: BoundaryKind::Crossing,
        }),
        None => Ok(EnergyBoundary {
            distance: limit,
            kind: BoundaryKind::Nowhere,
        }),
    }
}

/// Distance on the relay axis beyond which Full-DF costs less than DTx.
///
/// Repetition coding never costs more than two-hop relaying, so its boundary
/// lies at or before the two-hop one; the search walks back from there.
pub fn d_df_e(cell: &Cell, dir: Direction, alpha: Alpha) -> Result<EnergyBoundary> {
    let two_hop = energy_boundary_scan(cell, dir, SchemeId::FullDf, Alpha::TwoHop)?;
    if alpha == Alpha::TwoHop || two_hop.kind == BoundaryKind::Everywhere {
        return Ok(two_hop);
    }
    let f = |r: f64| energy_gap(cell, dir, SchemeId::FullDf, alpha, r);
    let start = two_hop.distance;
    if f(start) < 0.0 {
        // Not expected; fall back to a full scan.
        return energy_boundary_scan(cell, dir, SchemeId::FullDf, alpha);
    }
    let mut hi = start;
    let mut f_hi = f(hi);
    loop {
        let lo = (hi - SCAN_STEP).max(0.0);
        let f_lo = f(lo);
        if f_lo < 0.0 {
            let b = Bracket { lo, hi, f_lo, f_hi };
            return Ok(EnergyBoundary {
                distance: find_root(f, b, ROOT_TOL)?,
                kind: BoundaryKind::Crossing,
            });
        }
        if lo == 0.0 {
            return Ok(EnergyBoundary {
                distance: 0.0,
                kind: BoundaryKind::Everywhere,
            });
        }
        hi = lo;
        f_hi = f_lo;
    }
}

/// Distance on the relay axis beyond which EO-PDF costs less than DTx.
pub fn d_eo_e(cell: &Cell, dir: Direction) -> Result<EnergyBoundary> {
    energy_boundary_scan(cell, dir, SchemeId::EoPdf, Alpha::TwoHop)
}

/// Center abscissa and radius of the circle centered on the x-axis through
/// `(r0, 0)` and `r1` along the sector edge.
pub fn outer_circle_fit(r0: f64, r1: f64) -> Result<(f64, f64)> {
    let den = 2.0 * (r0 - r1 * COS30);
    if den.abs() <= 1e-12 * r0.abs().max(r1.abs()).max(1.0) {
        return Err(Error::Numerical(format!(
            "boundary points r0 = {r0} m and r1 = {r1} m are collinear with the center axis"
        )));
    }
    let x = (r0 * r0 - r1 * r1) / den;
    Ok((x, r0 - x))
}

/// Largest hexagonal coverage radius inside the outer disk: the disk
/// reaches the hexagon vertex on the axis or meets the adjacent edge.
pub fn coverage_radius(x_max: f64, r_max: f64) -> Option<f64> {
    let edge = (4.0 * r_max * r_max - x_max * x_max) / 3.0;
    if edge < 0.0 {
        return None;
    }
    Some(x_max + r_max.min(edge.sqrt()))
}

/// Outermost point of the EO-PDF feasible set on the ray `theta`, searched
/// outwards from the point closest to the relay.
pub fn eo_outage_radius(cell: &Cell, dir: Direction, theta: f64) -> Result<f64> {
    let feasible = |r: f64| {
        cell.energy(SchemeId::EoPdf, UserPosition::new(r, theta), dir, Alpha::TwoHop)
            .feasible()
    };
    let start = cell.relay_distance() * theta.cos();
    if !feasible(start) {
        return Err(Error::Config(format!(
            "EO-PDF is in outage at the point closest to the relay on the ray at {theta} rad"
        )));
    }
    let mut inside = start;
    loop {
        let next = inside + OUTAGE_SCAN_STEP;
        if next - start > OUTAGE_SCAN_LIMIT {
            return Err(Error::Numerical("EO-PDF outage boundary not found".into()));
        }
        if !feasible(next) {
            return Ok(bisect_predicate(feasible, inside, next, OUTAGE_TOL));
        }
        inside = next;
    }
}

fn backhaul_ok(cell: &Cell, dir: Direction) -> bool {
    let p = cell.cfg.snr_half() * cell.cfg.noise / cell.links.backhaul.gain(cell.relay_distance());
    let budget = match dir {
        Direction::Uplink => cell.cfg.p_relay_max,
        Direction::Downlink => cell.cfg.p_bs_max,
    };
    0.5 * p <= budget
}

/// Characteristic distances of a relayed scheme, with the rejection rules
/// applied. `alpha` only matters for Full-DF.
pub fn characteristic_distances(cell: &Cell, dir: Direction, scheme: SchemeId, alpha: Alpha) -> Result<ReaOutcome> {
    let r_dtx = r_dtx(cell, dir);
    let d_rtx = d_rtx(cell, dir)?;
    let dr = cell.relay_distance();
    let mut outcome = ReaOutcome {
        scheme,
        direction: dir,
        alpha,
        distances: CharacteristicDistances {
            d_min: d_rtx,
            r_dtx,
            x_max: dr,
            r_max: 0.0,
            r_cov: r_dtx,
        },
        d_rtx,
        energy_boundary: None,
        rejection: None,
    };
    match scheme {
        SchemeId::Dtx => {
            return Err(Error::Config("DTx has no relay efficiency area".into()));
        }
        SchemeId::FullDf => {
            if !backhaul_ok(cell, dir) {
                outcome.rejection = Some(Rejection::BackhaulOutage);
                return Ok(outcome);
            }
            let e = d_df_e(cell, dir, alpha)?;
            outcome.energy_boundary = Some(e);
            outcome.distances.d_min = d_rtx.max(e.distance);
            outcome.distances.r_max = r_df_o(cell, dir);
        }
        SchemeId::EoPdf => {
            let at_relay = UserPosition::new(dr, 0.0);
            if !cell.energy(SchemeId::EoPdf, at_relay, dir, Alpha::TwoHop).feasible() {
                outcome.rejection = Some(Rejection::BackhaulOutage);
                return Ok(outcome);
            }
            if dir == Direction::Downlink {
                let e = d_eo_e(cell, dir)?;
                outcome.energy_boundary = Some(e);
                outcome.distances.d_min = e.distance;
            }
            let r0 = eo_outage_radius(cell, dir, 0.0)?;
            let r1 = match eo_outage_radius(cell, dir, FRAC_PI_6) {
                Ok(r1) => r1,
                Err(e) if e.is_config() => {
                    outcome.distances.r_max = r0 - dr;
                    outcome.rejection = Some(Rejection::DegenerateOuterDisk {
                        x_max: dr,
                        r_max: r0 - dr,
                    });
                    return Ok(outcome);
                }
                Err(e) => return Err(e),
            };
            let (x, r) = outer_circle_fit(r0, r1)?;
            outcome.distances.x_max = x;
            outcome.distances.r_max = r;
        }
    }
    let cd = &mut outcome.distances;
    match coverage_radius(cd.x_max, cd.r_max) {
        None => {
            outcome.rejection = Some(Rejection::DegenerateOuterDisk {
                x_max: cd.x_max,
                r_max: cd.r_max,
            });
        }
        Some(r_cov) => {
            cd.r_cov = r_cov;
            if r_cov < cd.r_dtx {
                outcome.rejection = Some(Rejection::CoverageBelowDtx { r_cov, r_dtx: cd.r_dtx });
            } else if cd.d_min > dr {
                outcome.rejection = Some(Rejection::InnerBoundBeyondRelay {
                    d_min: cd.d_min,
                    relay_distance: dr,
                });
            } else if let Some((from, to)) = edge_gap(cd) {
                outcome.rejection = Some(Rejection::CoverageHole { from, to });
            }
        }
    }
    Ok(outcome)
}

/// Uncovered stretch of the sector edge at `θ = π/6`, as distances from the
/// base station. Rays at smaller angles enter the outer disk earlier, so the
/// edge is the worst case.
pub fn edge_gap(cd: &CharacteristicDistances) -> Option<(f64, f64)> {
    let corner = cd.r_cov * COS30;
    let half = 0.5 * cd.x_max;
    let disc = cd.r_max * cd.r_max - half * half;
    let entry = if disc >= 0.0 {
        cd.x_max * COS30 - disc.sqrt()
    } else {
        f64::INFINITY
    };
    let to = entry.min(corner);
    (cd.r_dtx < to).then_some((cd.r_dtx, to))
}

/// Literal REA membership: right of the inner line or outside the DTx disk,
/// inside the outer disk and inside the sector.
pub fn rea_contains(cd: &CharacteristicDistances, user: UserPosition) -> bool {
    let (x, y) = (user.x(), user.y());
    let inner = x >= cd.d_min || user.r > cd.r_dtx;
    let dx = x - cd.x_max;
    inner && dx * dx + y * y <= cd.r_max * cd.r_max && sector_contains(user, cd.r_cov)
}
