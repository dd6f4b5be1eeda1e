//! Per-position transmit energies of direct transmission (DTx), full
//! decode-forward (Full-DF) and energy-optimized partial decode-forward
//! (EO-PDF), in uplink and downlink.
//!
//! Energies are per channel use with unit block length: a node that transmits
//! with power `P` during half of the block spends `P / 2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::CellConfig;
use crate::numeric::{bisect_predicate, golden_min};
use crate::pathloss::LinkGains;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Uplink => "uplink",
            Direction::Downlink => "downlink",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "up" | "uplink" => Ok(Direction::Uplink),
            "down" | "downlink" => Ok(Direction::Downlink),
            _ => Err(format!("unknown direction {s:?} (expected up or down)")),
        }
    }
}

/// Full-DF flavour: two-hop (`alpha = 0`, the destination ignores the first
/// phase) or repetition coding (`alpha = 1`, both phases are combined).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alpha {
    #[default]
    TwoHop,
    Repetition,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::TwoHop => 0.0,
            Alpha::Repetition => 1.0,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value() as u8)
    }
}

impl FromStr for Alpha {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "0" | "two-hop" => Ok(Alpha::TwoHop),
            "1" | "repetition" => Ok(Alpha::Repetition),
            _ => Err(format!("alpha must be 0 or 1, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeId {
    Dtx,
    FullDf,
    EoPdf,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::Dtx, SchemeId::FullDf, SchemeId::EoPdf];

    pub fn is_relayed(self) -> bool {
        self != SchemeId::Dtx
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeId::Dtx => "dtx",
            SchemeId::FullDf => "fulldf",
            SchemeId::EoPdf => "eopdf",
        })
    }
}

impl FromStr for SchemeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dtx" => Ok(SchemeId::Dtx),
            "fulldf" | "full-df" => Ok(SchemeId::FullDf),
            "eopdf" | "eo-pdf" => Ok(SchemeId::EoPdf),
            _ => Err(format!("unknown scheme {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Feasible,
    /// The required powers exceed a budget.
    Outage,
    /// The optimizer could not certify a solution.
    NumericalFailure,
}

/// Power allocation behind a [`SchemeEnergy`]. Powers are in watts and
/// refer to the source of the direction (user in uplink, base station in
/// downlink) unless named after the relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Allocation {
    Direct {
        power: f64,
    },
    FullDf {
        /// Source power during the first half block.
        p_source: f64,
        /// Relay power during the second half block.
        p_relay: f64,
        /// The destination already decodes from the first phase (`alpha = 1`).
        relay_idle: bool,
    },
    EoPdf {
        /// Rate of the part decoded and forwarded by the relay.
        rate_relayed: f64,
        /// Rate of the part sent directly in the second phase.
        rate_direct: f64,
        p1: f64,
        p2: f64,
        p3: f64,
        p_relay: f64,
        sub_scheme: u8,
    },
}

/// Transmit energies of one scheme at one user position. When the status is
/// not [`Status::Feasible`] the energies are those the scheme would need
/// without power budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeEnergy {
    pub scheme: SchemeId,
    pub status: Status,
    pub e_user: f64,
    pub e_relay: f64,
    pub e_bs: f64,
    pub allocation: Allocation,
}

impl SchemeEnergy {
    pub fn feasible(&self) -> bool {
        self.status == Status::Feasible
    }

    /// Total energy needed, ignoring budgets.
    pub fn required(&self) -> f64 {
        self.e_user + self.e_relay + self.e_bs
    }

    /// Total energy if the scheme is feasible.
    pub fn total(&self) -> Option<f64> {
        self.feasible().then(|| self.required())
    }

    fn with_source(
        scheme: SchemeId,
        dir: Direction,
        status: Status,
        source: f64,
        relay: f64,
        allocation: Allocation,
    ) -> Self {
        let (e_user, e_bs) = match dir {
            Direction::Uplink => (source, 0.0),
            Direction::Downlink => (0.0, source),
        };
        SchemeEnergy {
            scheme,
            status,
            e_user,
            e_relay: relay,
            e_bs,
            allocation,
        }
    }
}

/// Power budget of the transmitting end of the direct link.
pub fn source_budget(cfg: &CellConfig, dir: Direction) -> f64 {
    match dir {
        Direction::Uplink => cfg.p_user_max,
        Direction::Downlink => cfg.p_bs_max,
    }
}

/// Gains of the first and second relayed hop: `(source -> relay, relay -> destination)`.
#[inline]
pub fn hop_gains(gains: &LinkGains, dir: Direction) -> (f64, f64) {
    match dir {
        Direction::Uplink => (gains.gs, gains.gr),
        Direction::Downlink => (gains.gr, gains.gs),
    }
}

pub fn dtx_energy(gains: &LinkGains, cfg: &CellConfig, dir: Direction) -> SchemeEnergy {
    let power = cfg.snr_full() * cfg.noise / gains.gd;
    let status = if power <= source_budget(cfg, dir) {
        Status::Feasible
    } else {
        Status::Outage
    };
    SchemeEnergy::with_source(SchemeId::Dtx, dir, status, power, 0.0, Allocation::Direct { power })
}

pub fn fulldf_energy(gains: &LinkGains, cfg: &CellConfig, dir: Direction, alpha: Alpha) -> SchemeEnergy {
    let (g1, g2) = hop_gains(gains, dir);
    let snr = cfg.snr_half();
    let p_source = snr * cfg.noise / g1;
    let residual = 1.0 - alpha.value() * gains.gd / g1;
    let relay_idle = residual <= 0.0;
    let p_relay = if relay_idle {
        0.0
    } else {
        snr * residual * cfg.noise / g2
    };
    let status = if 0.5 * p_source <= source_budget(cfg, dir) && 0.5 * p_relay <= cfg.p_relay_max {
        Status::Feasible
    } else {
        Status::Outage
    };
    SchemeEnergy::with_source(
        SchemeId::FullDf,
        dir,
        status,
        0.5 * p_source,
        0.5 * p_relay,
        Allocation::FullDf {
            p_source,
            p_relay,
            relay_idle,
        },
    )
}

pub fn eopdf_energy(gains: &LinkGains, cfg: &CellConfig, dir: Direction) -> SchemeEnergy {
    let (g_sr, g_rd) = hop_gains(gains, dir);
    let problem = PdfProblem {
        rate: cfg.rate,
        noise: cfg.noise,
        gd: gains.gd,
        g_sr,
        g_rd,
        source_max: source_budget(cfg, dir),
        relay_max: cfg.p_relay_max,
    };
    problem.solve().into_energy(dir)
}

/// Minimum-energy feasible scheme among `schemes`, or `None` when every
/// candidate is in outage. Ties go to the earlier entry.
pub fn best_scheme(
    gains: &LinkGains,
    cfg: &CellConfig,
    dir: Direction,
    schemes: &[SchemeId],
    alpha: Alpha,
) -> Option<(SchemeId, SchemeEnergy)> {
    assert!(!schemes.is_empty(), "scheme set must not be empty");
    let mut best: Option<(SchemeId, SchemeEnergy)> = None;
    for &id in schemes {
        let e = match id {
            SchemeId::Dtx => dtx_energy(gains, cfg, dir),
            SchemeId::FullDf => fulldf_energy(gains, cfg, dir, alpha),
            SchemeId::EoPdf => {
                let problem = PdfProblem::new(gains, cfg, dir);
                // The budget-free optimum bounds the constrained one from below.
                if let Some((_, cur)) = &best {
                    if problem.relaxed().energy() >= cur.required() {
                        continue;
                    }
                }
                problem.solve().into_energy(dir)
            }
        };
        if !e.feasible() {
            continue;
        }
        match &best {
            Some((_, cur)) if cur.required() <= e.required() => {}
            _ => best = Some((id, e)),
        }
    }
    best
}

/// Half-duplex partial decode-forward with coherent relaying in the second
/// phase. The source splits rate `R = R_r + R_d`: the relayed part uses power
/// `p1` in the first phase and `p2` (coherent with the relay's `p_relay`) in
/// the second, the direct part uses `p3` in the second phase only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfProblem {
    pub rate: f64,
    pub noise: f64,
    pub gd: f64,
    pub g_sr: f64,
    pub g_rd: f64,
    pub source_max: f64,
    pub relay_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfSolution {
    pub status: Status,
    pub rate_relayed: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p_relay: f64,
    pub rate: f64,
    /// The source budget is active at the optimum.
    pub source_limited: bool,
}

impl PdfSolution {
    pub fn energy(&self) -> f64 {
        0.5 * (self.p1 + self.p2 + self.p3 + self.p_relay)
    }

    pub fn source_energy(&self) -> f64 {
        0.5 * (self.p1 + self.p2 + self.p3)
    }

    /// 1: nothing is sent directly, 3: the source budget binds and the relay
    /// carries what it can, 2: a genuine rate split.
    pub fn sub_scheme(&self) -> u8 {
        if self.rate - self.rate_relayed <= 1e-9 * self.rate.max(1.0) {
            1
        } else if self.source_limited {
            3
        } else {
            2
        }
    }

    fn into_energy(self, dir: Direction) -> SchemeEnergy {
        let allocation = Allocation::EoPdf {
            rate_relayed: self.rate_relayed,
            rate_direct: (self.rate - self.rate_relayed).max(0.0),
            p1: self.p1,
            p2: self.p2,
            p3: self.p3,
            p_relay: self.p_relay,
            sub_scheme: self.sub_scheme(),
        };
        SchemeEnergy::with_source(
            SchemeId::EoPdf,
            dir,
            self.status,
            self.source_energy(),
            0.5 * self.p_relay,
            allocation,
        )
    }
}

const RATE_GRID: usize = 32;
const RATE_TOL: f64 = 1e-10;

impl PdfProblem {
    pub fn new(gains: &LinkGains, cfg: &CellConfig, dir: Direction) -> Self {
        let (g_sr, g_rd) = hop_gains(gains, dir);
        PdfProblem {
            rate: cfg.rate,
            noise: cfg.noise,
            gd: gains.gd,
            g_sr,
            g_rd,
            source_max: source_budget(cfg, dir),
            relay_max: cfg.p_relay_max,
        }
    }

    fn p1_min(&self, rr: f64) -> f64 {
        ((2.0 * rr).exp2() - 1.0) * self.noise / self.g_sr
    }

    fn p3_min(&self, rr: f64) -> f64 {
        ((2.0 * (self.rate - rr).max(0.0)).exp2() - 1.0) * self.noise / self.gd
    }

    /// First-phase power beyond which the destination needs no second-phase
    /// help for the relayed part.
    fn p1_free(&self, rr: f64) -> f64 {
        ((2.0 * rr).exp2() - 1.0) * self.noise / self.gd
    }

    /// Received coherent power `(sqrt(p2 gd) + sqrt(pr g_rd))^2` still needed
    /// once `p1` and the minimal `p3` are fixed.
    fn coherent_target(&self, rr: f64, p1: f64) -> f64 {
        let rd = (self.rate - rr).max(0.0);
        let u = 1.0 + p1 * self.gd / self.noise;
        (self.noise * ((2.0 * self.rate).exp2() / u - (2.0 * rd).exp2())).max(0.0)
    }

    fn p1_range(&self, rr: f64) -> (f64, f64) {
        let lo = self.p1_min(rr);
        (lo, self.p1_free(rr).max(lo))
    }

    /// Unconstrained second-phase split of the coherent target.
    fn coherent_split(&self, t: f64) -> (f64, f64) {
        let g = self.gd + self.g_rd;
        let k = t / (g * g);
        (k * self.gd, k * self.g_rd)
    }

    fn relaxed_at(&self, rr: f64) -> PdfSolution {
        let (lo, hi) = self.p1_range(rr);
        // Stationary point of p1 + t(p1)/(gd + g_rd) in u = 1 + p1 gd / N.
        let u = self.rate.exp2() * (self.gd / (self.gd + self.g_rd)).sqrt();
        let p1 = ((u - 1.0) * self.noise / self.gd).clamp(lo, hi);
        let (p2, p_relay) = self.coherent_split(self.coherent_target(rr, p1));
        PdfSolution {
            status: Status::Feasible,
            rate_relayed: rr,
            p1,
            p2,
            p3: self.p3_min(rr),
            p_relay,
            rate: self.rate,
            source_limited: false,
        }
    }

    /// Budget-free optimum.
    pub fn relaxed(&self) -> PdfSolution {
        let f = |rr: f64| self.relaxed_at(rr).energy();
        let rr = grid_then_golden(f, 0.0, self.rate);
        self.relaxed_at(rr)
    }

    fn fits(&self, s: &PdfSolution) -> bool {
        s.source_energy() <= self.source_max * (1.0 + 1e-12) && 0.5 * s.p_relay <= self.relay_max * (1.0 + 1e-12)
    }

    /// Cheapest second-phase split of the coherent target `t` under the
    /// remaining source power `p2_max` and the relay budget.
    fn constrained_split(&self, t: f64, p2_max: f64) -> Option<(f64, f64, bool)> {
        let (p2, pr) = self.coherent_split(t);
        let pr_max = 2.0 * self.relay_max;
        if p2 <= p2_max && pr <= pr_max {
            return Some((p2, pr, false));
        }
        let st = t.sqrt();
        if pr > pr_max {
            let x = (st - (pr_max * self.g_rd).sqrt()).max(0.0);
            let p2 = x * x / self.gd;
            return (p2 <= p2_max * (1.0 + 1e-12)).then_some((p2.min(p2_max), pr_max, p2 >= p2_max * (1.0 - 1e-9)));
        }
        let y = (st - (p2_max.max(0.0) * self.gd).sqrt()).max(0.0);
        let pr = y * y / self.g_rd;
        (pr <= pr_max * (1.0 + 1e-12)).then_some((p2_max.max(0.0), pr.min(pr_max), true))
    }

    /// Least source power (relay at full budget) able to meet the rate with
    /// the given `p1`.
    fn source_need(&self, rr: f64, p1: f64) -> f64 {
        let x = (self.coherent_target(rr, p1).sqrt() - (2.0 * self.relay_max * self.g_rd).sqrt()).max(0.0);
        p1 + self.p3_min(rr) + x * x / self.gd
    }

    fn constrained_at(&self, rr: f64, p1: f64) -> Option<PdfSolution> {
        let p3 = self.p3_min(rr);
        let p2_max = 2.0 * self.source_max - p1 - p3;
        if p2_max < -1e-12 * self.source_max {
            return None;
        }
        let (p2, p_relay, source_limited) = self.constrained_split(self.coherent_target(rr, p1), p2_max)?;
        Some(PdfSolution {
            status: Status::Feasible,
            rate_relayed: rr,
            p1,
            p2,
            p3,
            p_relay,
            rate: self.rate,
            source_limited,
        })
    }

    /// Interval of `p1` values for which the rate is reachable within budgets.
    fn feasible_p1(&self, rr: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.p1_range(rr);
        let budget = 2.0 * self.source_max;
        let need = |p1: f64| self.source_need(rr, p1);
        let (best, need_best) = golden_min(need, lo, hi, 1e-9 * hi.max(1e-30));
        if need_best > budget * (1.0 + 1e-12) {
            return None;
        }
        let tol = 1e-12 * hi.max(1e-30);
        let left = if need(lo) <= budget {
            lo
        } else {
            bisect_predicate(|p| need(p) <= budget, best, lo, tol)
        };
        let right = if need(hi) <= budget {
            hi
        } else {
            bisect_predicate(|p| need(p) <= budget, best, hi, tol)
        };
        Some((left, right))
    }

    fn constrained_best_at(&self, rr: f64) -> Option<PdfSolution> {
        let (lo, hi) = self.feasible_p1(rr)?;
        let cost = |p1: f64| self.constrained_at(rr, p1).map_or(f64::INFINITY, |s| s.energy());
        let (p1, e) = golden_min(cost, lo, hi, 1e-10 * hi.max(1e-30));
        if e.is_finite() {
            self.constrained_at(rr, p1)
        } else {
            // Closed interval endpoints are feasible by construction.
            self.constrained_at(rr, lo).or_else(|| self.constrained_at(rr, hi))
        }
    }

    /// Least source-budget violation over `p1` for a given rate split.
    fn violation(&self, rr: f64) -> f64 {
        let (lo, hi) = self.p1_range(rr);
        let (_, need) = golden_min(|p1| self.source_need(rr, p1), lo, hi, 1e-9 * hi.max(1e-30));
        need - 2.0 * self.source_max
    }

    fn constrained(&self) -> PdfSolution {
        let outage = || PdfSolution {
            status: Status::Outage,
            ..self.relaxed()
        };
        let (rr_best, v) = grid_then_golden_value(|rr| self.violation(rr), 0.0, self.rate);
        if v > 1e-12 * self.source_max {
            return outage();
        }
        let feasible = |rr: f64| self.violation(rr) <= 1e-12 * self.source_max;
        let lo = if feasible(0.0) {
            0.0
        } else {
            bisect_predicate(feasible, rr_best, 0.0, RATE_TOL)
        };
        let hi = if feasible(self.rate) {
            self.rate
        } else {
            bisect_predicate(feasible, rr_best, self.rate, RATE_TOL)
        };
        let energy = |rr: f64| self.constrained_best_at(rr).map_or(f64::INFINITY, |s| s.energy());
        let rr = grid_then_golden(energy, lo, hi);
        match self
            .constrained_best_at(rr)
            .or_else(|| self.constrained_best_at(rr_best))
        {
            Some(s) if s.energy().is_finite() => s,
            _ => PdfSolution {
                status: Status::NumericalFailure,
                ..self.relaxed()
            },
        }
    }

    pub fn solve(&self) -> PdfSolution {
        let relaxed = self.relaxed();
        if !relaxed.energy().is_finite() {
            return PdfSolution {
                status: Status::NumericalFailure,
                ..relaxed
            };
        }
        if self.fits(&relaxed) {
            return relaxed;
        }
        self.constrained()
    }

    /// Checks the rate constraints of the program at an allocation, with
    /// relative slack `tol` on the rates.
    pub fn satisfies(&self, rr: f64, p1: f64, p2: f64, p3: f64, pr: f64, tol: f64) -> bool {
        let n = self.noise;
        let rd = self.rate - rr;
        let relay = 0.5 * (1.0 + p1 * self.g_sr / n).log2();
        let direct = 0.5 * (1.0 + p3 * self.gd / n).log2();
        let coherent = ((p2 * self.gd).sqrt() + (pr * self.g_rd).sqrt()).powi(2);
        let joint = 0.5 * (1.0 + p1 * self.gd / n).log2() + 0.5 * (1.0 + (coherent + p3 * self.gd) / n).log2();
        let slack = tol * self.rate.max(1.0);
        rr <= relay + slack && rd <= direct + slack && self.rate <= joint + slack
    }
}

fn grid_then_golden_value<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    if b - a <= RATE_TOL {
        return (a, f(a));
    }
    let step = (b - a) / RATE_GRID as f64;
    let mut best = (a, f(a));
    let mut best_i = 0;
    for i in 1..=RATE_GRID {
        let x = if i == RATE_GRID { b } else { a + step * i as f64 };
        let v = f(x);
        if v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let lo = a + step * best_i.saturating_sub(1) as f64;
    let hi = (a + step * (best_i + 1) as f64).min(b);
    let refined = golden_min(&f, lo, hi, RATE_TOL);
    if refined.1 <= best.1 {
        refined
    } else {
        best
    }
}

fn grid_then_golden<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    grid_then_golden_value(f, a, b).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_cfg(rate: f64) -> CellConfig {
        CellConfig {
            noise: 1.0,
            rate,
            p_user_max: 1e9,
            p_relay_max: 1e9,
            p_bs_max: 1e9,
            ..CellConfig::default()
        }
    }

    fn gains(gd: f64, gs: f64, gr: f64) -> LinkGains {
        LinkGains { gd, gs, gr }
    }

    #[test]
    fn dtx_unit_case() {
        let mut cfg = unit_cfg(1.0);
        cfg.p_user_max = 1.0;
        let e = dtx_energy(&gains(1.0, 1.0, 1.0), &cfg, Direction::Uplink);
        assert_eq!(e.e_user, 1.0);
        assert!(e.feasible());
        cfg.p_user_max = 0.999;
        assert!(!dtx_energy(&gains(1.0, 1.0, 1.0), &cfg, Direction::Uplink).feasible());
        assert!(!dtx_energy(&gains(1e-300, 1.0, 1.0), &CellConfig::default(), Direction::Uplink).feasible());
    }

    #[test]
    fn dtx_matches_power_search() {
        let cfg = CellConfig::default();
        let gd = 3.7e-12;
        let e = dtx_energy(&gains(gd, 1.0, 1.0), &cfg, Direction::Uplink).e_user;
        // Smallest power on a fine geometric grid reaching the rate.
        let mut p = 1e-6;
        while (1.0 + p * gd / cfg.noise).log2() < cfg.rate {
            p *= 1.0 + 1e-6;
        }
        assert!((p / e - 1.0).abs() < 2e-6, "{p} vs {e}");
    }

    #[test]
    fn fulldf_unit_case() {
        let cfg = unit_cfg(0.5);
        let e = fulldf_energy(&gains(0.1, 1.0, 1.0), &cfg, Direction::Uplink, Alpha::TwoHop);
        let Allocation::FullDf { p_source, p_relay, .. } = e.allocation else {
            panic!()
        };
        assert!((p_source - 1.0).abs() < 1e-15 && (p_relay - 1.0).abs() < 1e-15);
        assert!((e.e_user - 0.5).abs() < 1e-15 && (e.e_relay - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fulldf_meets_rate_bounds() {
        let cfg = CellConfig::default();
        let g = gains(2e-13, 5e-11, 3e-10);
        for alpha in [Alpha::TwoHop, Alpha::Repetition] {
            let e = fulldf_energy(&g, &cfg, Direction::Uplink, alpha);
            let Allocation::FullDf { p_source, p_relay, .. } = e.allocation else {
                panic!()
            };
            let relay = 0.5 * (1.0 + p_source * g.gs / cfg.noise).log2();
            let dest = 0.5 * (1.0 + (alpha.value() * p_source * g.gd + p_relay * g.gr) / cfg.noise).log2();
            assert!((relay - cfg.rate).abs() < 1e-12);
            assert!((dest - cfg.rate).abs() < 1e-12);
        }
    }

    #[test]
    fn fulldf_repetition_idle_relay() {
        let cfg = CellConfig::default();
        let e = fulldf_energy(&gains(2e-10, 1e-10, 1e-10), &cfg, Direction::Uplink, Alpha::Repetition);
        assert_eq!(e.e_relay, 0.0);
        assert!(matches!(e.allocation, Allocation::FullDf { relay_idle: true, .. }));
    }

    #[test]
    fn fulldf_downlink_mirrors_uplink() {
        let cfg = CellConfig::default();
        let g = gains(1e-13, 2e-11, 7e-11);
        let up = fulldf_energy(&g, &cfg, Direction::Uplink, Alpha::TwoHop);
        let swapped = gains(g.gd, g.gr, g.gs);
        let down = fulldf_energy(&swapped, &cfg, Direction::Downlink, Alpha::TwoHop);
        assert_eq!(up.e_user, down.e_bs);
        assert_eq!(up.e_relay, down.e_relay);
        assert_eq!(down.e_user, 0.0);
    }

    #[test]
    fn repetition_never_costs_more() {
        let cfg = CellConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let g = gains(
                10f64.powf(rng.random_range(-14.0..-9.0)),
                10f64.powf(rng.random_range(-14.0..-9.0)),
                10f64.powf(rng.random_range(-14.0..-9.0)),
            );
            let a0 = fulldf_energy(&g, &cfg, Direction::Uplink, Alpha::TwoHop).required();
            let a1 = fulldf_energy(&g, &cfg, Direction::Uplink, Alpha::Repetition).required();
            assert!(a1 <= a0);
        }
    }

    #[test]
    fn eopdf_equals_dtx_on_relaying_boundary() {
        let cfg = unit_cfg(3.0);
        let g = gains(0.3, 0.3, 5.0);
        let eo = eopdf_energy(&g, &cfg, Direction::Uplink).required();
        let dtx = dtx_energy(&g, &cfg, Direction::Uplink).required();
        assert!((eo / dtx - 1.0).abs() < 1e-9, "{eo} vs {dtx}");
    }

    #[test]
    fn eopdf_strong_access_link_limit() {
        // A free source-relay hop informs the relay at no cost; what remains
        // is the first-phase direct power against the coherent second phase.
        let cfg = unit_cfg(2.0);
        let g = gains(0.2, 1e12, 0.5);
        let eo = eopdf_energy(&g, &cfg, Direction::Uplink);
        let big = g.gd + g.gr;
        let u = (cfg.rate.exp2() * (g.gd / big).sqrt()).max(1.0);
        let limit = 0.5 * ((u - 1.0) / g.gd + ((2.0 * cfg.rate).exp2() / u - 1.0) / big);
        assert!(
            (eo.required() / limit - 1.0).abs() < 1e-6,
            "{} vs {limit}",
            eo.required()
        );
        let relay_bound = 0.5 * ((2.0 * cfg.rate).exp2() - 1.0) / g.gr;
        assert!(eo.required() <= relay_bound);
        assert!(eo.required() <= fulldf_energy(&g, &cfg, Direction::Uplink, Alpha::Repetition).required());
    }

    /// Random allocations that satisfy the raw program never beat the solver.
    #[test]
    fn eopdf_beats_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for case in 0..60 {
            let p = PdfProblem {
                rate: rng.random_range(0.5..5.0),
                noise: 1.0,
                gd: 10f64.powf(rng.random_range(-2.0..1.0)),
                g_sr: 10f64.powf(rng.random_range(-1.0..2.0)),
                g_rd: 10f64.powf(rng.random_range(-1.0..2.0)),
                source_max: if case % 2 == 0 {
                    1e12
                } else {
                    10f64.powf(rng.random_range(0.0..3.0))
                },
                relay_max: 10f64.powf(rng.random_range(0.0..3.0)),
            };
            let s = p.solve();
            if s.status != Status::Feasible {
                continue;
            }
            assert!(
                p.satisfies(s.rate_relayed, s.p1, s.p2, s.p3, s.p_relay, 1e-9),
                "{p:?} {s:?}"
            );
            assert!(s.source_energy() <= p.source_max * (1.0 + 1e-9));
            assert!(0.5 * s.p_relay <= p.relay_max * (1.0 + 1e-9));
            let e = s.energy();
            let scale = 4.0 * e;
            for _ in 0..4000 {
                let rr = rng.random_range(0.0..=p.rate);
                let pts = [
                    rng.random_range(0.0..scale),
                    rng.random_range(0.0..scale),
                    rng.random_range(0.0..scale),
                    rng.random_range(0.0..scale),
                ];
                if !p.satisfies(rr, pts[0], pts[1], pts[2], pts[3], 0.0) {
                    continue;
                }
                if 0.5 * (pts[0] + pts[1] + pts[2]) > p.source_max || 0.5 * pts[3] > p.relay_max {
                    continue;
                }
                let cand = 0.5 * pts.iter().sum::<f64>();
                assert!(cand >= e * (1.0 - 1e-7), "case {case}: {cand} < {e}");
            }
        }
    }

    #[test]
    fn eopdf_source_budget_binds() {
        let p = PdfProblem {
            rate: 3.0,
            noise: 1.0,
            gd: 0.5,
            g_sr: 4.0,
            g_rd: 0.4,
            source_max: 1e12,
            relay_max: 1e12,
        };
        let relaxed = p.solve();
        // Least source energy with an unlimited relay: decode at the relay,
        // send the rest directly, let the relay do all coherent work.
        let floor = (0..=30_000)
            .map(|i| {
                let rr = p.rate * i as f64 / 30_000.0;
                0.5 * (((2.0 * rr).exp2() - 1.0) / p.g_sr + ((2.0 * (p.rate - rr)).exp2() - 1.0) / p.gd)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(floor < 0.95 * relaxed.source_energy());
        let tight = PdfProblem {
            source_max: 0.5 * (floor + relaxed.source_energy()),
            ..p
        };
        let s = tight.solve();
        assert_eq!(s.status, Status::Feasible);
        assert_eq!(s.sub_scheme(), 3);
        assert!(s.source_energy() <= tight.source_max * (1.0 + 1e-9));
        assert!(s.energy() >= relaxed.energy());
        assert!(tight.satisfies(s.rate_relayed, s.p1, s.p2, s.p3, s.p_relay, 1e-9));
        let starved = PdfProblem { source_max: 1e-6, ..p };
        assert_eq!(starved.solve().status, Status::Outage);
    }

    #[test]
    fn best_scheme_picks_cheapest_feasible() {
        let cfg = CellConfig::default();
        let all = [SchemeId::Dtx, SchemeId::FullDf, SchemeId::EoPdf];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let g = gains(
                10f64.powf(rng.random_range(-15.0..-10.0)),
                10f64.powf(rng.random_range(-14.0..-8.0)),
                10f64.powf(rng.random_range(-12.0..-9.0)),
            );
            let cands = [
                dtx_energy(&g, &cfg, Direction::Uplink),
                fulldf_energy(&g, &cfg, Direction::Uplink, Alpha::TwoHop),
                eopdf_energy(&g, &cfg, Direction::Uplink),
            ];
            let expect = cands
                .iter()
                .filter(|e| e.feasible())
                .map(|e| e.required())
                .fold(f64::INFINITY, f64::min);
            match best_scheme(&g, &cfg, Direction::Uplink, &all, Alpha::TwoHop) {
                Some((_, e)) => assert!((e.required() / expect - 1.0).abs() < 1e-12),
                None => assert!(expect.is_infinite()),
            }
        }
    }

    #[test]
    fn near_bs_prefers_dtx() {
        let cfg = CellConfig::default();
        let g = gains(1e-6, 1e-12, 1e-10);
        let (id, _) = best_scheme(&g, &cfg, Direction::Uplink, &SchemeId::ALL, Alpha::TwoHop).unwrap();
        assert_eq!(id, SchemeId::Dtx);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn eopdf_dominates_fulldf(
            lgd in -15.0..-10.0f64, lgs in -14.0..-8.0f64, lgr in -12.0..-9.0f64, down in any::<bool>()
        ) {
            let cfg = CellConfig::default();
            let dir = if down { Direction::Downlink } else { Direction::Uplink };
            let g = gains(10f64.powf(lgd), 10f64.powf(lgs), 10f64.powf(lgr));
            let df = fulldf_energy(&g, &cfg, dir, Alpha::Repetition);
            let eo = eopdf_energy(&g, &cfg, dir);
            prop_assert!(eo.status != Status::NumericalFailure);
            if df.feasible() {
                prop_assert!(eo.feasible());
                prop_assert!(eo.required() <= df.required() * (1.0 + 1e-9));
            }
            let (g_sr, _) = hop_gains(&g, dir);
            let dtx = dtx_energy(&g, &cfg, dir);
            if g.gd < g_sr && dtx.feasible() {
                prop_assert!(eo.required() <= dtx.required() * (1.0 + 1e-9));
            }
        }
    }
}
