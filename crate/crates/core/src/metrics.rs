//! Analytic cell averages over the REA model: probability of relaying,
//! conditional average energies, energy per unit area and deployment cost.
//!
//! All integrals run over the half-sector `0 <= theta <= pi/6` and use the
//! mirror symmetry of the sector. The DTx part of the half-sector is bounded
//! by the line `x = D_min` for `theta <= phi`, by the DTx circle for
//! `phi <= theta <= Phi` and by the hexagon edge beyond `Phi`.

use std::f64::consts::FRAC_PI_6;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::Cell;
use crate::error::{Error, Result};
use crate::geometry::{r_max as edge_radius, sector_area, SectorSampler, UserPosition};
use crate::numeric::integrate;
use crate::rea::{rea_contains, CharacteristicDistances, ReaOutcome};
use crate::schemes::{Alpha, Direction, SchemeId};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const ANGLE_REL_TOL: f64 = 1e-11;
const INNER_REL_TOL: f64 = 1e-10;
const OUTER_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellShape {
    #[default]
    Hexagonal,
    /// Circular cell of radius `R_cov`; only used to check the hexagonal
    /// formulas against their relaxed counterpart.
    Circular,
}

/// Angles splitting the DTx part of the half-sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSolution {
    /// Where the inner line stops bounding the DTx region.
    pub phi_small: f64,
    /// Where the hexagon edge starts bounding the DTx region.
    pub phi_big: f64,
    /// Abscissa where the DTx circle meets the hexagon edge.
    pub x: f64,
    /// Inner line abscissa actually used, `min(D_min, R_DTx)`.
    pub d_eff: f64,
}

/// Four-case angle selection. Needs `R_DTx <= R_cov`.
pub fn angles(cd: &CharacteristicDistances) -> AngleSolution {
    angles_for(cd, CellShape::Hexagonal)
}

pub fn angles_for(cd: &CharacteristicDistances, shape: CellShape) -> AngleSolution {
    let rho = cd.r_dtx;
    let r = cd.r_cov;
    let d = cd.d_min.min(rho).max(0.0);
    let line_circle = if rho > 0.0 {
        (d / rho).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    let circle_inside = SQRT3 / 2.0 * rho <= 0.75 * r;
    let x = if circle_inside {
        f64::NAN
    } else {
        0.75 * r + 0.25 * (4.0 * rho * rho - 3.0 * r * r).max(0.0).sqrt()
    };
    let (phi_small, phi_big) = if shape == CellShape::Circular {
        let p = line_circle.min(FRAC_PI_6);
        (p, FRAC_PI_6)
    } else if d <= (SQRT3 / 2.0 * rho).min(0.75 * r) {
        (FRAC_PI_6, FRAC_PI_6)
    } else if circle_inside {
        (line_circle, FRAC_PI_6)
    } else if d >= x {
        (line_circle, (x / rho).clamp(-1.0, 1.0).acos())
    } else {
        let p = (SQRT3 * (r - d) / d).atan();
        (p, p)
    };
    debug_assert!(phi_small <= phi_big + 1e-12 && phi_big <= FRAC_PI_6 + 1e-12);
    AngleSolution {
        phi_small,
        phi_big,
        x,
        d_eff: d,
    }
}

/// Area of the DTx part of the half-sector.
fn dtx_half_area(cd: &CharacteristicDistances, a: &AngleSolution, shape: CellShape) -> f64 {
    let d = a.d_eff;
    let rho = cd.r_dtx;
    let r = cd.r_cov;
    let edge = match shape {
        CellShape::Hexagonal => 3.0 * r * r / 8.0 * (FRAC_PI_6 - a.phi_big).tan(),
        CellShape::Circular => 0.5 * r * r * (FRAC_PI_6 - a.phi_big),
    };
    0.5 * d * d * a.phi_small.tan() + 0.5 * rho * rho * (a.phi_big - a.phi_small) + edge
}

fn half_sector_area(r_cov: f64, shape: CellShape) -> f64 {
    match shape {
        CellShape::Hexagonal => 0.5 * sector_area(r_cov),
        CellShape::Circular => 0.5 * r_cov * r_cov * FRAC_PI_6,
    }
}

/// Probability that a uniformly placed user is served through the relay.
pub fn p_rtx(cd: &CharacteristicDistances) -> f64 {
    p_rtx_for(cd, CellShape::Hexagonal)
}

pub fn p_rtx_for(cd: &CharacteristicDistances, shape: CellShape) -> f64 {
    p_rtx_with_angles(cd, &angles_for(cd, shape), shape)
}

/// Relaying probability for given split angles, without case selection.
pub fn p_rtx_with_angles(cd: &CharacteristicDistances, a: &AngleSolution, shape: CellShape) -> f64 {
    let p = 1.0 - dtx_half_area(cd, a, shape) / half_sector_area(cd.r_cov, shape);
    if !(0.0..=1.0).contains(&p) {
        debug!("relaying probability {p} clamped to [0, 1]");
    }
    p.clamp(0.0, 1.0)
}

/// `int_a^b sec(theta)^p dtheta`.
fn sec_power_integral(p: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    integrate(|t| t.cos().powf(-p), a, b, ANGLE_REL_TOL, 0.0).value
}

/// `int_a^b (sin(theta) + sqrt(3) cos(theta))^(-p) dtheta`.
fn edge_power_integral(p: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    integrate(|t| (t.sin() + SQRT3 * t.cos()).powf(-p), a, b, ANGLE_REL_TOL, 0.0).value
}

/// Average DTx energy over the users served directly.
/// The direction only enters through `cd.r_dtx`.
pub fn avg_energy_dtx(cd: &CharacteristicDistances, cell: &Cell, _dir: Direction) -> f64 {
    let p = p_rtx(cd);
    if p >= 1.0 {
        return 0.0;
    }
    let link = &cell.links.direct;
    let cfg = &cell.cfg;
    let a = link.exponent / 10.0 + 2.0;
    let ang = angles(cd);
    let (d, rho, r) = (ang.d_eff, cd.r_dtx, cd.r_cov);
    let bracket = d.powf(a) * sec_power_integral(a, 0.0, ang.phi_small)
        + rho.powf(a) * (ang.phi_big - ang.phi_small)
        + (SQRT3 * r).powf(a) * edge_power_integral(a, ang.phi_big, FRAC_PI_6);
    2.0 * cfg.snr_full() * cfg.noise * link.k / (a * sector_area(r) * (1.0 - p)) * bracket
}

/// `int_lo^hi r_s^4 r dr` with `r_s^2 = r^2 - 2 r D_r cos(theta) + D_r^2`.
///
/// With `s = r - D_r cos(theta)` and `e = (D_r sin(theta))^2` the integrand is
/// `(s^2 + e)^2 (s + b)`.
pub fn quartic_radial_integral(dr: f64, theta: f64, lo: f64, hi: f64) -> f64 {
    let b = dr * theta.cos();
    let e = (dr * theta.sin()).powi(2);
    let anti = |r: f64| {
        let s = r - b;
        let s2 = s * s;
        s2 * s2 * s2 / 6.0
            + b * s2 * s2 * s / 5.0
            + e * s2 * s2 / 2.0
            + 2.0 * e * b * s2 * s / 3.0
            + e * e * s2 / 2.0
            + b * e * e * s
    };
    anti(hi) - anti(lo)
}

/// `int_lo^hi r_s^p r dr` by quadrature.
pub fn radial_integral(dr: f64, theta: f64, p: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let c = theta.cos();
    let f = |r: f64| (r * r - 2.0 * r * dr * c + dr * dr).max(0.0).powf(0.5 * p) * r;
    integrate(f, lo, hi, INNER_REL_TOL, 0.0).value
}

/// Radial extent of the REA on the ray `theta` of the half-sector, as the
/// lower bound of `r` (the upper bound is the hexagon edge).
fn rea_inner_radius(cd: &CharacteristicDistances, ang: &AngleSolution, theta: f64) -> Option<f64> {
    if theta <= ang.phi_small {
        Some(ang.d_eff / theta.cos())
    } else if theta <= ang.phi_big {
        Some(cd.r_dtx)
    } else {
        None
    }
}

/// `int int_REA f(r, theta) r dr dtheta` over the half-sector, with
/// `radial(theta, lo, hi)` returning the inner integral.
fn rea_half_integral<F: Fn(f64, f64, f64) -> f64 + Sync>(cd: &CharacteristicDistances, radial: F) -> f64 {
    let ang = angles(cd);
    let outer = |theta: f64| match rea_inner_radius(cd, &ang, theta) {
        Some(lo) => {
            let hi = edge_radius(theta, cd.r_cov);
            if hi > lo {
                radial(theta, lo, hi)
            } else {
                0.0
            }
        }
        None => 0.0,
    };
    let mut total = 0.0;
    if ang.phi_small > 0.0 {
        total += integrate(outer, 0.0, ang.phi_small, OUTER_REL_TOL, 0.0).value;
    }
    if ang.phi_big > ang.phi_small {
        total += integrate(outer, ang.phi_small, ang.phi_big, OUTER_REL_TOL, 0.0).value;
    }
    total
}

/// Average of `e(user)` over the REA by nested quadrature.
pub fn rea_average_quadrature<F: Fn(UserPosition) -> f64 + Sync>(cd: &CharacteristicDistances, e: F) -> f64 {
    let num = rea_half_integral(cd, |theta, lo, hi| {
        integrate(|r| e(UserPosition::new(r, theta)) * r, lo, hi, INNER_REL_TOL, 0.0).value
    });
    let area = rea_half_integral(cd, |_, lo, hi| 0.5 * (hi * hi - lo * lo));
    num / area
}

/// Average over the REA of `K r_s^(A/10)` for the user-relay link: the mean
/// inverse gain of that hop. Uses the polynomial antiderivative for `A = 40`
/// unless `force_quadrature` is set.
pub fn mean_access_loss(cd: &CharacteristicDistances, cell: &Cell, force_quadrature: bool) -> f64 {
    let link = &cell.links.access;
    let dr = cell.relay_distance();
    let p = link.exponent / 10.0;
    let polynomial = p == 4.0 && !force_quadrature;
    let i = rea_half_integral(cd, |theta, lo, hi| {
        if polynomial {
            quartic_radial_integral(dr, theta, lo, hi)
        } else {
            radial_integral(dr, theta, p, lo, hi)
        }
    });
    let p_r = p_rtx(cd);
    link.k * i / (0.5 * sector_area(cd.r_cov) * p_r)
}

/// Average Full-DF energies over the REA: `(source, relay)` where the source
/// is the user in uplink and the base station in downlink.
pub fn avg_energy_fulldf(cd: &CharacteristicDistances, cell: &Cell, dir: Direction, alpha: Alpha) -> (f64, f64) {
    if p_rtx(cd) <= 0.0 {
        return (0.0, 0.0);
    }
    let cfg = &cell.cfg;
    let half = 0.5 * cfg.snr_half() * cfg.noise;
    let backhaul = half * cell.links.backhaul.loss(cell.relay_distance());
    match (dir, alpha) {
        (Direction::Uplink, Alpha::TwoHop) => (half * mean_access_loss(cd, cell, false), backhaul),
        (Direction::Downlink, Alpha::TwoHop) => (backhaul, half * mean_access_loss(cd, cell, false)),
        (_, Alpha::Repetition) => {
            let e = |u: UserPosition| cell.energy(SchemeId::FullDf, u, dir, alpha);
            let source = rea_average_quadrature(cd, |u| {
                let x = e(u);
                x.e_user + x.e_bs
            });
            let relay = rea_average_quadrature(cd, |u| e(u).e_relay);
            (source, relay)
        }
    }
}

/// Closed-form average relay energy of uplink two-hop Full-DF.
pub fn relay_energy_closed_form(cell: &Cell) -> f64 {
    let cfg = &cell.cfg;
    cfg.snr_half() * cfg.noise / 2.0 * cell.links.backhaul.loss(cell.relay_distance())
}

/// Options of the Monte-Carlo estimator used for EO-PDF averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorOptions {
    pub seed: u64,
    /// Target relative standard error of the REA-stratum mean.
    pub rel_se: f64,
    /// REA samples per batch.
    pub batch: usize,
    pub max_samples: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            seed: 0x5eed,
            rel_se: 0.005,
            batch: 4096,
            max_samples: 1 << 21,
        }
    }
}

/// Mean of per-position source and relay energies over the REA by uniform
/// sampling, stopping at the target standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumEstimate {
    pub source: f64,
    pub relay: f64,
    /// Relative standard error of the total.
    pub rel_se: f64,
    pub samples: usize,
}

fn batch_sums(
    cell: &Cell,
    cd: &CharacteristicDistances,
    dir: Direction,
    scheme: SchemeId,
    alpha: Alpha,
    seed: u64,
    stream: u64,
    n: usize,
) -> [f64; 4] {
    let mut sampler = SectorSampler::with_stream(cd.r_cov, seed, stream);
    let mut acc = [0.0; 4];
    let mut kept = 0;
    while kept < n {
        let u = sampler.sample();
        if !rea_contains(cd, u) {
            continue;
        }
        let e = cell.energy(scheme, u, dir, alpha);
        let s = e.e_user + e.e_bs;
        let t = s + e.e_relay;
        acc[0] += s;
        acc[1] += e.e_relay;
        acc[2] += t * t;
        kept += 1;
    }
    acc[3] = kept as f64;
    acc
}

pub fn estimate_rea_energy(
    cell: &Cell,
    cd: &CharacteristicDistances,
    dir: Direction,
    scheme: SchemeId,
    alpha: Alpha,
    opts: &EstimatorOptions,
) -> Result<StratumEstimate> {
    if p_rtx(cd) <= 0.0 {
        return Ok(StratumEstimate {
            source: 0.0,
            relay: 0.0,
            rel_se: 0.0,
            samples: 0,
        });
    }
    let mut sums = [0.0; 4];
    let mut stream = 0u64;
    loop {
        // A fixed number of batches per round keeps the result independent
        // of the thread count.
        let round: Vec<[f64; 4]> = (stream..stream + 4)
            .into_par_iter()
            .map(|s| batch_sums(cell, cd, dir, scheme, alpha, opts.seed, s, opts.batch))
            .collect();
        stream += 4;
        for b in round {
            for k in 0..4 {
                sums[k] += b[k];
            }
        }
        let n = sums[3];
        let mean = (sums[0] + sums[1]) / n;
        let var = (sums[2] / n - mean * mean).max(0.0) * n / (n - 1.0);
        let rel_se = (var / n).sqrt() / mean;
        if !mean.is_finite() {
            return Err(Error::Numerical("non-finite energy in REA stratum".into()));
        }
        if rel_se <= opts.rel_se || n as usize >= opts.max_samples {
            return Ok(StratumEstimate {
                source: sums[0] / n,
                relay: sums[1] / n,
                rel_se,
                samples: n as usize,
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AverageMethod {
    Analytic,
    MonteCarlo,
}

/// Cell-averaged energies of one relayed scheme. Energies are per channel
/// use; `e_per_area` is per square meter of sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub scheme: SchemeId,
    pub direction: Direction,
    pub p_rtx: f64,
    pub e_dtx_avg: f64,
    pub e_user_avg: f64,
    pub e_relay_avg: f64,
    pub e_bs_avg: f64,
    pub e_total_avg: f64,
    pub e_per_area: f64,
    pub cost_ratio: f64,
    pub method: AverageMethod,
    /// Relative standard error of the relayed averages (0 when analytic).
    pub rel_se: f64,
}

impl EnergyReport {
    /// Energy spent by the relayed users, per relayed user.
    pub fn e_rtx_avg(&self) -> f64 {
        self.e_user_avg + self.e_relay_avg + self.e_bs_avg
    }
}

/// Assembles the cell averages of `scheme` for an accepted REA.
pub fn energy_report(cell: &Cell, outcome: &ReaOutcome, alpha: Alpha, opts: &EstimatorOptions) -> Result<EnergyReport> {
    let cd = outcome.require()?;
    let dir = outcome.direction;
    let scheme = outcome.scheme;
    let p = p_rtx(cd);
    let e_dtx_avg = avg_energy_dtx(cd, cell, dir);
    let (source, relay, method, rel_se) = match scheme {
        SchemeId::FullDf => {
            let (s, r) = avg_energy_fulldf(cd, cell, dir, alpha);
            (s, r, AverageMethod::Analytic, 0.0)
        }
        SchemeId::EoPdf => {
            let est = estimate_rea_energy(cell, cd, dir, scheme, alpha, opts)?;
            (est.source, est.relay, AverageMethod::MonteCarlo, est.rel_se)
        }
        SchemeId::Dtx => return Err(Error::Config("DTx has no relayed averages".into())),
    };
    let (e_user_avg, e_bs_avg) = match dir {
        Direction::Uplink => (source, 0.0),
        Direction::Downlink => (0.0, source),
    };
    Ok(assemble(
        scheme, dir, cd, p, e_dtx_avg, e_user_avg, relay, e_bs_avg, method, rel_se,
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    scheme: SchemeId,
    direction: Direction,
    cd: &CharacteristicDistances,
    p: f64,
    e_dtx_avg: f64,
    e_user_avg: f64,
    e_relay_avg: f64,
    e_bs_avg: f64,
    method: AverageMethod,
    rel_se: f64,
) -> EnergyReport {
    let e_total_avg = (1.0 - p) * e_dtx_avg + p * (e_user_avg + e_relay_avg + e_bs_avg);
    EnergyReport {
        scheme,
        direction,
        p_rtx: p,
        e_dtx_avg,
        e_user_avg,
        e_relay_avg,
        e_bs_avg,
        e_total_avg,
        e_per_area: e_total_avg / sector_area(cd.r_cov),
        cost_ratio: cost_ratio(cd),
        method,
        rel_se,
    }
}

/// Report for a cell without relay whose coverage is the DTx disk's hexagon.
pub fn dtx_only_report(cell: &Cell, dir: Direction, r_cov: f64) -> EnergyReport {
    let r_dtx = crate::rea::r_dtx(cell, dir);
    let cd = CharacteristicDistances {
        d_min: r_cov.max(r_dtx),
        r_dtx,
        x_max: 0.0,
        r_max: r_dtx,
        r_cov,
    };
    let e = avg_energy_dtx(&cd, cell, dir);
    assemble(
        SchemeId::Dtx,
        dir,
        &cd,
        0.0,
        e,
        0.0,
        0.0,
        0.0,
        AverageMethod::Analytic,
        0.0,
    )
}

/// Area of the DTx-only hexagon over the relay-extended one.
pub fn cost_ratio(cd: &CharacteristicDistances) -> f64 {
    (cd.r_dtx / cd.r_cov).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CellConfig;
    use crate::pathloss::ScenarioTable;
    use crate::rea::characteristic_distances;

    fn cd(d_min: f64, r_dtx: f64, r_cov: f64) -> CharacteristicDistances {
        CharacteristicDistances {
            d_min,
            r_dtx,
            x_max: 0.0,
            r_max: 10.0 * r_cov,
            r_cov,
        }
    }

    fn default_cell() -> Cell {
        Cell::new(CellConfig::default(), &ScenarioTable::winner2()).unwrap()
    }

    /// Half-sector DTx area by quadrature of the radial extent
    /// `min(D/cos, R_DTx, r_max)`.
    fn dtx_area_oracle(c: &CharacteristicDistances) -> f64 {
        let f = |t: f64| {
            let m = (c.d_min / t.cos()).min(c.r_dtx).min(edge_radius(t, c.r_cov));
            0.5 * m * m
        };
        integrate(f, 0.0, FRAC_PI_6, 1e-13, 0.0).value
    }

    #[test]
    fn angle_case_one_and_two() {
        let a = angles(&cd(300.0, 800.0, 1000.0));
        assert_eq!((a.phi_small, a.phi_big), (FRAC_PI_6, FRAC_PI_6));
        let a = angles(&cd(650.0, 700.0, 1000.0));
        assert!((a.phi_small - (650.0f64 / 700.0).acos()).abs() < 1e-15);
        assert_eq!(a.phi_big, FRAC_PI_6);
    }

    #[test]
    fn p_rtx_matches_area_quadrature_in_all_cases() {
        let cases = [
            cd(300.0, 800.0, 1000.0),
            cd(600.0, 700.0, 1000.0),
            cd(950.0, 960.0, 1000.0),
            cd(800.0, 960.0, 1000.0),
            cd(780.0, 900.0, 1000.0),
            cd(2000.0, 900.0, 1000.0),
            cd(0.0, 0.0, 1000.0),
            cd(500.0, 1000.0, 1000.0),
        ];
        for c in cases {
            let expect = 1.0 - dtx_area_oracle(&c) / (0.5 * sector_area(c.r_cov));
            assert!((p_rtx(&c) - expect).abs() < 1e-9, "{c:?}: {} vs {expect}", p_rtx(&c));
        }
    }

    #[test]
    fn p_rtx_trivial_values() {
        let r = 1000.0;
        // Inner line at the sector's edge midpoint with both angles at pi/6.
        let full = cd(SQRT3 / 2.0 * r, r, r);
        let forced = AngleSolution {
            phi_small: FRAC_PI_6,
            phi_big: FRAC_PI_6,
            x: f64::NAN,
            d_eff: full.d_min,
        };
        assert!(p_rtx_with_angles(&full, &forced, CellShape::Hexagonal).abs() < 1e-12);
        assert_eq!(p_rtx(&cd(0.0, 0.0, r)), 1.0);
    }

    #[test]
    fn angles_are_continuous_across_cases() {
        let (rho, r) = (900.0, 1000.0);
        for boundary in [SQRT3 / 2.0 * 700.0, 0.75 * r] {
            let (rho, r) = if boundary == 0.75 * r { (rho, r) } else { (700.0, r) };
            let lo = angles(&cd(boundary - 1e-9, rho, r));
            let hi = angles(&cd(boundary + 1e-9, rho, r));
            assert!((lo.phi_small - hi.phi_small).abs() < 1e-6);
            assert!((lo.phi_big - hi.phi_big).abs() < 1e-6);
        }
        // Between the edge-crossing cases at D = X.
        let x = angles(&cd(0.0, rho, r)).x;
        let lo = angles(&cd(x - 1e-9, rho, r));
        let hi = angles(&cd(x + 1e-9, rho, r));
        assert!((lo.phi_small - hi.phi_small).abs() < 1e-6);
        assert!((lo.phi_big - hi.phi_big).abs() < 1e-6);
    }

    #[test]
    fn p_rtx_monotone_in_d_min() {
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let p = p_rtx(&cd(5.0 * i as f64, 900.0, 1000.0));
            assert!(p <= prev + 1e-15);
            prev = p;
        }
    }

    #[test]
    fn circular_shape_matches_sector_formula() {
        let c = cd(650.0, 700.0, 1000.0);
        let phi = (650.0f64 / 700.0).acos();
        let dtx = 0.5 * 650.0f64.powi(2) * phi.tan() + 0.5 * 700.0f64.powi(2) * (FRAC_PI_6 - phi);
        let expect = 1.0 - dtx / (0.5 * 1000.0f64.powi(2) * FRAC_PI_6);
        assert!((p_rtx_for(&c, CellShape::Circular) - expect).abs() < 1e-12);
    }

    #[test]
    fn dtx_average_with_flat_loss() {
        let mut cell = default_cell();
        cell.links.direct.exponent = 0.0;
        let c = cd(700.0, 900.0, 1000.0);
        let e = avg_energy_dtx(&c, &cell, Direction::Uplink);
        let expect = cell.cfg.snr_full() * cell.cfg.noise * cell.links.direct.k;
        assert!((e / expect - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dtx_average_matches_polar_quadrature() {
        let cell = default_cell();
        for c in [
            cd(600.0, 700.0, 1000.0),
            cd(800.0, 960.0, 1000.0),
            cd(300.0, 900.0, 1000.0),
        ] {
            let link = cell.links.direct;
            let f = |t: f64| {
                let m = (c.d_min / t.cos()).min(c.r_dtx).min(edge_radius(t, c.r_cov));
                integrate(|r| link.loss(r) * r, 0.0, m, 1e-12, 0.0).value
            };
            let num = integrate(f, 0.0, FRAC_PI_6, 1e-11, 0.0).value;
            let expect = cell.cfg.snr_full() * cell.cfg.noise * num / dtx_area_oracle(&c);
            let got = avg_energy_dtx(&c, &cell, Direction::Uplink);
            assert!((got / expect - 1.0).abs() < 1e-6, "{got} vs {expect}");
        }
    }

    #[test]
    fn dtx_average_grows_with_coverage() {
        let cell = default_cell();
        let mut prev = 0.0;
        for i in 0..20 {
            let e = avg_energy_dtx(&cd(250.0, 290.0, 290.0 + 20.0 * i as f64), &cell, Direction::Uplink);
            assert!(e >= prev * (1.0 - 1e-12));
            prev = e;
        }
    }

    #[test]
    fn quartic_antiderivative_matches_quadrature() {
        for (theta, lo, hi) in [
            (0.0, 100.0, 900.0),
            (0.3, 480.0, 1200.0),
            (FRAC_PI_6, 1.0, 2.0),
            (0.1, 490.0, 510.0),
        ] {
            let a = quartic_radial_integral(500.0, theta, lo, hi);
            let q = radial_integral(500.0, theta, 4.0, lo, hi);
            assert!((a / q - 1.0).abs() < 1e-10, "{theta}: {a} vs {q}");
        }
    }

    #[test]
    fn fulldf_user_average_polynomial_vs_quadrature() {
        let cell = default_cell();
        let o = characteristic_distances(&cell, Direction::Uplink, SchemeId::FullDf, Alpha::TwoHop).unwrap();
        let c = o.require().unwrap();
        let poly = mean_access_loss(c, &cell, false);
        let quad = mean_access_loss(c, &cell, true);
        assert!((poly / quad - 1.0).abs() < 1e-9);
    }

    #[test]
    fn relay_closed_form() {
        let mut cell = default_cell();
        cell.links.backhaul.k = 1.0;
        cell.cfg.relay_distance = 1.0;
        let expect = cell.cfg.snr_half() * cell.cfg.noise / 2.0;
        assert!((relay_energy_closed_form(&cell) / expect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn report_identity_and_degenerate_cases() {
        let cell = default_cell();
        let o = characteristic_distances(&cell, Direction::Uplink, SchemeId::FullDf, Alpha::TwoHop).unwrap();
        let r = energy_report(&cell, &o, Alpha::TwoHop, &EstimatorOptions::default()).unwrap();
        let total = (1.0 - r.p_rtx) * r.e_dtx_avg + r.p_rtx * (r.e_user_avg + r.e_relay_avg + r.e_bs_avg);
        assert_eq!(r.e_total_avg, total);
        let c = o.distances;
        let none = assemble(
            SchemeId::FullDf,
            Direction::Uplink,
            &c,
            0.0,
            2.0,
            5.0,
            7.0,
            0.0,
            AverageMethod::Analytic,
            0.0,
        );
        assert_eq!(none.e_total_avg, 2.0);
        let all = assemble(
            SchemeId::FullDf,
            Direction::Uplink,
            &c,
            1.0,
            2.0,
            5.0,
            7.0,
            0.0,
            AverageMethod::Analytic,
            0.0,
        );
        assert_eq!(all.e_total_avg, 12.0);
        assert!((r.cost_ratio - (c.r_dtx / c.r_cov).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn eo_estimator_is_deterministic() {
        let cell = default_cell();
        let o = characteristic_distances(&cell, Direction::Uplink, SchemeId::EoPdf, Alpha::TwoHop).unwrap();
        let opts = EstimatorOptions::default();
        let a = energy_report(&cell, &o, Alpha::TwoHop, &opts).unwrap();
        let b = energy_report(&cell, &o, Alpha::TwoHop, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.rel_se <= 0.005);
        assert_eq!(a.method, AverageMethod::MonteCarlo);
    }
}
