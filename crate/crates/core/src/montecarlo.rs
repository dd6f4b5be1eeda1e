//! Monte-Carlo user-drop oracle: exact per-position scheme selection compared
//! with the REA model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::Cell;
use crate::error::{Error, Result};
use crate::geometry::SectorSampler;
use crate::metrics::{dtx_only_report, energy_report, EnergyReport, EstimatorOptions};
use crate::rea::{characteristic_distances, r_dtx, rea_contains, CharacteristicDistances};
use crate::schemes::{Alpha, Direction, SchemeId};

/// Samples per independent sub-stream. The partition is fixed, so results do
/// not depend on the number of worker threads.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub samples: usize,
    pub seed: u64,
    pub alpha: Alpha,
    /// Half-width of the band around `x = D_min` used to attribute
    /// mismatches, as a fraction of `R_cov`.
    pub band_fraction: f64,
    /// Options for EO-PDF averages in the analytic report.
    pub estimator: EstimatorOptions,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            samples: 100_000,
            seed: 1,
            alpha: Alpha::TwoHop,
            band_fraction: 0.05,
            estimator: EstimatorOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scheme: SchemeId,
    pub direction: Direction,
    pub n_samples: usize,
    pub r_cov: f64,
    /// Fraction of drops served through the relay.
    pub p_rtx_hat: Estimate,
    /// Mean energy over served drops.
    pub e_total_hat: Estimate,
    /// Fraction of drops where REA membership disagrees with the exact choice.
    pub decision_mismatch_rate: f64,
    /// Share of mismatches within the band around the inner line.
    pub mismatch_near_line: f64,
    /// Fraction of drops where no scheme in the set is feasible.
    pub outage_rate: f64,
    pub p_rtx_model: f64,
    pub e_total_model: f64,
    /// `(model - empirical) / empirical` for the average energy.
    pub energy_model_error: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    n: usize,
    relayed: usize,
    served: usize,
    e_sum: f64,
    e_sq: f64,
    mismatches: usize,
    near_line: usize,
    outages: usize,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.n += o.n;
        self.relayed += o.relayed;
        self.served += o.served;
        self.e_sum += o.e_sum;
        self.e_sq += o.e_sq;
        self.mismatches += o.mismatches;
        self.near_line += o.near_line;
        self.outages += o.outages;
        self
    }
}

/// The relayed scheme whose REA the simulation checks: EO-PDF when present.
fn relayed_scheme(set: &[SchemeId]) -> Option<SchemeId> {
    if set.contains(&SchemeId::EoPdf) {
        Some(SchemeId::EoPdf)
    } else if set.contains(&SchemeId::FullDf) {
        Some(SchemeId::FullDf)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn run_chunk(
    cell: &Cell,
    dir: Direction,
    set: &[SchemeId],
    alpha: Alpha,
    cd: &CharacteristicDistances,
    band: f64,
    seed: u64,
    stream: u64,
    n: usize,
) -> Tally {
    let mut sampler = SectorSampler::with_stream(cd.r_cov, seed, stream);
    let mut t = Tally { n, ..Tally::default() };
    for _ in 0..n {
        let u = sampler.sample();
        let predicted = rea_contains(cd, u);
        let chosen = cell.best(u, dir, set, alpha);
        let relayed = match chosen {
            Some((id, e)) => {
                let e = e.required();
                t.served += 1;
                t.e_sum += e;
                t.e_sq += e * e;
                id.is_relayed()
            }
            None => {
                t.outages += 1;
                predicted
            }
        };
        if relayed && chosen.is_some() {
            t.relayed += 1;
        }
        if chosen.is_some() && relayed != predicted {
            t.mismatches += 1;
            if (u.x() - cd.d_min).abs() <= band {
                t.near_line += 1;
            }
        }
    }
    t
}

/// Drops `opts.samples` users uniformly over the sector of the relayed
/// scheme's coverage, picks the cheapest feasible scheme of `set` at each and
/// compares the tallies with the analytic REA model.
pub fn simulate(cell: &Cell, dir: Direction, set: &[SchemeId], opts: &SimOptions) -> Result<SimResult> {
    if opts.samples == 0 {
        return Err(Error::Config("at least one sample is required".into()));
    }
    if set.is_empty() {
        return Err(Error::Config("scheme set must not be empty".into()));
    }
    let (scheme, cd, report): (SchemeId, CharacteristicDistances, EnergyReport) = match relayed_scheme(set) {
        Some(s) => {
            let outcome = characteristic_distances(cell, dir, s, opts.alpha)?;
            let cd = *outcome.require()?;
            let report = energy_report(cell, &outcome, opts.alpha, &opts.estimator)?;
            (s, cd, report)
        }
        None => {
            let r = r_dtx(cell, dir);
            let cd = CharacteristicDistances {
                d_min: r,
                r_dtx: r,
                x_max: 0.0,
                r_max: 0.0,
                r_cov: r,
            };
            (SchemeId::Dtx, cd, dtx_only_report(cell, dir, r))
        }
    };
    let band = opts.band_fraction * cd.r_cov;
    let chunks = opts.samples.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let n = CHUNK.min(opts.samples - i * CHUNK);
            run_chunk(cell, dir, set, opts.alpha, &cd, band, opts.seed, i as u64, n)
        })
        .collect();
    let t = tallies.into_iter().fold(Tally::default(), Tally::merge);
    let n = t.n as f64;
    let p = t.relayed as f64 / n;
    let served = t.served.max(1) as f64;
    let e_mean = t.e_sum / served;
    let e_var = if t.served > 1 {
        ((t.e_sq / served - e_mean * e_mean) * served / (served - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SimResult {
        scheme,
        direction: dir,
        n_samples: t.n,
        r_cov: cd.r_cov,
        p_rtx_hat: Estimate {
            value: p,
            se: (p * (1.0 - p) / n).sqrt(),
        },
        e_total_hat: Estimate {
            value: e_mean,
            se: (e_var / served).sqrt(),
        },
        decision_mismatch_rate: t.mismatches as f64 / n,
        mismatch_near_line: if t.mismatches > 0 {
            t.near_line as f64 / t.mismatches as f64
        } else {
            1.0
        },
        outage_rate: t.outages as f64 / n,
        p_rtx_model: report.p_rtx,
        e_total_model: report.e_total_avg,
        energy_model_error: (report.e_total_avg - e_mean) / e_mean,
    })
}
