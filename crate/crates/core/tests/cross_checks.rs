//! Closed forms against their numerical counterparts, and structural
//! properties of the REA.

mod common;

use common::{grid_configs, rea_fraction_by_quadrature, uniform_table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_rea::metrics::{mean_access_loss, rea_average_quadrature, relay_energy_closed_form};
use relay_rea::rea::{d_rtx, d_rtx_closed_form};
use relay_rea::*;

fn outcomes(scheme: SchemeId, dir: Direction, alpha: Alpha) -> Vec<(Cell, ReaOutcome)> {
    let table = ScenarioTable::winner2();
    grid_configs()
        .into_iter()
        .filter_map(|cfg| {
            let cell = Cell::new(cfg, &table).unwrap();
            let o = characteristic_distances(&cell, dir, scheme, alpha).unwrap();
            o.accepted().then_some((cell, o))
        })
        .collect()
}

#[test]
fn relaying_root_matches_closed_form_for_equal_exponents() {
    for (b_d, b_s, dr) in [(30.0, 30.0, 500.0), (35.0, 28.0, 800.0), (20.0, 25.0, 300.0)] {
        let cfg = CellConfig {
            relay_distance: dr,
            ..CellConfig::default()
        };
        let cell = Cell::new(cfg, &uniform_table(37.6, b_d, 37.6, b_s)).unwrap();
        let root = d_rtx(&cell, Direction::Uplink).unwrap();
        let closed = d_rtx_closed_form(&cell);
        assert!((root - closed).abs() <= 1e-6, "{root} vs {closed}");
    }
}

#[test]
fn relay_energy_closed_form_matches_quadrature() {
    for (cell, o) in outcomes(SchemeId::FullDf, Direction::Uplink, Alpha::TwoHop) {
        let quad = rea_average_quadrature(&o.distances, |u| {
            cell.energy(SchemeId::FullDf, u, Direction::Uplink, Alpha::TwoHop)
                .e_relay
        });
        let closed = relay_energy_closed_form(&cell);
        assert!((quad / closed - 1.0).abs() <= 1e-9, "{quad} vs {closed}");
    }
}

#[test]
fn access_polynomial_matches_quadrature() {
    let all = outcomes(SchemeId::FullDf, Direction::Uplink, Alpha::TwoHop);
    assert!(all.iter().all(|(c, _)| c.links.access.exponent == 40.0));
    for (cell, o) in all {
        let poly = mean_access_loss(&o.distances, &cell, false);
        let quad = mean_access_loss(&o.distances, &cell, true);
        assert!((poly / quad - 1.0).abs() <= 1e-9, "{poly} vs {quad}");
    }
}

#[test]
fn relaying_probability_matches_indicator_quadrature() {
    for dir in [Direction::Uplink, Direction::Downlink] {
        for (_, o) in outcomes(SchemeId::FullDf, dir, Alpha::TwoHop).into_iter().step_by(3) {
            let p = p_rtx(&o.distances);
            let q = rea_fraction_by_quadrature(&o.distances);
            assert!((p - q).abs() <= 1e-6, "{:?}: {p} vs {q}", o.distances);
        }
    }
}

#[test]
fn inner_bound_never_beyond_relay() {
    for scheme in [SchemeId::FullDf, SchemeId::EoPdf] {
        for dir in [Direction::Uplink, Direction::Downlink] {
            for (cell, o) in outcomes(scheme, dir, Alpha::TwoHop) {
                assert!(o.distances.d_min <= cell.relay_distance());
            }
        }
    }
}

#[test]
fn uplink_fulldf_rea_inside_downlink_rea() {
    let table = ScenarioTable::winner2();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for cfg in grid_configs() {
        assert!(cfg.p_relay_max >= cfg.p_user_max);
        let cell = Cell::new(cfg, &table).unwrap();
        let up = characteristic_distances(&cell, Direction::Uplink, SchemeId::FullDf, Alpha::TwoHop).unwrap();
        let down = characteristic_distances(&cell, Direction::Downlink, SchemeId::FullDf, Alpha::TwoHop).unwrap();
        if !(up.accepted() && down.accepted()) {
            continue;
        }
        let mut s = SectorSampler::new(up.distances.r_cov, rng.random());
        for _ in 0..20_000 {
            let u = s.sample();
            if rea_contains(&up.distances, u) {
                assert!(rea_contains(&down.distances, u), "{u:?}");
            }
        }
    }
}

#[test]
fn eopdf_never_costs_more_than_fulldf_where_relaying_helps() {
    let table = ScenarioTable::winner2();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for cfg in grid_configs().into_iter().step_by(2) {
        let cell = Cell::new(cfg, &table).unwrap();
        for dir in [Direction::Uplink, Direction::Downlink] {
            for _ in 0..300 {
                let u = UserPosition::new(rng.random_range(1.0..1600.0), rng.random_range(-0.5..0.5));
                let g = cell.gains(u);
                if g.gd >= g.gs {
                    continue;
                }
                let df = cell.energy(SchemeId::FullDf, u, dir, Alpha::TwoHop);
                let eo = cell.energy(SchemeId::EoPdf, u, dir, Alpha::TwoHop);
                if df.feasible() && eo.feasible() {
                    assert!(eo.required() <= df.required() * (1.0 + 1e-9), "{u:?} {dir}");
                }
            }
        }
    }
}

#[test]
fn average_energy_identity_is_exact() {
    for (cell, o) in outcomes(SchemeId::FullDf, Direction::Downlink, Alpha::TwoHop) {
        let r = energy_report(&cell, &o, Alpha::TwoHop, &EstimatorOptions::default()).unwrap();
        assert_eq!(r.e_total_avg, (1.0 - r.p_rtx) * r.e_dtx_avg + r.p_rtx * r.e_rtx_avg());
    }
}

#[test]
fn repetition_changes_rea_by_under_one_percent() {
    let table = ScenarioTable::winner2();
    for cfg in grid_configs() {
        let cell = Cell::new(cfg, &table).unwrap();
        for dir in [Direction::Uplink, Direction::Downlink] {
            let a = characteristic_distances(&cell, dir, SchemeId::FullDf, Alpha::TwoHop).unwrap();
            let b = characteristic_distances(&cell, dir, SchemeId::FullDf, Alpha::Repetition).unwrap();
            if !(a.accepted() && b.accepted()) {
                continue;
            }
            let area = |o: &ReaOutcome| p_rtx(&o.distances) * sector_area(o.distances.r_cov);
            let diff = (area(&a) - area(&b)).abs() / sector_area(a.distances.r_cov);
            assert!(diff < 0.01, "{diff}");
        }
    }
}
