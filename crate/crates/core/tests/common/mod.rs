//! Shared oracles and fixtures for the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_6;

use relay_rea::geometry::r_max as edge_radius;
use relay_rea::numeric::{bisect_predicate, integrate};
use relay_rea::{rea_contains, CellConfig, CharacteristicDistances, RegimeChoice, ScenarioTable, UserPosition};

/// A table where the direct and user-relay links use their own single
/// scenario regardless of regime and LOS, and the feeder is free-space-like.
pub fn uniform_table(a_direct: f64, b_direct: f64, a_access: f64, b_access: f64) -> ScenarioTable {
    let mut text = format!(
        "[[scenario]]\nname = \"D\"\na = {a_direct}\nb = {b_direct}\nc = 0.0\nd = 0.0\nlos = true\n\n\
         [[scenario]]\nname = \"S\"\na = {a_access}\nb = {b_access}\nc = 0.0\nd = 0.0\nlos = true\n\n\
         [[scenario]]\nname = \"R\"\na = 20.0\nb = 40.0\nc = 0.0\nd = 0.0\nlos = true\n"
    );
    for regime in ["vicinity", "bs-like"] {
        for los in [true, false] {
            text +=
                &format!("\n[[assignment]]\nlink = \"direct\"\nregime = \"{regime}\"\nlos = {los}\nscenario = \"D\"\n");
            text += &format!(
                "\n[[assignment]]\nlink = \"user-relay\"\nregime = \"{regime}\"\nlos = {los}\nscenario = \"S\"\n"
            );
        }
        text +=
            &format!("\n[[assignment]]\nlink = \"relay-bs\"\nregime = \"{regime}\"\nlos = true\nscenario = \"R\"\n");
    }
    ScenarioTable::from_toml_str(&text).unwrap()
}

/// Validation grid: relay distance x relay height x direct-link LOS. The
/// 30 m relay is above rooftop.
pub fn grid_configs() -> Vec<CellConfig> {
    let mut out = Vec::new();
    for (h, regime) in [(20.0, RegimeChoice::Vicinity), (30.0, RegimeChoice::BsLike)] {
        for los in [true, false] {
            for dr in [200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0] {
                out.push(CellConfig {
                    relay_height: h,
                    regime,
                    direct_los: los,
                    relay_distance: dr,
                    ..CellConfig::default()
                });
            }
        }
    }
    out
}

/// Measure of `{r in [0, hi] : inside(r)}` weighted by `r`, with every
/// transition located by bisection after a scan at `step`.
fn radial_measure(inside: impl Fn(f64) -> bool, hi: f64, step: f64) -> f64 {
    let n = (hi / step).ceil().max(1.0) as usize;
    let h = hi / n as f64;
    let mut total = 0.0;
    let mut start = if inside(0.0) { Some(0.0) } else { None };
    let mut prev = start.is_some();
    for i in 1..=n {
        let r = i as f64 * h;
        let now = inside(r);
        if now != prev {
            let a = (i - 1) as f64 * h;
            let edge = if prev {
                bisect_predicate(&inside, a, r, 1e-12)
            } else {
                bisect_predicate(|x| !inside(x), a, r, 1e-12)
            };
            match start.take() {
                Some(s) => total += 0.5 * (edge * edge - s * s),
                None => start = Some(edge),
            }
            prev = now;
        }
    }
    if let Some(s) = start {
        total += 0.5 * (hi * hi - s * s);
    }
    total
}

/// Fraction of the sector inside the REA by nested quadrature of the
/// membership indicator.
pub fn rea_fraction_by_quadrature(cd: &CharacteristicDistances) -> f64 {
    let num = integrate(
        |t| {
            let hi = edge_radius(t, cd.r_cov);
            radial_measure(|r| rea_contains(cd, UserPosition::new(r, t)), hi, 1.0)
        },
        0.0,
        FRAC_PI_6,
        1e-12,
        1e-9,
    );
    let den = integrate(|t| 0.5 * edge_radius(t, cd.r_cov).powi(2), 0.0, FRAC_PI_6, 1e-14, 0.0);
    num.value / den.value
}
