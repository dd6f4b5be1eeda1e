//! Hexagonal six-sector cell geometry.
//!
//! A sector spans `|theta| <= pi/6` around the relay axis. Its outer edge is the
//! hexagon side through the vertex `(R_cov, 0)`, so the sector is the triangle
//! with apex at the base station and `r_max(theta) = sqrt(3) R_cov /
//! (sin|theta| + sqrt(3) cos theta)`.

use std::f64::consts::{FRAC_PI_6, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Half-angle of a sector.
pub const HALF_SECTOR: f64 = FRAC_PI_6;

/// User location in polar coordinates around the base station; the relay
/// sits on `theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPosition {
    pub r: f64,
    pub theta: f64,
}

impl UserPosition {
    pub fn new(r: f64, theta: f64) -> Self {
        UserPosition { r, theta }
    }

    /// Maps any polar position into the reference sector by the six-fold
    /// rotational symmetry of the cell.
    pub fn folded(r: f64, theta: f64) -> Self {
        let sector = PI / 3.0;
        let t = (theta + HALF_SECTOR).rem_euclid(sector) - HALF_SECTOR;
        UserPosition { r, theta: t }
    }

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        UserPosition {
            r: x.hypot(y),
            theta: y.atan2(x),
        }
    }

    pub fn x(&self) -> f64 {
        self.r * self.theta.cos()
    }

    pub fn y(&self) -> f64 {
        self.r * self.theta.sin()
    }
}

/// Distance between the user and a relay at `(relay_distance, 0)`.
#[inline]
pub fn user_relay_distance(user: UserPosition, relay_distance: f64) -> f64 {
    let sq = relay_distance * relay_distance + user.r * user.r - 2.0 * relay_distance * user.r * user.theta.cos();
    sq.max(0.0).sqrt()
}

/// Distance from the base station to the hexagon edge along `theta`.
#[inline]
pub fn r_max(theta: f64, r_cov: f64) -> f64 {
    let t = theta.abs();
    SQRT3 * r_cov / (t.sin() + SQRT3 * t.cos())
}

pub fn sector_contains(user: UserPosition, r_cov: f64) -> bool {
    user.theta.abs() <= HALF_SECTOR && user.r <= r_max(user.theta, r_cov)
}

/// Area of one sector (a sixth of the hexagon of radius `r_cov`).
pub fn sector_area(r_cov: f64) -> f64 {
    SQRT3 / 4.0 * r_cov * r_cov
}

/// Uniform user drops over a sector, by rejection from the enclosing wedge.
#[derive(Debug, Clone)]
pub struct SectorSampler {
    rng: ChaCha8Rng,
    r_cov: f64,
}

impl SectorSampler {
    pub fn new(r_cov: f64, seed: u64) -> Self {
        Self::with_stream(r_cov, seed, 0)
    }

    /// Independent sub-stream `stream` of the generator seeded by `seed`.
    pub fn with_stream(r_cov: f64, seed: u64, stream: u64) -> Self {
        assert!(r_cov > 0.0, "coverage radius must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SectorSampler { rng, r_cov }
    }

    pub fn sample(&mut self) -> UserPosition {
        loop {
            let r = self.r_cov * self.rng.random::<f64>().sqrt();
            let theta = HALF_SECTOR * (2.0 * self.rng.random::<f64>() - 1.0);
            let p = UserPosition { r, theta };
            if sector_contains(p, self.r_cov) {
                return p;
            }
        }
    }
}

impl Iterator for SectorSampler {
    type Item = UserPosition;

    fn next(&mut self) -> Option<UserPosition> {
        Some(self.sample())
    }
}
