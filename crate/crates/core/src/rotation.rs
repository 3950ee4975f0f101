//! Fibered rotation number of Schrödinger cocycles and the relation
//! `N(E) = 1 - 2ρ(E)`.
//!
//! The lift is tracked on unit vectors `w = (u, v)` kept in the half-plane
//! `u ≥ 0`. The image `S w = ((E-V)u - v, u)` then lies in the closed upper
//! half-plane, so the angular increment from `w` to `S w` is confined to
//! `(-π/2, 3π/2)` and is recovered from one `atan2` without branch guessing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arithmetic::Frequency;
use crate::cocycle::{Orbit, PotentialSpec};
use crate::error::{Error, Result};
use crate::reduce::{pairwise_mean, par_collect};

/// Vectors this close to the vertical sit on the branch boundary and are
/// nudged by [`NUDGE`] radians.
pub const DEGENERATE_TOL: f64 = 1e-12;
pub const NUDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationResult {
    /// Folded into `[0, 1/2]`.
    pub rho: f64,
    /// Mean lift increment per step, in turns, before folding.
    pub raw: f64,
    pub n_used: usize,
    pub phase_samples: usize,
    /// `max - min` of the per-phase estimates.
    pub spread: f64,
    pub degenerate_events: u64,
}

impl RotationResult {
    /// A spread above `10/n` means the orbit averages have not settled.
    pub fn reliable(&self) -> bool {
        self.spread <= 10.0 / self.n_used as f64
    }
}

/// `min(r mod 1, 1 - r mod 1)`.
pub fn fold(raw: f64) -> f64 {
    let r = raw.rem_euclid(1.0);
    r.min(1.0 - r)
}

/// Sum of lift increments (radians) along one orbit.
fn lift(values: &[f64], e: f64) -> (f64, u64) {
    let (mut u, mut v) = (1.0f64, 0.0f64);
    let mut total = 0.0;
    let mut events = 0u64;
    for &vx in values {
        if u.abs() < DEGENERATE_TOL {
            let (s, c) = NUDGE.sin_cos();
            let (nu, nv) = (c * u - s * v, s * u + c * v);
            u = nu;
            v = nv;
            events += 1;
        }
        let a = e - vx;
        let (x1, y1) = (a * u - v, u);
        let cross = u * y1 - v * x1;
        let dot = u * x1 + v * y1;
        let mut d = cross.atan2(dot);
        if d <= -PI / 2.0 {
            d += 2.0 * PI;
        }
        total += d;
        let r = x1.hypot(y1);
        u = x1 / r;
        v = y1 / r;
        if u < 0.0 {
            u = -u;
            v = -v;
        }
    }
    (total, events)
}

pub fn rotation_number(pot: &PotentialSpec, alpha: &Frequency, e: f64, n: usize, m: usize) -> Result<RotationResult> {
    pot.validate()?;
    if n < 1000 {
        return Err(Error::param("n", format!("{n} < 1000 iterates")));
    }
    if m < 16 {
        return Err(Error::param("m", format!("{m} < 16 phases")));
    }
    let orbit = Orbit::new(pot, alpha, 0, n);
    Ok(rotation_on(&orbit, e, m))
}

pub(crate) fn rotation_on(orbit: &Orbit, e: f64, m: usize) -> RotationResult {
    let n = orbit.len();
    let per_phase = par_collect(m, |j| {
        let mut values = Vec::with_capacity(n);
        orbit.real_values(j as f64 / m as f64, &mut values);
        let (total, events) = lift(&values, e);
        (total / (2.0 * PI * n as f64), events)
    });
    let estimates: Vec<f64> = per_phase.iter().map(|p| p.0).collect();
    let raw = pairwise_mean(&estimates);
    let (lo, hi) = estimates.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    RotationResult {
        rho: fold(raw),
        raw,
        n_used: n,
        phase_samples: m,
        spread: hi - lo,
        degenerate_events: per_phase.iter().map(|p| p.1).sum(),
    }
}

/// Rotation numbers on a grid of energies, sharing one orbit table.
pub fn rotation_numbers(
    pot: &PotentialSpec,
    alpha: &Frequency,
    energies: &[f64],
    n: usize,
    m: usize,
) -> Result<Vec<RotationResult>> {
    pot.validate()?;
    if n < 1000 {
        return Err(Error::param("n", format!("{n} < 1000 iterates")));
    }
    if m < 16 {
        return Err(Error::param("m", format!("{m} < 16 phases")));
    }
    let orbit = Orbit::new(pot, alpha, 0, n);
    Ok(energies.iter().map(|&e| rotation_on(&orbit, e, m)).collect())
}

/// `N = 1 - 2ρ`.
pub fn ids_from_rotation(rho: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&rho) {
        return Err(Error::RotationDomain(rho));
    }
    Ok(1.0 - 2.0 * rho)
}
