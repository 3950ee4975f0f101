//! Lyapunov exponents, complexified Lyapunov exponents `L_ε(E)`, the
//! acceleration `ω(E)` and the regime classification built on them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::Frequency;
use crate::cocycle::{product_of, Orbit, PotentialSpec};
use crate::error::{Error, Result};
use crate::reduce::{pairwise_mean, par_collect};

/// `2^-3, ..., 2^-9`.
pub const DEFAULT_SCHEDULE: [f64; 7] = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125];
/// Number of trailing schedule points in the slope fit.
pub const FIT_POINTS: usize = 4;
/// Largest distance to an integer at which the slope is quantized.
pub const SNAP_THRESHOLD: f64 = 0.2;
/// Allowed violation of monotonicity/convexity of `ε ↦ L_ε`.
pub const CONVEXITY_TOL: f64 = 1e-3;
pub const DEFAULT_REGIME_TOL: f64 = 0.01;

pub fn validate_sampling(n: usize, m: usize) -> Result<()> {
    if n < 100 {
        return Err(Error::param("n", format!("{n} < 100 iterates")));
    }
    if m < 16 || !m.is_power_of_two() {
        return Err(Error::param("m", format!("{m} is not a power of two >= 16")));
    }
    Ok(())
}

fn mean_log_norm(orbit: &Orbit, e: Complex64, eps_imag: f64, m: usize) -> Result<f64> {
    let per_phase = par_collect(m, |j| {
        let mut values = Vec::with_capacity(orbit.len());
        orbit.complex_values(j as f64 / m as f64, eps_imag, &mut values);
        product_of(&values, e).map(|p| p.log_norm())
    });
    let per_phase: Vec<f64> = per_phase.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_mean(&per_phase) / orbit.len() as f64)
}

/// `(1/n) ∫ ln ‖𝒜_n(x + i·eps_imag)‖ dx` on the equispaced phases `j/m`.
///
/// `e` may be complex, which gives `L` at a complex energy (the quantity in
/// the Thouless formula).
pub fn lyapunov(
    pot: &PotentialSpec,
    alpha: &Frequency,
    e: Complex64,
    eps_imag: f64,
    n: usize,
    m: usize,
) -> Result<f64> {
    pot.validate()?;
    validate_sampling(n, m)?;
    if !(eps_imag >= 0.0) {
        return Err(Error::param("eps_imag", "must be nonnegative"));
    }
    let orbit = Orbit::new(pot, alpha, 0, n);
    mean_log_norm(&orbit, e, eps_imag, m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovProfile {
    pub e: Complex64,
    /// Strictly decreasing imaginary phase shifts.
    pub eps_grid: Vec<f64>,
    /// `L_ε(E)` for each entry of `eps_grid`.
    pub l_values: Vec<f64>,
    /// `L_0(E) = L(E)`.
    pub l_zero: f64,
    /// Least-squares slope of `L_ε` against `2πε` on the trailing points.
    pub slope: f64,
    pub intercept: f64,
    pub omega_int: Option<i64>,
    pub omega_residual: f64,
    /// Largest violation of monotonicity or convexity in `ε`.
    pub convexity_defect: f64,
    pub healthy: bool,
}

impl LyapunovProfile {
    /// `(ε, L)` pairs in increasing `ε`, starting at `ε = 0`.
    pub fn ascending(&self) -> Vec<(f64, f64)> {
        std::iter::once((0.0, self.l_zero))
            .chain(self.eps_grid.iter().copied().zip(self.l_values.iter().copied()).rev())
            .collect()
    }
}

pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn convexity_defect(points: &[(f64, f64)]) -> f64 {
    let mut defect: f64 = 0.0;
    for w in points.windows(2) {
        defect = defect.max(w[0].1 - w[1].1);
    }
    for w in points.windows(3) {
        let ((a, la), (b, lb), (c, lc)) = (w[0], w[1], w[2]);
        let chord = la + (lc - la) * (b - a) / (c - a);
        defect = defect.max(lb - chord);
    }
    defect
}

pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.len() < 2 {
        return Err(Error::param("schedule", "needs at least two entries"));
    }
    if schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::param("schedule", "entries must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("schedule", "must be strictly decreasing"));
    }
    Ok(())
}

/// Samples `ε ↦ L_ε(E)` on `schedule` and at 0 and estimates the
/// acceleration `lim (L_ε - L_0)/(2πε)` from the trailing points.
pub fn acceleration(
    pot: &PotentialSpec,
    alpha: &Frequency,
    e: f64,
    schedule: &[f64],
    n: usize,
    m: usize,
) -> Result<LyapunovProfile> {
    pot.validate()?;
    validate_sampling(n, m)?;
    validate_schedule(schedule)?;
    let orbit = Orbit::new(pot, alpha, 0, n);
    let ec = Complex64::new(e, 0.0);
    let l_values = schedule.iter().map(|&eps| mean_log_norm(&orbit, ec, eps, m)).collect::<Result<Vec<f64>>>()?;
    let l_zero = mean_log_norm(&orbit, ec, 0.0, m)?;

    let tail = &schedule[schedule.len().saturating_sub(FIT_POINTS)..];
    let tail_l = &l_values[l_values.len() - tail.len()..];
    let fit: Vec<(f64, f64)> = tail.iter().zip(tail_l).map(|(&eps, &l)| (2.0 * PI * eps, l)).collect();
    let (slope, intercept) = least_squares(&fit);
    let nearest = slope.round();
    let omega_residual = (slope - nearest).abs();
    let omega_int = (omega_residual <= SNAP_THRESHOLD).then_some(nearest as i64);

    let mut profile = LyapunovProfile {
        e: ec,
        eps_grid: schedule.to_vec(),
        l_values,
        l_zero,
        slope,
        intercept,
        omega_int,
        omega_residual,
        convexity_defect: 0.0,
        healthy: true,
    };
    profile.convexity_defect = convexity_defect(&profile.ascending());
    profile.healthy = profile.convexity_defect <= CONVEXITY_TOL;
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    Subcritical,
    Critical,
    Supercritical,
    UniformlyHyperbolicOrOffSpectrum,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::Subcritical => "subcritical",
            RegimeLabel::Critical => "critical",
            RegimeLabel::Supercritical => "supercritical",
            RegimeLabel::UniformlyHyperbolicOrOffSpectrum => "uniformly-hyperbolic-or-off-spectrum",
        }
    }
}

/// Sub/critical/supercritical from `L(E)` and a quantized acceleration.
pub fn classify_regime(l0: f64, omega: Option<i64>, tol: f64) -> Result<RegimeLabel> {
    let omega = omega.ok_or(Error::Unclassifiable { residual: f64::NAN })?;
    let positive = l0 > tol;
    Ok(match (positive, omega >= 1) {
        (false, false) => RegimeLabel::Subcritical,
        (false, true) => RegimeLabel::Critical,
        (true, true) => RegimeLabel::Supercritical,
        (true, false) => RegimeLabel::UniformlyHyperbolicOrOffSpectrum,
    })
}

/// [`classify_regime`] on a computed profile.
pub fn classify_profile(profile: &LyapunovProfile, tol: f64) -> Result<RegimeLabel> {
    classify_regime(profile.l_zero, profile.omega_int, tol)
        .map_err(|_| Error::Unclassifiable { residual: profile.omega_residual })
}
