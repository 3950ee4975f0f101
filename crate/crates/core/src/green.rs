//! The phase-averaged Green's function `G(z) = ∫ ⟨δ₀, (H_x - z)⁻¹ δ₀⟩ dx`,
//! its Borel-transform twin `∫ dN(E')/(E' - z)`, the Thouless formula, normal
//! boundary values, the identity linking `G` to `∂L/∂E`, and the
//! non-tangential maximal function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::Frequency;
use crate::cocycle::{Orbit, PotentialSpec};
use crate::error::{Error, Result};
use crate::lyapunov::{self, validate_schedule, DEFAULT_SCHEDULE};
use crate::reduce::{pairwise_mean, pairwise_sum, par_collect};
use crate::spectrum::IdsTable;

pub const MIN_WINDOW: usize = 200;
/// Cells whose midpoint lies within this many cell widths of `z` are
/// integrated exactly instead of by the midpoint rule.
const NEAR_CELLS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenMethod {
    ResolventAverage,
    BorelOfIds,
    BoundaryExtrapolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub z: Complex64,
    pub value: Complex64,
    pub method: GreenMethod,
}

/// `max(200, ceil(8 / Im z))`.
pub fn default_window(im_z: f64) -> usize {
    MIN_WINDOW.max((8.0 / im_z).ceil() as usize)
}

/// `G_00` of `H - z` on a window of diagonal entries `diag[0..=2w]` centered
/// at index `w`, by continued fractions from both ends.
fn site_zero_resolvent(diag: &[f64], w: usize, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut right = Complex64::new(0.0, 0.0);
    for &v in diag[w + 1..].iter().rev() {
        right = one / (v - z - right);
    }
    let mut left = Complex64::new(0.0, 0.0);
    for &v in &diag[..w] {
        left = one / (v - z - left);
    }
    one / (diag[w] - z - left - right)
}

fn validate_phases(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::param("m", "needs at least one phase"));
    }
    Ok(())
}

/// Averages `G_00` over phases `j/m` for every `z`, sharing one orbit table of
/// half-width `w`.
fn resolvent_average(pot: &PotentialSpec, alpha: &Frequency, zs: &[Complex64], w: usize, m: usize) -> Vec<Complex64> {
    let orbit = Orbit::new(pot, alpha, -(w as i64), 2 * w + 1);
    let per_phase = par_collect(m, |j| {
        let mut diag = Vec::with_capacity(2 * w + 1);
        orbit.real_values(j as f64 / m as f64, &mut diag);
        zs.iter().map(|&z| site_zero_resolvent(&diag, w, z)).collect::<Vec<_>>()
    });
    (0..zs.len())
        .map(|i| {
            let column: Vec<Complex64> = per_phase.iter().map(|row| row[i]).collect();
            pairwise_mean(&column)
        })
        .collect()
}

fn validate_upper(z: Complex64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::param("z", format!("{z} is not in the open upper half-plane")));
    }
    Ok(())
}

/// Phase average of `⟨δ₀, (H_x - z)⁻¹ δ₀⟩` on sites `[-w, w]` with Dirichlet
/// boundary. `window = None` uses [`default_window`].
pub fn green_avg(
    pot: &PotentialSpec,
    alpha: &Frequency,
    z: Complex64,
    window: Option<usize>,
    m: usize,
) -> Result<GreenValue> {
    Ok(green_avg_many(pot, alpha, &[z], window, m)?.remove(0))
}

/// [`green_avg`] at several points. With `window = None` the window fits the
/// smallest `Im z`.
pub fn green_avg_many(
    pot: &PotentialSpec,
    alpha: &Frequency,
    zs: &[Complex64],
    window: Option<usize>,
    m: usize,
) -> Result<Vec<GreenValue>> {
    pot.validate()?;
    validate_phases(m)?;
    for &z in zs {
        validate_upper(z)?;
    }
    let w = match window {
        Some(w) if w < MIN_WINDOW => return Err(Error::param("window", format!("{w} < {MIN_WINDOW}"))),
        Some(w) => w,
        None => default_window(zs.iter().map(|z| z.im).fold(f64::INFINITY, f64::min)),
    };
    let values = resolvent_average(pot, alpha, zs, w, m);
    Ok(zs
        .iter()
        .zip(values)
        .map(|(&z, value)| GreenValue { z, value, method: GreenMethod::ResolventAverage })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub value: GreenValue,
    pub window: usize,
    /// `|G_w - G_2w|`.
    pub doubling_change: f64,
    /// False when the change exceeds `10 · tol`.
    pub window_ok: bool,
}

/// [`green_avg`] plus a rerun on the doubled window.
pub fn green_avg_checked(
    pot: &PotentialSpec,
    alpha: &Frequency,
    z: Complex64,
    window: Option<usize>,
    m: usize,
    tol: f64,
) -> Result<WindowCheck> {
    let w = window.unwrap_or_else(|| default_window(z.im));
    let value = green_avg(pot, alpha, z, Some(w), m)?;
    let doubled = green_avg(pot, alpha, z, Some(2 * w), m)?;
    let doubling_change = (value.value - doubled.value).norm();
    Ok(WindowCheck { value, window: w, doubling_change, window_ok: doubling_change <= 10.0 * tol })
}

fn validate_ids_for(ids: &IdsTable, z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !(z.im >= 0.0) || !z.im.is_finite() {
        return Err(Error::param("z", format!("{z} is not in the closed upper half-plane")));
    }
    let last = ids.n_values.len() - 1;
    if ids.n_values[0] > 0.01 || ids.n_values[last] < 0.99 {
        return Err(Error::param("ids", "grid does not cover the support of dN"));
    }
    if z.im == 0.0 {
        let h = ids.step();
        let distance = ids
            .cells()
            .filter(|c| c.2 > 0.0)
            .map(|(a, b, _)| {
                if z.re < a {
                    a - z.re
                } else if z.re > b {
                    z.re - b
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min);
        if distance < 2.0 * h {
            return Err(Error::PoleProximity { z: z.to_string(), distance, min: 2.0 * h });
        }
    }
    Ok(())
}

/// `∫ dN(E')/(E' - z)` with `dN` piecewise constant on the grid cells.
pub fn green_from_ids(ids: &IdsTable, z: Complex64) -> Result<GreenValue> {
    validate_ids_for(ids, z)?;
    let terms: Vec<Complex64> = ids
        .cells()
        .filter(|c| c.2 != 0.0)
        .map(|(a, b, mass)| {
            let h = b - a;
            let mid = 0.5 * (a + b);
            if (Complex64::new(mid, 0.0) - z).norm() > NEAR_CELLS * h {
                mass / (mid - z)
            } else {
                // ∫_a^b dt/(t - z) = Log(b - z) - Log(a - z); both arguments lie
                // in the closed lower half-plane, where Log is continuous
                let d = mass / h;
                d * ((b - z).ln() - (a - z).ln())
            }
        })
        .collect();
    Ok(GreenValue { z, value: pairwise_sum(&terms), method: GreenMethod::BorelOfIds })
}

/// Antiderivative of `s ↦ ln |s - iy|`.
fn log_modulus_antiderivative(s: f64, y: f64) -> f64 {
    let r2 = s * s + y * y;
    let log_part = if s == 0.0 { 0.0 } else { 0.5 * s * r2.ln() };
    let arc = if y > 0.0 { y * (s / y).atan() } else { 0.0 };
    log_part - s + arc
}

/// `∫ ln |E' - z| dN(E')`.
pub fn thouless(ids: &IdsTable, z: Complex64) -> Result<f64> {
    let z = Complex64::new(z.re, z.im.abs());
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::param("z", "must be finite"));
    }
    let last = ids.n_values.len() - 1;
    if ids.n_values[0] > 0.01 || ids.n_values[last] < 0.99 {
        return Err(Error::param("ids", "grid does not cover the support of dN"));
    }
    let terms: Vec<f64> = ids
        .cells()
        .filter(|c| c.2 != 0.0)
        .map(|(a, b, mass)| {
            let h = b - a;
            let mid = 0.5 * (a + b);
            if (Complex64::new(mid, 0.0) - z).norm() > NEAR_CELLS * h {
                mass * (mid - z).norm().ln()
            } else {
                let d = mass / h;
                d * (log_modulus_antiderivative(b - z.re, z.im) - log_modulus_antiderivative(a - z.re, z.im))
            }
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValue {
    pub e: f64,
    /// Extrapolated `Re G(E + i0)`.
    pub value: f64,
    pub residual: f64,
    /// Successive extrapolants disagree by more than `10 · residual`.
    pub nonconvergent: bool,
    /// `(ε, Re G(E + iε))` along the schedule.
    pub samples: Vec<(f64, f64)>,
}

impl BoundaryValue {
    pub fn as_green_value(&self) -> GreenValue {
        GreenValue {
            z: Complex64::new(self.e, 0.0),
            value: Complex64::new(self.value, 0.0),
            method: GreenMethod::BoundaryExtrapolation,
        }
    }
}

/// Intercept at 0 of the line through two points.
fn two_point_intercept(p: (f64, f64), q: (f64, f64)) -> f64 {
    p.1 - (q.1 - p.1) / (q.0 - p.0) * p.0
}

/// Linear-in-ε extrapolation of `Re G(E + iε)` to `ε = 0` over the three
/// smallest schedule entries.
///
/// The residual is the larger of the fit's pointwise deviation and the gap
/// between the three-point and the two-point (smallest ε) intercepts, so a
/// smooth curvature term enters the error estimate instead of being mistaken
/// for divergence.
pub fn normal_boundary_re_g(
    pot: &PotentialSpec,
    alpha: &Frequency,
    e: f64,
    schedule: Option<&[f64]>,
    m: usize,
) -> Result<BoundaryValue> {
    let schedule = schedule.unwrap_or(&DEFAULT_SCHEDULE);
    validate_schedule(schedule)?;
    if schedule.len() < 3 {
        return Err(Error::param("schedule", "needs at least three entries"));
    }
    let zs: Vec<Complex64> = schedule.iter().map(|&eps| Complex64::new(e, eps)).collect();
    // each point gets its own default window
    let mut samples = Vec::with_capacity(zs.len());
    for &z in &zs {
        samples.push((z.im, green_avg(pot, alpha, z, None, m)?.value.re));
    }
    let k = samples.len();
    let fit = |pts: &[(f64, f64)]| {
        let (slope, intercept) = lyapunov::least_squares(pts);
        let dev = pts.iter().map(|&(x, y)| (y - (intercept + slope * x)).abs()).fold(0.0, f64::max);
        (intercept, dev)
    };
    let (value, dev) = fit(&samples[k - 3..]);
    let two = two_point_intercept(samples[k - 2], samples[k - 1]);
    let residual = dev.max((value - two).abs());
    let nonconvergent = if k >= 4 {
        let (previous, _) = fit(&samples[k - 4..k - 1]);
        (value - previous).abs() > 10.0 * residual + 1e-6
    } else {
        false
    };
    Ok(BoundaryValue { e, value, residual, nonconvergent, samples })
}

/// Residual of `∂L(E + iε)/∂E = -Re G(E + iε)` with a central difference of
/// step `de` in the energy.
///
/// With `G(z) = ∫ dN(E')/(E' - z)` and `L(z) = ∫ ln |E' - z| dN(E')`,
/// differentiating under the integral gives `∂L/∂E = Re ∫ dN/(E - E') = -Re G`.
pub fn derivative_identity_residual(
    pot: &PotentialSpec,
    alpha: &Frequency,
    e: f64,
    eps: f64,
    de: f64,
    n: usize,
    m: usize,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    if !(de > 0.0) || de > eps / 10.0 {
        return Err(Error::param("de", format!("{de} is not in (0, eps/10]")));
    }
    let plus = lyapunov::lyapunov(pot, alpha, Complex64::new(e + de, eps), 0.0, n, m)?;
    let minus = lyapunov::lyapunov(pot, alpha, Complex64::new(e - de, eps), 0.0, n, m)?;
    let g = green_avg(pot, alpha, Complex64::new(e, eps), None, m)?;
    Ok(((plus - minus) / (2.0 * de) + g.value.re).abs())
}

/// Discretized cone `{x + iy : |x - E| < y, y_min ≤ y ≤ y_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cone {
    pub y_min: f64,
    pub y_max: f64,
    /// Log-spaced heights between `y_min` and `y_max`.
    pub levels: usize,
    /// Horizontal points per height besides the vertical one.
    pub aspect: usize,
}

impl Cone {
    pub fn validate(&self) -> Result<()> {
        if !(self.y_min > 0.0) || !(self.y_max >= self.y_min) || !self.y_max.is_finite() {
            return Err(Error::param("cone", "needs 0 < y_min <= y_max"));
        }
        if self.levels == 0 {
            return Err(Error::param("cone.levels", "must be positive"));
        }
        Ok(())
    }

    pub fn heights(&self) -> Vec<f64> {
        if self.levels == 1 || self.y_max == self.y_min {
            return vec![self.y_min];
        }
        let (lo, hi) = (self.y_min.ln(), self.y_max.ln());
        (0..self.levels).map(|i| (lo + (hi - lo) * i as f64 / (self.levels - 1) as f64).exp()).collect()
    }

    /// Offsets `t ∈ (-1, 1)` of the sampled points, scaled by the height.
    fn offsets(&self) -> Vec<f64> {
        let mut t: Vec<f64> = (0..self.aspect).map(|i| 2.0 * (i + 1) as f64 / (self.aspect + 1) as f64 - 1.0).collect();
        if !t.contains(&0.0) {
            t.push(0.0);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalProfile {
    pub e_grid: Vec<f64>,
    pub gstar: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    /// `σ^{3/4} · |{E : G*(E) > σ}|`.
    pub weak_type_stat: Vec<f64>,
    /// Largest entry of `weak_type_stat`.
    pub d_constant: f64,
    /// `∫ (G*)^{3/4}` on the grid, an upper bound for every statistic.
    pub chebyshev_bound: f64,
    pub y_min: f64,
}

/// Grid measure of each point: half the distance to each neighbour.
fn cell_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Non-tangential maximal function of `G` over a discretized cone, and the
/// weak-type statistic of its superlevel sets.
pub fn maximal_function(
    pot: &PotentialSpec,
    alpha: &Frequency,
    e_grid: &[f64],
    cone: &Cone,
    sigma_grid: &[f64],
    m: usize,
) -> Result<MaximalProfile> {
    pot.validate()?;
    crate::spectrum::validate_grid(e_grid)?;
    cone.validate()?;
    validate_phases(m)?;
    if sigma_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::param("sigma_grid", "entries must be positive"));
    }
    let offsets = cone.offsets();
    let mut gstar = vec![0.0f64; e_grid.len()];
    for y in cone.heights() {
        let zs: Vec<Complex64> =
            e_grid.iter().flat_map(|&e| offsets.iter().map(move |&t| Complex64::new(e + t * y, y))).collect();
        let values = resolvent_average(pot, alpha, &zs, default_window(y), m);
        for (i, chunk) in values.chunks_exact(offsets.len()).enumerate() {
            for g in chunk {
                gstar[i] = gstar[i].max(g.norm());
            }
        }
    }
    let weights = cell_weights(e_grid);
    let weak_type_stat: Vec<f64> = sigma_grid
        .iter()
        .map(|&s| {
            let measure: Vec<f64> = gstar.iter().zip(&weights).filter(|(g, _)| **g > s).map(|(_, w)| *w).collect();
            s.powf(0.75) * pairwise_sum(&measure)
        })
        .collect();
    let powered: Vec<f64> = gstar.iter().zip(&weights).map(|(g, w)| g.powf(0.75) * w).collect();
    Ok(MaximalProfile {
        e_grid: e_grid.to_vec(),
        gstar,
        sigma_grid: sigma_grid.to_vec(),
        d_constant: weak_type_stat.iter().copied().fold(0.0, f64::max),
        weak_type_stat,
        chebyshev_bound: pairwise_sum(&powered),
        y_min: cone.y_min,
    })
}
