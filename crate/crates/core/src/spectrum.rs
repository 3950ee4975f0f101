//! Finite-volume spectral data: Dirichlet truncations, the integrated density
//! of states, interval approximations of the spectrum and homogeneity
//! profiles of such interval unions.

use serde::{Deserialize, Serialize};

use crate::arithmetic::Frequency;
use crate::cocycle::{product_of, Orbit, PotentialSpec};
use crate::error::{Error, Result};
use crate::reduce::{pairwise_mean, par_collect};
use crate::rotation::{ids_from_rotation, rotation_on};

/// Absolute tolerance of the eigenvalue bisection.
pub const EIGEN_TOL: f64 = 1e-10;

/// Number of eigenvalues of the tridiagonal matrix with diagonal `diag` and
/// unit off-diagonal that are strictly below `e`.
///
/// Counts the negative pivots of the `LDLᵀ` factorization of `H - e`.
pub fn sturm_count(diag: &[f64], e: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for (i, &a) in diag.iter().enumerate() {
        q = if i == 0 { a - e } else { a - e - 1.0 / q };
        if q == 0.0 {
            q = -f64::MIN_POSITIVE.sqrt();
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Sturm count at `e` together with the Newton correction `p_n(e)/p_n'(e)`
/// of the characteristic polynomial, from one pass over the pivots.
fn count_and_newton(diag: &[f64], e: f64) -> (usize, f64) {
    let mut count = 0;
    let (mut q, mut dq) = (1.0f64, 0.0f64);
    // d/de ln p_n = Σ q_k'/q_k
    let mut log_deriv = 0.0;
    for (i, &a) in diag.iter().enumerate() {
        if i == 0 {
            q = a - e;
            dq = -1.0;
        } else {
            dq = -1.0 + dq / (q * q);
            q = a - e - 1.0 / q;
        }
        if q == 0.0 {
            q = -f64::MIN_POSITIVE.sqrt();
        }
        if q < 0.0 {
            count += 1;
        }
        log_deriv += dq / q;
    }
    (count, 1.0 / log_deriv)
}

/// The single eigenvalue in `(a, b)` by Newton steps safeguarded with
/// bisection; `ca` is the Sturm count at `a`.
fn isolated_root(diag: &[f64], mut a: f64, mut b: f64, ca: usize, tol: f64) -> f64 {
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let (c, step) = count_and_newton(diag, x);
        if c > ca {
            b = x;
        } else {
            a = x;
        }
        let next = x - step;
        if step.is_finite() && step.abs() <= 0.25 * tol && next >= a && next <= b {
            return next;
        }
        x = if step.is_finite() && next > a && next < b { next } else { 0.5 * (a + b) };
    }
    0.5 * (a + b)
}

/// All eigenvalues, ascending: recursive bisection on Sturm counts until each
/// eigenvalue is isolated, then safeguarded Newton to absolute tolerance
/// `tol`. Clusters narrower than `tol` are emitted at their midpoint.
pub fn tridiagonal_eigenvalues(diag: &[f64], tol: f64) -> Vec<f64> {
    if diag.is_empty() {
        return Vec::new();
    }
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 - tol;
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 + tol;
    let mut out = Vec::with_capacity(diag.len());
    let mut stack = vec![(lo, hi, 0usize, diag.len())];
    // Processing the upper half first off a stack yields ascending output.
    while let Some((a, b, ca, cb)) = stack.pop() {
        if ca == cb {
            continue;
        }
        if b - a <= tol {
            let mid = 0.5 * (a + b);
            out.extend(std::iter::repeat_n(mid, cb - ca));
            continue;
        }
        if cb - ca == 1 {
            out.push(isolated_root(diag, a, b, ca, tol));
            continue;
        }
        let mid = 0.5 * (a + b);
        let cm = sturm_count(diag, mid);
        stack.push((mid, b, cm, cb));
        stack.push((a, mid, ca, cm));
    }
    out
}

fn diagonal(pot: &PotentialSpec, alpha: &Frequency, x: f64, n: usize) -> Vec<f64> {
    let orbit = Orbit::new(pot, alpha, 0, n);
    let mut d = Vec::with_capacity(n);
    orbit.real_values(x, &mut d);
    d
}

/// Eigenvalues of `H` restricted to sites `0..n` with Dirichlet boundary.
pub fn truncated_eigenvalues(pot: &PotentialSpec, alpha: &Frequency, x: f64, n: usize) -> Result<Vec<f64>> {
    pot.validate()?;
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    Ok(tridiagonal_eigenvalues(&diagonal(pot, alpha, x, n), EIGEN_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdsMethod {
    Counting,
    Rotation,
}

/// `E_i ↦ N(E_i)` on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsTable {
    pub e_grid: Vec<f64>,
    pub n_values: Vec<f64>,
    pub method: IdsMethod,
    pub truncation: usize,
    pub phase_samples: usize,
}

pub fn validate_grid(e_grid: &[f64]) -> Result<()> {
    if e_grid.len() < 2 {
        return Err(Error::param("e_grid", "needs at least two points"));
    }
    if e_grid.iter().any(|e| !e.is_finite()) || e_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("e_grid", "must be finite and strictly increasing"));
    }
    Ok(())
}

/// `count` equispaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

impl IdsTable {
    pub fn new(
        e_grid: Vec<f64>,
        n_values: Vec<f64>,
        method: IdsMethod,
        truncation: usize,
        phase_samples: usize,
    ) -> Result<Self> {
        validate_grid(&e_grid)?;
        if n_values.len() != e_grid.len() {
            return Err(Error::param("n_values", "length differs from e_grid"));
        }
        if n_values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("n_values", "values must lie in [0, 1]"));
        }
        if n_values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("n_values", "must be nondecreasing"));
        }
        Ok(IdsTable { e_grid, n_values, method, truncation, phase_samples })
    }

    /// `(E_i, E_{i+1}, N(E_{i+1}) - N(E_i))` for every cell.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.e_grid.windows(2).zip(self.n_values.windows(2)).map(|(e, n)| (e[0], e[1], n[1] - n[0]))
    }

    /// Largest grid spacing.
    pub fn step(&self) -> f64 {
        self.e_grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Interpolated `N(E)`, clamped to the end values outside the grid.
    pub fn value_at(&self, e: f64) -> f64 {
        let g = &self.e_grid;
        if e <= g[0] {
            return self.n_values[0];
        }
        if e >= g[g.len() - 1] {
            return self.n_values[g.len() - 1];
        }
        let i = g.partition_point(|&x| x <= e) - 1;
        let t = (e - g[i]) / (g[i + 1] - g[i]);
        self.n_values[i] + t * (self.n_values[i + 1] - self.n_values[i])
    }

    /// `t·self + (1-t)·other` as measures on the same grid.
    pub fn convex_combination(&self, other: &IdsTable, t: f64) -> Result<IdsTable> {
        if self.e_grid != other.e_grid {
            return Err(Error::param("other", "grids differ"));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::param("t", "must lie in [0, 1]"));
        }
        let n_values = self.n_values.iter().zip(&other.n_values).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        Ok(IdsTable { n_values, ..self.clone() })
    }
}

/// `N(E) = (1/m) Σ_phases #{eigenvalues ≤ E} / n` on Dirichlet truncations.
pub fn ids_counting(pot: &PotentialSpec, alpha: &Frequency, e_grid: &[f64], n: usize, m: usize) -> Result<IdsTable> {
    pot.validate()?;
    validate_grid(e_grid)?;
    if n < 100 {
        return Err(Error::param("n", format!("{n} < 100 sites")));
    }
    if m < 8 {
        return Err(Error::param("m", format!("{m} < 8 phases")));
    }
    let orbit = Orbit::new(pot, alpha, 0, n);
    let counts = par_collect(m, |j| {
        let mut d = Vec::with_capacity(n);
        orbit.real_values(j as f64 / m as f64, &mut d);
        e_grid.iter().map(|&e| sturm_count(&d, e) as u64).collect::<Vec<u64>>()
    });
    // integer totals: exact in any order
    let n_values =
        (0..e_grid.len()).map(|i| counts.iter().map(|c| c[i]).sum::<u64>() as f64 / (n as f64 * m as f64)).collect();
    IdsTable::new(e_grid.to_vec(), n_values, IdsMethod::Counting, n, m)
}

/// `N(E) = 1 - 2ρ(E)`, projected onto nondecreasing sequences by a running
/// maximum (orbit-average noise is `O(1/n)`).
pub fn ids_rotation(pot: &PotentialSpec, alpha: &Frequency, e_grid: &[f64], n: usize, m: usize) -> Result<IdsTable> {
    pot.validate()?;
    validate_grid(e_grid)?;
    if n < 1000 || m < 16 {
        return Err(Error::param("n", "rotation numbers need n >= 1000 and m >= 16"));
    }
    let orbit = Orbit::new(pot, alpha, 0, n);
    let mut running: f64 = 0.0;
    let mut n_values = Vec::with_capacity(e_grid.len());
    for &e in e_grid {
        let r = rotation_on(&orbit, e, m);
        running = running.max(ids_from_rotation(r.rho)?);
        n_values.push(running);
    }
    IdsTable::new(e_grid.to_vec(), n_values, IdsMethod::Rotation, n, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSource {
    #[default]
    EigenvalueUnion,
    GrowthTest,
}

/// Sorted, pairwise disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumApprox {
    pub intervals: Vec<(f64, f64)>,
    pub margin: f64,
    #[serde(skip)]
    pub source: SpectrumSource,
}

impl SpectrumApprox {
    /// Sorts and merges overlapping intervals.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>, margin: f64, source: SpectrumSource) -> Result<Self> {
        if raw.iter().any(|&(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::param("intervals", "each interval needs finite a <= b"));
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match intervals.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => intervals.push((a, b)),
            }
        }
        Ok(SpectrumApprox { intervals, margin, source })
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, e: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= e && e <= b)
    }

    pub fn distance(&self, e: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| {
                if e < a {
                    a - e
                } else if e > b {
                    e - b
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `|(lo, hi) ∩ S|`.
    pub fn window_measure(&self, lo: f64, hi: f64) -> f64 {
        self.intervals.iter().map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0)).sum()
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }
}

/// Union over `m` phases of truncated eigenvalues, each dilated by `margin`,
/// merged and clipped to the containment interval.
pub fn spectrum_approx(
    pot: &PotentialSpec,
    alpha: &Frequency,
    n: usize,
    m: usize,
    margin: f64,
) -> Result<SpectrumApprox> {
    pot.validate()?;
    if n == 0 || m == 0 {
        return Err(Error::param("n", "n and m must be positive"));
    }
    if !(margin >= 3.0 / n as f64) {
        return Err(Error::param("margin", format!("{margin} < 3/n = {}", 3.0 / n as f64)));
    }
    let orbit = Orbit::new(pot, alpha, 0, n);
    let per_phase = par_collect(m, |j| {
        let mut d = Vec::with_capacity(n);
        orbit.real_values(j as f64 / m as f64, &mut d);
        tridiagonal_eigenvalues(&d, EIGEN_TOL)
    });
    let (lo, hi) = pot.containment();
    let raw = per_phase.into_iter().flatten().map(|ev| ((ev - margin).max(lo), (ev + margin).min(hi))).collect();
    SpectrumApprox::from_intervals(raw, margin, SpectrumSource::EigenvalueUnion)
}

/// Thresholds of the uniform-hyperbolicity proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCriteria {
    /// Required `min/mean` of the per-phase growth rates.
    pub stability: f64,
    /// Required lower bound on `|sin|` of the angle between the stable and
    /// unstable directions, over all sampled phases.
    pub min_angle: f64,
}

impl Default for GrowthCriteria {
    fn default() -> Self {
        GrowthCriteria { stability: 0.9, min_angle: 0.02 }
    }
}

/// Norm-growth and splitting statistics at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthVerdict {
    pub e: f64,
    /// Phase mean of `(1/n) ln ‖𝒜_n(x)‖`.
    pub mean: f64,
    pub min: f64,
    /// Smallest `|sin ∠(u(x), s(x))|` over phases.
    pub min_angle: f64,
    pub off_spectrum: bool,
}

/// Unstable direction at the end of `values` (forward iteration) and stable
/// direction at its start (backward iteration of the inverses).
fn unstable_direction(values: &[f64], e: f64) -> (f64, f64) {
    let (mut u0, mut u1) = (1.0f64, 0.3f64);
    for &v in values {
        let next = (e - v) * u0 - u1;
        u1 = u0;
        u0 = next;
        let r = u0.hypot(u1);
        u0 /= r;
        u1 /= r;
    }
    (u0, u1)
}

fn stable_direction(values: &[f64], e: f64) -> (f64, f64) {
    // S^{-1} = [[0, 1], [-1, E - V]]
    let (mut s0, mut s1) = (1.0f64, 0.3f64);
    for &v in values.iter().rev() {
        let prev = -s0 + (e - v) * s1;
        s0 = s1;
        s1 = prev;
        let r = s0.hypot(s1);
        s0 /= r;
        s1 /= r;
    }
    (s0, s1)
}

/// Uniform-hyperbolicity proxy: `E` is flagged off-spectrum when the growth
/// rate is clearly positive (`mean > 5 ln(n)/n`), uniform in the phase
/// (`min ≥ stability · mean`) and the stable and unstable directions stay
/// split at every sampled phase (`min_angle ≥ criteria.min_angle`).
///
/// Positive growth alone does not separate gaps from a spectrum carrying a
/// positive Lyapunov exponent; the splitting angle does, since it closes at
/// phases where `E` is close to an eigenvalue localized near the origin.
pub fn growth_test(
    pot: &PotentialSpec,
    alpha: &Frequency,
    energies: &[f64],
    n: usize,
    m: usize,
    criteria: GrowthCriteria,
) -> Result<Vec<GrowthVerdict>> {
    pot.validate()?;
    if n < 100 || m == 0 {
        return Err(Error::param("n", "growth test needs n >= 100 and m >= 1"));
    }
    if !(0.0..=1.0).contains(&criteria.stability) || !(0.0..=1.0).contains(&criteria.min_angle) {
        return Err(Error::param("criteria", "thresholds must lie in [0, 1]"));
    }
    // sites -n..n-1; the fiber over x sits between the two halves
    let orbit = Orbit::new(pot, alpha, -(n as i64), 2 * n);
    let floor = 5.0 * (n as f64).ln() / n as f64;
    energies
        .iter()
        .map(|&e| {
            let per_phase = par_collect(m, |j| {
                let mut real = Vec::with_capacity(2 * n);
                orbit.real_values(j as f64 / m as f64, &mut real);
                let (past, future) = real.split_at(n);
                let u = unstable_direction(past, e);
                let s = stable_direction(future, e);
                let angle = (u.0 * s.1 - u.1 * s.0).abs();
                let values: Vec<num_complex::Complex64> = future.iter().map(|&v| v.into()).collect();
                product_of(&values, e.into()).map(|p| (p.log_norm() / n as f64, angle))
            });
            let per_phase: Vec<(f64, f64)> = per_phase.into_iter().collect::<Result<_>>()?;
            let rates: Vec<f64> = per_phase.iter().map(|p| p.0).collect();
            let mean = pairwise_mean(&rates);
            let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
            let min_angle = per_phase.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let off_spectrum = mean > floor && min >= criteria.stability * mean && min_angle >= criteria.min_angle;
            Ok(GrowthVerdict { e, mean, min, min_angle, off_spectrum })
        })
        .collect()
}

/// Spectrum approximation from [`growth_test`] on an energy grid: maximal
/// runs of unflagged grid points, padded by half a grid step.
pub fn spectrum_by_growth(
    pot: &PotentialSpec,
    alpha: &Frequency,
    e_grid: &[f64],
    n: usize,
    m: usize,
    criteria: GrowthCriteria,
) -> Result<SpectrumApprox> {
    validate_grid(e_grid)?;
    let verdicts = growth_test(pot, alpha, e_grid, n, m, criteria)?;
    let half = e_grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max) / 2.0;
    let raw = verdicts.iter().filter(|v| !v.off_spectrum).map(|v| (v.e - half, v.e + half)).collect();
    SpectrumApprox::from_intervals(raw, half, SpectrumSource::GrowthTest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityProfile {
    pub sigma_grid: Vec<f64>,
    /// `min_E |(E-σ, E+σ) ∩ S| / σ` per σ.
    pub min_ratio: Vec<f64>,
    /// Point of `S` attaining the minimum.
    pub argmin: Vec<f64>,
    /// `min_ratio ≥ 1/2`.
    pub passing: Vec<bool>,
    /// Largest σ such that every grid σ' ≤ σ passes.
    pub passing_prefix: Option<f64>,
}

/// `2^-10, ..., 2^-2`.
pub fn default_sigma_grid() -> Vec<f64> {
    (2..=10).rev().map(|k| 2f64.powi(-k)).collect()
}

/// Candidate minimizers of `E ↦ |(E-σ, E+σ) ∩ S|` over `E ∈ S`.
///
/// The window measure is piecewise linear in `E` with kinks where `E` or
/// `E ± σ` crosses an endpoint, so its minimum over `S` is attained at an
/// endpoint of `S` or at some `endpoint ± σ` lying in `S`.
fn critical_points(s: &SpectrumApprox, sigma: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    for &(a, b) in &s.intervals {
        for p in [a, b] {
            pts.push(p);
            for q in [p - sigma, p + sigma] {
                if s.contains(q) {
                    pts.push(q);
                }
            }
        }
    }
    pts
}

/// Points spread evenly over `S` by arc length.
fn spread_points(s: &SpectrumApprox, count: usize) -> Vec<f64> {
    let total = s.measure();
    if count == 0 || total <= 0.0 {
        return Vec::new();
    }
    let mut pts = Vec::with_capacity(count);
    let mut iv = s.intervals.iter();
    let mut current = iv.next().copied();
    let mut consumed = 0.0;
    for i in 0..count {
        let target = total * (i as f64 + 0.5) / count as f64;
        while let Some((a, b)) = current {
            if target <= consumed + (b - a) {
                pts.push(a + (target - consumed));
                break;
            }
            consumed += b - a;
            current = iv.next().copied();
        }
    }
    pts
}

pub fn homogeneity_profile(s: &SpectrumApprox, sigma_grid: &[f64], e_samples: usize) -> Result<HomogeneityProfile> {
    let (lo, hi) = s.bounds().ok_or_else(|| Error::param("S", "empty interval union"))?;
    let span = hi - lo;
    for &sigma in sigma_grid {
        if !(sigma > 0.0) {
            return Err(Error::param("sigma_grid", "entries must be positive"));
        }
        if span > 0.0 && sigma >= span / 2.0 {
            return Err(Error::param("sigma_grid", format!("σ = {sigma} is not below half the span {span}")));
        }
    }
    let samples = spread_points(s, e_samples);
    let mut profile = HomogeneityProfile {
        sigma_grid: sigma_grid.to_vec(),
        min_ratio: Vec::with_capacity(sigma_grid.len()),
        argmin: Vec::with_capacity(sigma_grid.len()),
        passing: Vec::with_capacity(sigma_grid.len()),
        passing_prefix: None,
    };
    for &sigma in sigma_grid {
        let (mut best, mut at) = (f64::INFINITY, lo);
        for e in critical_points(s, sigma).into_iter().chain(samples.iter().copied()) {
            let r = s.window_measure(e - sigma, e + sigma) / sigma;
            if r < best {
                best = r;
                at = e;
            }
        }
        profile.min_ratio.push(best);
        profile.argmin.push(at);
        profile.passing.push(best >= 0.5);
    }
    let mut order: Vec<usize> = (0..sigma_grid.len()).collect();
    order.sort_by(|&i, &j| sigma_grid[i].total_cmp(&sigma_grid[j]));
    for i in order {
        if !profile.passing[i] {
            break;
        }
        profile.passing_prefix = Some(sigma_grid[i]);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_three_site_eigenvalues() {
        let g = Frequency::golden_mean(30);
        let ev = truncated_eigenvalues(&PotentialSpec::free(), &g, 0.3, 3).unwrap();
        let r2 = 2f64.sqrt();
        for (got, want) in ev.iter().zip([-r2, 0.0, r2]) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn single_site() {
        let g = Frequency::golden_mean(30);
        let pot = PotentialSpec::amo(1.3);
        let ev = truncated_eigenvalues(&pot, &g, 0.17, 1).unwrap();
        assert!((ev[0] - pot.eval(0.17)).abs() < 1e-9);
    }

    #[test]
    fn free_dirichlet_closed_form() {
        let g = Frequency::golden_mean(30);
        let n = 40;
        let ev = truncated_eigenvalues(&PotentialSpec::free(), &g, 0.0, n).unwrap();
        let mut want: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn gershgorin_containment() {
        let g = Frequency::golden_mean(30);
        let pot = PotentialSpec::amo(2.0);
        let ev = truncated_eigenvalues(&pot, &g, 0.4, 300).unwrap();
        let d = diagonal(&pot, &g, 0.4, 300);
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min) - 2.0;
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0;
        assert!(ev.iter().all(|&e| e >= lo - 1e-9 && e <= hi + 1e-9));
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sturm_count_matches_eigenvalue_count() {
        let g = Frequency::golden_mean(30);
        let pot = PotentialSpec::amo(1.4);
        let d = diagonal(&pot, &g, 0.21, 250);
        let ev = tridiagonal_eigenvalues(&d, EIGEN_TOL);
        for i in 0..400 {
            let e = -5.0 + 10.0 * i as f64 / 400.0 + 1e-4;
            if ev.iter().any(|&x| (x - e).abs() < 1e-8) {
                continue;
            }
            assert_eq!(sturm_count(&d, e), ev.iter().filter(|&&x| x < e).count());
        }
    }

    proptest::proptest! {
        #[test]
        fn eigenvalues_interlace_with_counts(diag in proptest::collection::vec(-4.0f64..4.0, 1..60)) {
            let ev = tridiagonal_eigenvalues(&diag, EIGEN_TOL);
            proptest::prop_assert_eq!(ev.len(), diag.len());
            for (i, &x) in ev.iter().enumerate() {
                // each eigenvalue sits where the count steps
                proptest::prop_assert!(sturm_count(&diag, x - 1e-9) <= i);
                proptest::prop_assert!(sturm_count(&diag, x + 1e-9) > i);
            }
            let trace: f64 = diag.iter().sum();
            proptest::prop_assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-7);
        }
    }

    #[test]
    fn homogeneity_of_an_interval() {
        let s = SpectrumApprox::from_intervals(vec![(-2.0, 2.0)], 0.0, SpectrumSource::EigenvalueUnion).unwrap();
        let p = homogeneity_profile(&s, &[0.1], 100).unwrap();
        assert!((p.min_ratio[0] - 1.0).abs() < 1e-12);
        assert!(p.passing[0]);
        assert!(p.argmin[0] == -2.0 || p.argmin[0] == 2.0);
    }

    #[test]
    fn homogeneity_wide_gap() {
        let s = SpectrumApprox::from_intervals(vec![(10.0, 11.0), (0.0, 1.0)], 0.0, SpectrumSource::EigenvalueUnion)
            .unwrap();
        let p = homogeneity_profile(&s, &[0.5], 50).unwrap();
        assert!((p.min_ratio[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneity_preconditions() {
        let empty = SpectrumApprox::from_intervals(vec![], 0.0, SpectrumSource::EigenvalueUnion).unwrap();
        assert!(homogeneity_profile(&empty, &[0.1], 10).is_err());
        let s = SpectrumApprox::from_intervals(vec![(0.0, 1.0)], 0.0, SpectrumSource::EigenvalueUnion).unwrap();
        assert!(homogeneity_profile(&s, &[0.6], 10).is_err());
        assert!(homogeneity_profile(&s, &[-0.1], 10).is_err());
    }

    #[test]
    fn passing_prefix_stops_at_first_failure() {
        // isolated short piece fails at large σ only
        let s = SpectrumApprox::from_intervals(
            vec![(0.0, 1.0), (1.5, 1.51), (2.0, 3.0)],
            0.0,
            SpectrumSource::EigenvalueUnion,
        )
        .unwrap();
        let p = homogeneity_profile(&s, &default_sigma_grid(), 0).unwrap();
        assert!(p.passing_prefix.is_some());
        assert!(!p.passing.iter().all(|&b| b));
        let prefix = p.passing_prefix.unwrap();
        assert!(prefix < 0.02);
    }

    #[test]
    fn merge_and_queries() {
        let s = SpectrumApprox::from_intervals(
            vec![(2.0, 3.0), (0.0, 1.0), (0.5, 1.5)],
            0.1,
            SpectrumSource::EigenvalueUnion,
        )
        .unwrap();
        assert_eq!(s.intervals, vec![(0.0, 1.5), (2.0, 3.0)]);
        assert!((s.measure() - 2.5).abs() < 1e-12);
        assert!((s.window_measure(1.0, 2.5) - 1.0).abs() < 1e-12);
        assert!((s.distance(1.7) - 0.2).abs() < 1e-12);
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json, serde_json::json!({"intervals": [[0.0, 1.5], [2.0, 3.0]], "margin": 0.1}));
    }

    #[test]
    fn ids_table_validation() {
        assert!(IdsTable::new(vec![0.0, 1.0], vec![0.5, 0.4], IdsMethod::Counting, 1, 1).is_err());
        assert!(IdsTable::new(vec![0.0, 0.0], vec![0.0, 0.4], IdsMethod::Counting, 1, 1).is_err());
        assert!(IdsTable::new(vec![0.0, 1.0], vec![0.0, 1.2], IdsMethod::Counting, 1, 1).is_err());
        let t = IdsTable::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.0], IdsMethod::Counting, 1, 1).unwrap();
        assert!((t.value_at(1.5) - 0.75).abs() < 1e-12);
        assert_eq!(t.value_at(-3.0), 0.0);
    }
}
