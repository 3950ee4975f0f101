//! Potentials and Schrödinger cocycles.
//!
//! `V(x) = 2λ cos 2πx + ε v(x)` with `v` a real trigonometric polynomial, so
//! evaluation at a complex phase `x + iy` is exact. Transfer-matrix products
//! are renormalized every [`RESCALE_EVERY`] factors; the discarded magnitude
//! is kept in [`CocyclePoint::log_scale`].

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::Frequency;
use crate::error::{Error, Result};

pub const RESCALE_EVERY: usize = 32;
/// Frobenius norm ceiling `e^32`, compared on the squared norm.
const NORM_SQR_CEILING: f64 = 6.235149080811617e27;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub lambda: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub v: Vec<Harmonic>,
}

impl PotentialSpec {
    /// `V ≡ 0`, the free Laplacian.
    pub fn free() -> Self {
        Self::amo(0.0)
    }

    pub fn amo(lambda: f64) -> Self {
        PotentialSpec { lambda, epsilon: 0.0, v: Vec::new() }
    }

    pub fn with_perturbation(mut self, epsilon: f64, v: Vec<Harmonic>) -> Self {
        self.epsilon = epsilon;
        self.v = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::param("lambda", "must be finite"));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::param("epsilon", "must be finite"));
        }
        for h in &self.v {
            if h.k == 0 {
                return Err(Error::param("v", "harmonic index k must be at least 1"));
            }
            if !h.cos.is_finite() || !h.sin.is_finite() {
                return Err(Error::param("v", format!("non-finite coefficient at k={}", h.k)));
            }
        }
        Ok(())
    }

    /// `(k, a_k, b_k)` with `V(x) = Σ a_k cos 2πkx + b_k sin 2πkx`, merged by `k`.
    fn fourier(&self) -> Vec<(u32, f64, f64)> {
        let mut terms: Vec<(u32, f64, f64)> = vec![(1, 2.0 * self.lambda, 0.0)];
        for h in &self.v {
            let (a, b) = (self.epsilon * h.cos, self.epsilon * h.sin);
            match terms.iter_mut().find(|t| t.0 == h.k) {
                Some(t) => {
                    t.1 += a;
                    t.2 += b;
                }
                None => terms.push((h.k, a, b)),
            }
        }
        terms.sort_by_key(|t| t.0);
        terms
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.fourier()
            .iter()
            .map(|&(k, a, b)| {
                let (s, c) = (2.0 * PI * k as f64 * x).sin_cos();
                a * c + b * s
            })
            .sum()
    }

    /// Analytic extension `V(z)`.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.fourier()
            .iter()
            .map(|&(k, a, b)| {
                let w = z * (2.0 * PI * k as f64);
                w.cos() * a + w.sin() * b
            })
            .sum()
    }

    /// `2|λ| e^{2πh} + |ε| Σ (|c_k| + |s_k|) e^{2πkh}`, an upper bound for
    /// `sup_{|Im x| < h} |V(x)|`.
    pub fn analytic_norm_bound(&self, h: f64) -> f64 {
        let h = h.abs();
        2.0 * self.lambda.abs() * (2.0 * PI * h).exp()
            + self.epsilon.abs()
                * self.v.iter().map(|t| (t.cos.abs() + t.sin.abs()) * (2.0 * PI * t.k as f64 * h).exp()).sum::<f64>()
    }

    pub fn sup_norm_bound(&self) -> f64 {
        self.analytic_norm_bound(0.0)
    }

    /// `[-2 - ‖V‖∞, 2 + ‖V‖∞]`, which contains the spectrum for every phase.
    pub fn containment(&self) -> (f64, f64) {
        let r = 2.0 + self.sup_norm_bound();
        (-r, r)
    }

    /// Drops harmonics above `max_k`, returning the truncated potential and
    /// the sup-norm of what was removed.
    pub fn truncated(&self, max_k: u32) -> (PotentialSpec, f64) {
        let (kept, dropped): (Vec<Harmonic>, Vec<Harmonic>) = self.v.iter().partition(|h| h.k <= max_k);
        let tail = self.epsilon.abs() * dropped.iter().map(|h| h.cos.abs() + h.sin.abs()).sum::<f64>();
        (PotentialSpec { v: kept, ..self.clone() }, tail)
    }

    pub fn is_even(&self) -> bool {
        self.epsilon == 0.0 || self.v.iter().all(|h| h.sin == 0.0)
    }
}

/// Potential values along the orbit `x0 + jα`, `j ∈ start..start+len`.
///
/// The orbit offsets `jα mod 1` come from the extended-precision frequency,
/// one index at a time, and are shared between all starting phases; a phase
/// `x0` enters through the angle-addition formulas.
pub(crate) struct Orbit {
    fourier: Vec<(u32, f64, f64)>,
    /// `(cos, sin)(2πk·(jα mod 1))`, row-major by `j`.
    table: Vec<(f64, f64)>,
    len: usize,
}

impl Orbit {
    pub(crate) fn new(pot: &PotentialSpec, alpha: &Frequency, start: i64, len: usize) -> Self {
        let fourier = pot.fourier();
        let mut table = Vec::with_capacity(len * fourier.len());
        for j in 0..len as i64 {
            let f = alpha.frac_mul(start + j);
            for &(k, _, _) in &fourier {
                let (s, c) = (2.0 * PI * k as f64 * f).sin_cos();
                table.push((c, s));
            }
        }
        Orbit { fourier, table, len }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    fn phase_rotations(&self, x0: f64) -> Vec<(f64, f64)> {
        self.fourier
            .iter()
            .map(|&(k, _, _)| {
                let (s, c) = (2.0 * PI * k as f64 * x0).sin_cos();
                (c, s)
            })
            .collect()
    }

    /// `V(x0 + jα + iy)` for every orbit index.
    pub(crate) fn complex_values(&self, x0: f64, y: f64, out: &mut Vec<Complex64>) {
        let rot = self.phase_rotations(x0);
        let hyp: Vec<(f64, f64)> = self
            .fourier
            .iter()
            .map(|&(k, _, _)| {
                let t = 2.0 * PI * k as f64 * y;
                (t.cosh(), t.sinh())
            })
            .collect();
        let h = self.fourier.len();
        out.clear();
        out.extend(self.table.chunks_exact(h).map(|row| {
            let mut v = Complex64::new(0.0, 0.0);
            for i in 0..h {
                let (_, a, b) = self.fourier[i];
                let (cj, sj) = row[i];
                let (c0, s0) = rot[i];
                let (c, s) = (c0 * cj - s0 * sj, s0 * cj + c0 * sj);
                let (ch, sh) = hyp[i];
                // cos(u + iy) = cos u cosh y - i sin u sinh y
                // sin(u + iy) = sin u cosh y + i cos u sinh y
                v.re += (a * c + b * s) * ch;
                v.im += (b * c - a * s) * sh;
            }
            v
        }));
    }

    /// `V(x0 + jα)` for every orbit index.
    pub(crate) fn real_values(&self, x0: f64, out: &mut Vec<f64>) {
        let rot = self.phase_rotations(x0);
        let h = self.fourier.len();
        out.clear();
        out.extend(self.table.chunks_exact(h).map(|row| {
            let mut v = 0.0;
            for i in 0..h {
                let (_, a, b) = self.fourier[i];
                let (cj, sj) = row[i];
                let (c0, s0) = rot[i];
                v += a * (c0 * cj - s0 * sj) + b * (s0 * cj + c0 * sj);
            }
            v
        }));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mat2([[o, z], [z, o]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    fn norm_sqr_frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.norm_sqr_frobenius().sqrt()
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        let f2 = self.norm_sqr_frobenius();
        let d = self.det().norm();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        ((f2 + disc) / 2.0).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().flatten().all(|z| z.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// A renormalized product: the true product is `exp(log_scale) · matrix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocyclePoint {
    pub matrix: Mat2,
    pub log_scale: f64,
}

impl CocyclePoint {
    pub fn identity() -> Self {
        CocyclePoint { matrix: Mat2::identity(), log_scale: 0.0 }
    }

    /// `ln ‖product‖` in the operator norm.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.matrix.op_norm().ln()
    }

    /// Product of two renormalized matrices, `self · rhs`.
    pub fn compose(&self, rhs: &CocyclePoint) -> CocyclePoint {
        let m = self.matrix * rhs.matrix;
        let f = m.frobenius();
        CocyclePoint { matrix: m.scale(1.0 / f), log_scale: self.log_scale + rhs.log_scale + f.ln() }
    }

    /// The product with the scale restored; only meaningful while it fits in
    /// an `f64`.
    pub fn unscaled(&self) -> Mat2 {
        self.matrix.scale(self.log_scale.exp())
    }
}

/// `S_E^V(x) = [[E - V(x), -1], [1, 0]]`.
pub fn schrodinger_matrix(pot: &PotentialSpec, e: Complex64, x: Complex64) -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    Mat2([[e - pot.eval_complex(x), -one], [one, Complex64::new(0.0, 0.0)]])
}

/// Multiplies `S(V_{n-1}) ⋯ S(V_0)` for a precomputed potential sequence.
pub(crate) fn product_of(values: &[Complex64], e: Complex64) -> Result<CocyclePoint> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // rows of the running product
    let (mut r0, mut r1) = ([one, zero], [zero, one]);
    let mut log_scale = 0.0;
    let mut since = 0usize;
    for (step, &v) in values.iter().enumerate() {
        let a = e - v;
        let n0 = [a * r0[0] - r1[0], a * r0[1] - r1[1]];
        r1 = r0;
        r0 = n0;
        since += 1;
        let big = since == RESCALE_EVERY || {
            let f2 = r0[0].norm_sqr() + r0[1].norm_sqr() + r1[0].norm_sqr() + r1[1].norm_sqr();
            f2 > NORM_SQR_CEILING
        };
        if big {
            let f = (r0[0].norm_sqr() + r0[1].norm_sqr() + r1[0].norm_sqr() + r1[1].norm_sqr()).sqrt();
            if !f.is_finite() || f == 0.0 {
                return Err(Error::OverflowGuard { step });
            }
            let inv = 1.0 / f;
            for z in r0.iter_mut().chain(r1.iter_mut()) {
                *z *= inv;
            }
            log_scale += f.ln();
            since = 0;
        }
    }
    let mut matrix = Mat2([r0, r1]);
    if !matrix.is_finite() {
        return Err(Error::OverflowGuard { step: values.len() });
    }
    let f = matrix.frobenius();
    if f < 1.0 {
        matrix = matrix.scale(1.0 / f);
        log_scale += f.ln();
    }
    Ok(CocyclePoint { matrix, log_scale })
}

/// `𝒜_n(x) = A(x + (n-1)α) ⋯ A(x)` at `x = x0 + i·eps_imag`.
pub fn transfer_product(
    pot: &PotentialSpec,
    e: Complex64,
    alpha: &Frequency,
    x0: f64,
    eps_imag: f64,
    n: usize,
) -> Result<CocyclePoint> {
    pot.validate()?;
    if n == 0 {
        return Ok(CocyclePoint::identity());
    }
    let orbit = Orbit::new(pot, alpha, 0, n);
    let mut values = Vec::with_capacity(n);
    orbit.complex_values(x0, eps_imag, &mut values);
    product_of(&values, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_matrix() {
        let m = schrodinger_matrix(&PotentialSpec::free(), c(3.0), c(0.7));
        assert_eq!(m.0, [[c(3.0), c(-1.0)], [c(1.0), c(0.0)]]);
    }

    #[test]
    fn amo_matrix_at_origin() {
        let m = schrodinger_matrix(&PotentialSpec::amo(1.0), c(0.0), c(0.0));
        assert_eq!(m.0[0][0], c(-2.0));
        assert_eq!(m.0[0][1], c(-1.0));
    }

    #[test]
    fn unit_determinant() {
        let pot = PotentialSpec::amo(1.7).with_perturbation(0.3, vec![Harmonic { k: 2, cos: 1.0, sin: -0.5 }]);
        for i in 0..20 {
            let z = Complex64::new(0.13 * i as f64, 0.02 * i as f64);
            let m = schrodinger_matrix(&pot, Complex64::new(-1.0 + 0.1 * i as f64, 0.3), z);
            assert_abs_diff_eq!((m.det() - 1.0).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn orbit_values_match_direct_evaluation() {
        let pot = PotentialSpec::amo(2.0).with_perturbation(0.1, vec![Harmonic { k: 2, cos: 1.0, sin: 0.25 }]);
        let alpha = Frequency::golden_mean(40);
        let orbit = Orbit::new(&pot, &alpha, -7, 40);
        let mut cv = Vec::new();
        let mut rv = Vec::new();
        orbit.complex_values(0.31, 0.2, &mut cv);
        orbit.real_values(0.31, &mut rv);
        for j in 0..40 {
            let x = alpha.orbit_phase(0.31, j as i64 - 7);
            let direct = pot.eval_complex(Complex64::new(x, 0.2));
            assert!((cv[j] - direct).norm() < 1e-12);
            assert!((rv[j] - pot.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_and_single_products() {
        let pot = PotentialSpec::amo(1.3);
        let alpha = Frequency::golden_mean(30);
        let e = Complex64::new(0.4, 0.0);
        let p0 = transfer_product(&pot, e, &alpha, 0.2, 0.1, 0).unwrap();
        assert_eq!(p0, CocyclePoint::identity());
        let p1 = transfer_product(&pot, e, &alpha, 0.2, 0.1, 1).unwrap();
        let direct = schrodinger_matrix(&pot, e, Complex64::new(0.2, 0.1));
        let got = p1.unscaled();
        for i in 0..2 {
            for j in 0..2 {
                assert!((got.0[i][j] - direct.0[i][j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn real_inputs_give_real_products() {
        let pot = PotentialSpec::amo(2.0);
        let alpha = Frequency::golden_mean(30);
        let p = transfer_product(&pot, c(0.5), &alpha, 0.1, 0.0, 500).unwrap();
        assert!(p.matrix.is_real());
    }

    #[test]
    fn renormalized_determinant() {
        // det of the scaled product is e^{-2·log_scale}; measurable only
        // while the product stays well conditioned
        let alpha = Frequency::golden_mean(30);
        for (pot, n) in [(PotentialSpec::free(), 10_000), (PotentialSpec::amo(2.0), 12)] {
            let p = transfer_product(&pot, c(0.5), &alpha, 0.1, 0.0, n).unwrap();
            let expected = (-2.0 * p.log_scale).exp();
            assert!(((p.matrix.det().re - expected) / expected).abs() < 1e-6, "n={n}");
        }
        let p = transfer_product(&PotentialSpec::amo(2.0), c(0.5), &alpha, 0.1, 0.0, 10_000).unwrap();
        assert!(p.matrix.frobenius() >= 1.0 && p.matrix.frobenius() <= 32f64.exp());
    }

    #[test]
    fn semigroup_property() {
        let pot = PotentialSpec::amo(1.5).with_perturbation(0.2, vec![Harmonic { k: 3, cos: 0.4, sin: 0.1 }]);
        let alpha = Frequency::golden_mean(30);
        let e = Complex64::new(0.7, 0.0);
        let x = 0.123;
        let whole = transfer_product(&pot, e, &alpha, x, 0.05, 100).unwrap();
        let first = transfer_product(&pot, e, &alpha, x, 0.05, 50).unwrap();
        let second = transfer_product(&pot, e, &alpha, alpha.orbit_phase(x, 50), 0.05, 50).unwrap();
        let joined = second.compose(&first);
        let rel = (whole.log_norm() - joined.log_norm()).abs() / whole.log_norm().abs();
        assert!(rel < 1e-8, "{rel}");
    }

    #[test]
    fn norm_bounds() {
        let pot = PotentialSpec::amo(2.0).with_perturbation(0.5, vec![Harmonic { k: 2, cos: 1.0, sin: -1.0 }]);
        assert_abs_diff_eq!(pot.sup_norm_bound(), 5.0);
        let h = 0.1;
        let bound = pot.analytic_norm_bound(h);
        for i in 0..200 {
            let z = Complex64::new(i as f64 / 200.0, h * 0.999);
            assert!(pot.eval_complex(z).norm() <= bound);
        }
        assert_eq!(pot.containment(), (-7.0, 7.0));
    }

    #[test]
    fn truncation_reports_tail() {
        let pot = PotentialSpec::amo(1.0)
            .with_perturbation(0.5, vec![Harmonic { k: 2, cos: 1.0, sin: 0.0 }, Harmonic { k: 9, cos: 0.2, sin: 0.2 }]);
        let (t, tail) = pot.truncated(4);
        assert_eq!(t.v.len(), 1);
        assert_abs_diff_eq!(tail, 0.2);
    }

    #[test]
    fn json_schema() {
        let pot: PotentialSpec =
            serde_json::from_str(r#"{"lambda": 2.0, "epsilon": 0.1, "v": [{"k": 2, "cos": 1.0, "sin": 0.0}]}"#)
                .unwrap();
        assert_eq!(pot.v[0].k, 2);
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"lambda": 2.0, "mu": 1}"#).is_err());
    }

    #[test]
    fn extended_phases_match_compensated_accumulation() {
        // independent route: repeated addition carried in double-double
        let alpha = Frequency::golden_mean(40);
        let a = alpha.value_extended();
        let (mut hi, mut lo) = (0.0f64, 0.0f64);
        let mut worst: f64 = 0.0;
        for k in 1..=1_000_000i64 {
            let s = hi + a.hi;
            let bb = s - hi;
            let err = (hi - (s - bb)) + (a.hi - bb);
            lo += err + a.lo;
            hi = s;
            let fl = hi.floor();
            hi -= fl;
            if k % 997 == 0 || k > 999_000 {
                let acc = (hi + lo).rem_euclid(1.0);
                let d = (acc - alpha.frac_mul(k)).abs();
                worst = worst.max(d.min(1.0 - d));
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }
}
