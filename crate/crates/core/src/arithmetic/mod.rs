//! Arithmetic of the frequency: continued fractions, the strong Diophantine
//! condition, the resonance sets `Θ^τ_γ` and the exponent `β(α)`.
//!
//! Convergents are indexed from 1: for `α = [0; a_1, a_2, ...]` the stored
//! pairs are `p_k/q_k` with `q_1 = a_1`.

mod extended;

pub use extended::Extended;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of quotients extracted from a decimal literal
/// when no explicit depth is requested.
pub const AUTO_DEPTH: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub p: u128,
    pub q: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    value: Extended,
    quotients: Vec<u64>,
    convergents: Vec<Convergent>,
    rational: bool,
}

/// Frequency as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FrequencyLiteral {
    Decimal { decimal: String },
    Quotients { quotients: Vec<u64> },
}

impl FrequencyLiteral {
    pub fn resolve(&self) -> Result<Frequency> {
        match self {
            FrequencyLiteral::Decimal { decimal } => Frequency::from_decimal_auto(decimal),
            FrequencyLiteral::Quotients { quotients } => Frequency::from_quotients(quotients),
        }
    }

    pub fn golden_mean() -> Self {
        FrequencyLiteral::Quotients { quotients: vec![1; 40] }
    }
}

fn convergents_of(quotients: &[u64]) -> Result<Vec<Convergent>> {
    let (mut p_prev, mut q_prev) = (1u128, 0u128);
    let (mut p, mut q) = (0u128, 1u128);
    let mut out = Vec::with_capacity(quotients.len());
    for (i, &a) in quotients.iter().enumerate() {
        let a = a as u128;
        let overflow = || Error::ConvergentOverflow(i + 1);
        let p_next = a.checked_mul(p).and_then(|v| v.checked_add(p_prev)).ok_or_else(overflow)?;
        let q_next = a.checked_mul(q).and_then(|v| v.checked_add(q_prev)).ok_or_else(overflow)?;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        out.push(Convergent { p, q });
    }
    Ok(out)
}

fn parse_decimal(s: &str) -> Result<(BigRational, BigRational)> {
    let bad = || Error::MalformedDecimal(s.to_string());
    let t = s.trim();
    let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{}{}", int_part, frac_part);
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let half_unit = BigRational::new(BigInt::one(), den.clone() * 2);
    Ok((BigRational::new(num, den), half_unit))
}

/// Expands the number known to lie in `center ± half_width`.
///
/// A quotient is accepted only if both interval endpoints produce it. If the
/// exact expansion of `center` terminates, the literal is taken as the exact
/// rational it denotes.
fn expand(center: &BigRational, half_width: &BigRational, depth: usize, strict: bool) -> Result<(Vec<u64>, bool)> {
    let mut x = center.clone();
    let mut lo = center - half_width;
    let mut hi = center + half_width;
    let mut quotients = Vec::new();
    for k in 0..depth {
        let inv = x.recip();
        let a = inv.numer().div_floor(inv.denom());
        let rem = &inv - BigRational::from_integer(a.clone());
        let a_u64 = a.to_u64().ok_or(Error::ConvergentOverflow(k + 1))?;
        if rem.is_zero() {
            quotients.push(a_u64);
            return Ok((quotients, true));
        }
        let certified = lo.is_positive() && {
            let a_lo = hi.recip().floor();
            let a_hi = lo.recip().floor();
            a_lo.numer() == &a && a_hi.numer() == &a && a_lo.is_integer() && a_hi.is_integer()
        };
        if !certified {
            if strict {
                return Err(Error::PrecisionExhausted { certified: k });
            }
            break;
        }
        let a_rat = BigRational::from_integer(a);
        let new_lo = hi.recip() - &a_rat;
        let new_hi = lo.recip() - &a_rat;
        lo = new_lo;
        hi = new_hi;
        x = rem;
        quotients.push(a_u64);
    }
    Ok((quotients, false))
}

impl Frequency {
    fn from_center(center: BigRational, half_width: BigRational, depth: usize, strict: bool) -> Result<Self> {
        if depth == 0 {
            return Err(Error::param("depth", "must be at least 1"));
        }
        if !center.is_positive() || center >= BigRational::one() {
            return Err(Error::param("x", format!("{} is not in (0, 1)", center.to_f64().unwrap_or(f64::NAN))));
        }
        let (quotients, rational) = expand(&center, &half_width, depth, strict)?;
        if quotients.is_empty() {
            return Err(Error::PrecisionExhausted { certified: 0 });
        }
        let convergents = convergents_of(&quotients)?;
        Ok(Frequency { value: Extended::from_ratio(&center), quotients, convergents, rational })
    }

    /// Parses a decimal literal and extracts `depth` certified quotients.
    pub fn from_decimal(s: &str, depth: usize) -> Result<Self> {
        let (center, half) = parse_decimal(s)?;
        Self::from_center(center, half, depth, true)
    }

    /// Parses a decimal literal, keeping every quotient its digits certify
    /// (at most [`AUTO_DEPTH`]).
    pub fn from_decimal_auto(s: &str) -> Result<Self> {
        let (center, half) = parse_decimal(s)?;
        Self::from_center(center, half, AUTO_DEPTH, false)
    }

    /// `α = [0; a_1, ..., a_d, 1, 1, 1, ...]`.
    ///
    /// The list is exact; the all-ones tail makes the value irrational while
    /// keeping the stored quotients untouched.
    pub fn from_quotients(quotients: &[u64]) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::param("quotients", "empty list"));
        }
        if quotients.contains(&0) {
            return Err(Error::param("quotients", "partial quotients must be positive"));
        }
        let convergents = convergents_of(quotients)?;

        let target = num_traits::pow(BigInt::from(10), 36);
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p, mut q) = (BigInt::zero(), BigInt::one());
        let mut i = 0;
        while i < quotients.len() || q < target {
            let a = BigInt::from(*quotients.get(i).unwrap_or(&1));
            let p_next = &a * &p + &p_prev;
            let q_next = &a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            i += 1;
        }
        let value = Extended::from_ratio(&BigRational::new(p, q));
        Ok(Frequency { value, quotients: quotients.to_vec(), convergents, rational: false })
    }

    /// The golden mean `(√5 - 1)/2` with `depth` stored quotients.
    pub fn golden_mean(depth: usize) -> Self {
        Self::from_quotients(&vec![1; depth.max(1)]).expect("all-ones expansion is valid")
    }

    pub fn value(&self) -> f64 {
        self.value.hi
    }

    pub fn value_extended(&self) -> Extended {
        self.value
    }

    pub fn quotients(&self) -> &[u64] {
        &self.quotients
    }

    pub fn convergents(&self) -> &[Convergent] {
        &self.convergents
    }

    pub fn is_rational(&self) -> bool {
        self.rational
    }

    /// `k α mod 1` in `[0, 1)`.
    #[inline]
    pub fn frac_mul(&self, k: i64) -> f64 {
        self.value.frac_mul(k)
    }

    /// `dist(k α, Z)`.
    #[inline]
    pub fn dist_to_int(&self, k: i64) -> f64 {
        self.value.norm_shifted(k, 0.0)
    }

    /// Orbit phase `x0 + k α mod 1`, computed from the extended value.
    #[inline]
    pub fn orbit_phase(&self, x0: f64, k: i64) -> f64 {
        let s = x0 + self.frac_mul(k);
        s - s.floor()
    }
}

/// Continued-fraction expansion of `x ∈ (0, 1)`.
///
/// An `f64` is an exact dyadic rational; its quotients are certified against
/// a half-ulp uncertainty, and a terminating expansion is reported as
/// rational.
pub fn continued_fraction(x: f64, depth: usize) -> Result<Frequency> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::param("x", format!("{x} is not in (0, 1)")));
    }
    let center = BigRational::from_float(x).expect("finite");
    let ulp = f64::from_bits(x.to_bits() + 1) - x;
    let half = BigRational::from_float(ulp / 2.0).expect("finite");
    Frequency::from_center(center, half, depth, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiophantineKind {
    #[serde(rename = "SDC")]
    Sdc,
    #[serde(rename = "not-SDC-within-range")]
    NotSdcWithinRange,
    #[serde(rename = "rational-detected")]
    RationalDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiophantineReport {
    pub kind: DiophantineKind,
    pub kappa: f64,
    pub tau: f64,
    pub worst_k: i64,
    pub worst_margin: f64,
    pub k_max: u64,
}

/// `|k| · max(1, (ln|k|)^τ)`, the weight in the strong Diophantine bound.
///
/// `(ln|k|)^τ` vanishes at `|k| = 1` and is below one for `|k| = 2`; the
/// floor at one keeps the weight positive and only strengthens the test.
pub fn sdc_weight(k: u64, tau: f64) -> f64 {
    let kf = k as f64;
    kf * kf.ln().powf(tau).max(1.0)
}

/// Tests `dist(kα, Z) ≥ κ / (|k| (ln|k|)^τ)` for `1 ≤ |k| ≤ k_max`.
///
/// `worst_margin` is the minimum of `|k| max(1,(ln|k|)^τ) dist(kα, Z)`, i.e.
/// the largest κ for which the condition holds within the range.
pub fn sdc_check(alpha: &Frequency, kappa: f64, tau: f64, k_max: u64) -> Result<DiophantineReport> {
    if !(kappa > 0.0) {
        return Err(Error::param("kappa", "must be positive"));
    }
    if !(tau > 1.0) {
        return Err(Error::param("tau", "must exceed 1"));
    }
    if k_max < 1 {
        return Err(Error::param("k_max", "must be at least 1"));
    }
    if alpha.is_rational() {
        return Ok(DiophantineReport {
            kind: DiophantineKind::RationalDetected,
            kappa,
            tau,
            worst_k: 0,
            worst_margin: 0.0,
            k_max,
        });
    }
    let mut worst_k = 1u64;
    let mut worst = f64::INFINITY;
    for k in 1..=k_max {
        let margin = sdc_weight(k, tau) * alpha.dist_to_int(k as i64);
        if margin < worst {
            worst = margin;
            worst_k = k;
        }
    }
    let kind = if worst >= kappa { DiophantineKind::Sdc } else { DiophantineKind::NotSdcWithinRange };
    Ok(DiophantineReport { kind, kappa, tau, worst_k: worst_k as i64, worst_margin: worst, k_max })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    /// `max_n ln(q_{n+1}) / q_n` over every stored pair.
    pub overall: f64,
    /// Index `n` (1-based) attaining `overall`.
    pub overall_index: usize,
    /// The same maximum restricted to the last five pairs.
    pub tail: f64,
}

const BETA_TAIL: usize = 5;

/// Estimates `β(α) = limsup -ln‖kα‖/|k|` on the denominators `q_n`, using
/// `‖q_n α‖ ≍ 1/q_{n+1}`.
pub fn beta_exponent(alpha: &Frequency) -> Result<BetaEstimate> {
    if alpha.is_rational() {
        return Err(Error::RationalFrequency(format!("{:?}", alpha.quotients())));
    }
    let c = alpha.convergents();
    if c.len() < 3 {
        return Err(Error::InsufficientDepth { needed: 3, have: c.len() });
    }
    let terms: Vec<f64> = c.windows(2).map(|w| (w[1].q as f64).ln() / w[0].q as f64).collect();
    let (overall_index, overall) =
        terms
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, t)| if t > best.1 { (i, t) } else { best });
    let tail = terms[terms.len().saturating_sub(BETA_TAIL)..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BetaEstimate { overall, overall_index: overall_index + 1, tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub k: i64,
    /// `‖2θ + kα‖_{R/Z}`
    pub norm: f64,
    /// `γ / (|k| + 1)^τ`
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaMembership {
    pub member: bool,
    /// First violation in the order `k = 0, -1, 1, -2, 2, ...`.
    pub first_violation: Option<Witness>,
    /// The `k` minimising `norm / bound`.
    pub worst: Witness,
}

/// Tests `‖2θ + kα‖ ≥ γ / (|k|+1)^τ` for `|k| ≤ k_max`.
pub fn theta_membership(theta: f64, alpha: &Frequency, gamma: f64, tau: f64, k_max: u64) -> Result<ThetaMembership> {
    if !(gamma > 0.0) {
        return Err(Error::param("gamma", "must be positive"));
    }
    if !(tau > 1.0) {
        return Err(Error::param("tau", "must exceed 1"));
    }
    let x = alpha.value_extended();
    let shift = 2.0 * theta;
    let witness = |k: i64| {
        let norm = x.norm_shifted(k, shift);
        let bound = gamma / ((k.unsigned_abs() + 1) as f64).powf(tau);
        Witness { k, norm, bound }
    };
    let mut first_violation = None;
    let start = witness(0);
    let mut worst = start;
    let mut consider = |w: Witness| {
        if first_violation.is_none() && w.norm < w.bound {
            first_violation = Some(w);
        }
        if w.norm / w.bound < worst.norm / worst.bound {
            worst = w;
        }
    };
    consider(start);
    for j in 1..=k_max as i64 {
        consider(witness(-j));
        consider(witness(j));
    }
    Ok(ThetaMembership { member: first_violation.is_none(), first_violation, worst })
}
