//! Double-double representation of the frequency.
//!
//! `hi + lo` with `|lo| <= ulp(hi) / 2` carries about 32 significant digits,
//! enough to reduce `k α mod 1` exactly to working precision for every `k`
//! this crate ever touches.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extended {
    pub hi: f64,
    pub lo: f64,
}

impl Extended {
    pub fn from_f64(x: f64) -> Self {
        Extended { hi: x, lo: 0.0 }
    }

    pub fn from_ratio(r: &BigRational) -> Self {
        let hi = r.to_f64().unwrap_or(f64::NAN);
        let exact_hi = BigRational::from_f64(hi).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()));
        let lo = (r - exact_hi).to_f64().unwrap_or(0.0);
        Extended { hi, lo }
    }

    /// `k·value - round(k·value)`, the signed offset to the nearest integer.
    ///
    /// `k·hi` is split exactly into `p + e` with a fused multiply-add, and
    /// `p - round(p)` is exact, so the only rounding is in the final sum.
    #[inline]
    pub fn centered_frac_mul(&self, k: i64) -> f64 {
        let kf = k as f64;
        let p = kf * self.hi;
        let e = kf.mul_add(self.hi, -p);
        let r = (p - p.round()) + (e + kf * self.lo);
        r - r.round()
    }

    /// `k·value mod 1` in `[0, 1)`.
    #[inline]
    pub fn frac_mul(&self, k: i64) -> f64 {
        let r = self.centered_frac_mul(k);
        if r < 0.0 {
            let s = r + 1.0;
            if s >= 1.0 {
                0.0
            } else {
                s
            }
        } else {
            r
        }
    }

    /// `‖shift + k·value‖_{R/Z}`.
    #[inline]
    pub fn norm_shifted(&self, k: i64, shift: f64) -> f64 {
        let kf = k as f64;
        let p = kf * self.hi;
        let e = kf.mul_add(self.hi, -p);
        let s = shift - shift.round();
        let r = ((p - p.round()) + s) + (e + kf * self.lo);
        (r - r.round()).abs()
    }
}
