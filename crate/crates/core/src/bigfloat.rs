//! Multi-precision complex numbers on top of `astro_float::BigFloat`.
//!
//! Every operation rounds to nearest-even at the working precision carried
//! by the value. Callers that need `p` correct bits work at
//! `p + GUARD_BITS`.

use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::Rational;

/// Extra bits carried above the requested precision.
pub const GUARD_BITS: usize = 32;

pub const RM: RoundingMode = RoundingMode::ToEven;

/// Builds an exact-as-possible `BigFloat` from a big integer.
pub fn bigfloat_from_bigint(x: &BigInt, prec: usize) -> BigFloat {
    let neg = x.is_negative();
    let mut acc = BigFloat::from_u64(0, prec);
    let shift = BigFloat::from_u64(1u64 << 32, prec);
    for digit in x.abs().to_u32_digits().1.iter().rev() {
        acc = acc
            .mul(&shift, prec, RM)
            .add(&BigFloat::from_u32(*digit, prec), prec, RM);
    }
    if neg {
        acc.neg()
    } else {
        acc
    }
}

pub fn bigfloat_from_rational(r: &Rational, prec: usize) -> BigFloat {
    bigfloat_from_bigint(r.numer(), prec).div(&bigfloat_from_bigint(r.denom(), prec), prec, RM)
}

pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    // astro-float has no direct conversion; go through the decimal form.
    let s = format!("{x}");
    s.parse::<f64>().unwrap_or_else(|_| {
        let (sign, _) = (x.sign(), 0);
        if x.is_inf() {
            if sign == Some(Sign::Neg) {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        } else {
            f64::NAN
        }
    })
}

/// Working-precision context: precision in bits plus the constant cache
/// needed by the transcendental functions.
pub struct FloatCtx {
    pub prec: usize,
    consts: Consts,
}

impl FloatCtx {
    pub fn new(prec: usize) -> Self {
        FloatCtx {
            prec,
            consts: Consts::new().expect("astro-float constant cache"),
        }
    }

    pub fn pi(&mut self) -> BigFloat {
        self.consts.pi(self.prec, RM)
    }

    pub fn int(&self, x: i64) -> BigFloat {
        BigFloat::from_i64(x, self.prec)
    }

    /// `(cos(πa/b), sin(πa/b))`
    pub fn cos_sin_pi_frac(&mut self, a: i64, b: i64) -> (BigFloat, BigFloat) {
        let p = self.prec;
        let x = self
            .pi()
            .mul(&self.int(a), p, RM)
            .div(&self.int(b), p, RM);
        let c = x.cos(p, RM, &mut self.consts);
        let s = x.sin(p, RM, &mut self.consts);
        (c, s)
    }

    /// `sin(πa/b)`
    pub fn sin_pi_frac(&mut self, a: i64, b: i64) -> BigFloat {
        let p = self.prec;
        let x = self
            .pi()
            .mul(&self.int(a), p, RM)
            .div(&self.int(b), p, RM);
        x.sin(p, RM, &mut self.consts)
    }

    /// `e^{πi a/b}`
    pub fn exp_i_pi_frac(&mut self, a: i64, b: i64) -> BigComplex {
        let (c, s) = self.cos_sin_pi_frac(a, b);
        BigComplex::new(c, s)
    }
}

#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl BigComplex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        BigComplex { re, im }
    }

    pub fn zero(prec: usize) -> Self {
        BigComplex::new(BigFloat::from_u64(0, prec), BigFloat::from_u64(0, prec))
    }

    pub fn one(prec: usize) -> Self {
        BigComplex::new(BigFloat::from_u64(1, prec), BigFloat::from_u64(0, prec))
    }

    pub fn from_real(re: BigFloat, prec: usize) -> Self {
        BigComplex::new(re, BigFloat::from_u64(0, prec))
    }

    pub fn precision(&self) -> usize {
        self.re.mantissa_max_bit_len().unwrap_or(64)
    }

    pub fn add(&self, o: &BigComplex, p: usize) -> BigComplex {
        BigComplex::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM))
    }

    pub fn sub(&self, o: &BigComplex, p: usize) -> BigComplex {
        BigComplex::new(self.re.sub(&o.re, p, RM), self.im.sub(&o.im, p, RM))
    }

    pub fn neg(&self) -> BigComplex {
        BigComplex::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> BigComplex {
        BigComplex::new(self.re.clone(), self.im.neg())
    }

    pub fn mul(&self, o: &BigComplex, p: usize) -> BigComplex {
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        BigComplex::new(re, im)
    }

    pub fn scale(&self, s: &BigFloat, p: usize) -> BigComplex {
        BigComplex::new(self.re.mul(s, p, RM), self.im.mul(s, p, RM))
    }

    pub fn norm_sqr(&self, p: usize) -> BigFloat {
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn div(&self, o: &BigComplex, p: usize) -> BigComplex {
        let d = o.norm_sqr(p);
        self.mul(&o.conj(), p).scale(&BigFloat::from_u64(1, p).div(&d, p, RM), p)
    }

    pub fn abs(&self, p: usize) -> BigFloat {
        self.norm_sqr(p).sqrt(p, RM)
    }

    pub fn powi(&self, k: u32, p: usize) -> BigComplex {
        let mut acc = BigComplex::one(p);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, p);
            }
            base = base.mul(&base, p);
            e >>= 1;
        }
        acc
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(bigfloat_to_f64(&self.re), bigfloat_to_f64(&self.im))
    }

    /// `|self - other|` as an `f64`.
    pub fn dist(&self, other: &BigComplex, p: usize) -> f64 {
        bigfloat_to_f64(&self.sub(other, p).abs(p))
    }

    /// Fixed-point decimal rendering with `digits` fractional digits.
    pub fn format_fixed(&self, digits: usize) -> (String, String) {
        (format_fixed(&self.re, digits), format_fixed(&self.im, digits))
    }
}

/// Renders `x` with exactly `digits` fractional digits, rounding half away
/// from zero. Deterministic for a given value, which keeps CLI output stable.
pub fn format_fixed(x: &BigFloat, digits: usize) -> String {
    let p = x.mantissa_max_bit_len().unwrap_or(128).max(128) + 64;
    let scale = (0..digits).fold(BigInt::from(1), |acc, _| acc * 10);
    let scaled = x.mul(&bigfloat_from_bigint(&scale, p), p, RM);
    let neg = scaled.is_negative();
    let mag = scaled.abs();
    let half = BigFloat::from_f64(0.5, p);
    let rounded = mag.add(&half, p, RM).floor();
    let int = bigfloat_integer_part(&rounded);
    let s = int.to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (ip, fp) = s.split_at(s.len() - digits);
    let sign = if neg && !int.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{fp}")
    }
}

/// Integer value of an integral, non-negative `BigFloat`.
fn bigfloat_integer_part(x: &BigFloat) -> BigInt {
    if x.is_zero() {
        return BigInt::zero();
    }
    let (mantissa_words, mbits, _sign, exp, _) = x.as_raw_parts().expect("finite value");
    let mut m = BigInt::zero();
    for w in mantissa_words.iter().rev() {
        m = (m << 64) + BigInt::from(*w);
    }
    // value = m * 2^(exp - mbits)
    let shift = exp as i64 - mbits as i64;
    if shift >= 0 {
        m << shift as usize
    } else {
        m >> (-shift) as usize
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.format_fixed(30);
        write!(f, "{re} + {im}i")
    }
}

pub fn c64_from_bigint_ratio(n: &BigInt, d: &BigInt) -> f64 {
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}
