//! Exact arithmetic in `Q(ζ_n)` using the power basis `1, ζ, …, ζ^{φ(n)-1}`,
//! reductions of elements of `Q(ζ_p)` modulo `(p)` and `(1-ζ_p)`, and the
//! complex embeddings `ζ_n ↦ e^{2πi a/n}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    bigint_mod, format_rational, gcd_u64, inv_mod, is_prime, mul_mod, parse_rational, totient,
    Rational,
};
use crate::bigfloat::{bigfloat_from_bigint, BigComplex, FloatCtx, GUARD_BITS, RM};
use crate::error::{Error, Result};
use crate::poly::{cyclotomic_poly, QPoly};

/// The field `Q(ζ_n)`, described by the coefficients of `Φ_n`.
#[derive(Debug, PartialEq, Eq)]
pub struct CyclotomicField {
    n: u32,
    phi: usize,
    modulus: Vec<i64>,
    // Φ_n has only 0, ±1 coefficients for most small n; reduction then
    // avoids multiplications.
    unit_coeffs: bool,
}

impl CyclotomicField {
    pub fn new(n: u32) -> Arc<Self> {
        assert!(n >= 1, "cyclotomic level must be at least 1");
        let modulus = cyclotomic_poly(n).coeffs;
        let unit_coeffs = modulus.iter().all(|c| c.abs() <= 1);
        Arc::new(CyclotomicField {
            n,
            phi: totient(n),
            modulus,
            unit_coeffs,
        })
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.phi
    }

    pub fn modulus(&self) -> &[i64] {
        &self.modulus
    }

    /// Reduces an integer polynomial of any length modulo `Φ_n` in place and
    /// truncates it to `φ(n)` coefficients.
    fn reduce(&self, mut r: Vec<BigInt>) -> Vec<BigInt> {
        let d = self.phi;
        for i in (d..r.len()).rev() {
            if r[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut r[i]);
            for (j, &m) in self.modulus[..d].iter().enumerate() {
                match m {
                    0 => {}
                    1 => r[i - d + j] -= &c,
                    -1 => r[i - d + j] += &c,
                    _ => r[i - d + j] -= &c * m,
                }
            }
        }
        r.resize(d, BigInt::zero());
        r
    }

    /// `ζ^e` as an integer coefficient vector.
    fn power_vector(&self, e: i64) -> Vec<BigInt> {
        let e = e.rem_euclid(self.n as i64) as usize;
        let mut v = vec![BigInt::zero(); e.max(self.phi - 1) + 1];
        v[e] = BigInt::one();
        self.reduce(v)
    }
}

/// An element of `Q(ζ_n)` stored as `num / den` with an integer coefficient
/// vector `num` of length `φ(n)`, normalized so that `gcd(num, den) = 1`
/// and `den > 0`.
#[derive(Clone)]
pub struct CycloElem {
    field: Arc<CyclotomicField>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for CycloElem {
    fn eq(&self, other: &Self) -> bool {
        self.field.n == other.field.n && self.den == other.den && self.num == other.num
    }
}

impl Eq for CycloElem {}

impl fmt::Debug for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloElem(n={}, {})", self.field.n, self)
    }
}

impl CycloElem {
    fn from_parts(field: Arc<CyclotomicField>, num: Vec<BigInt>, den: BigInt) -> Self {
        let mut e = CycloElem { field, num, den };
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        if self.num.iter().all(Zero::is_zero) {
            self.den = BigInt::one();
            return;
        }
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in self.num.iter_mut() {
                *c = -&*c;
            }
        }
        if self.den.is_one() {
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                return;
            }
            if !c.is_zero() {
                g = g.gcd(c);
            }
        }
        if !g.is_one() {
            self.den /= &g;
            for c in self.num.iter_mut() {
                *c /= &g;
            }
        }
    }

    pub fn zero_in(field: &Arc<CyclotomicField>) -> Self {
        CycloElem {
            field: field.clone(),
            num: vec![BigInt::zero(); field.phi],
            den: BigInt::one(),
        }
    }

    pub fn zero(n: u32) -> Self {
        Self::zero_in(&CyclotomicField::new(n))
    }

    pub fn from_rational_in(field: &Arc<CyclotomicField>, r: &Rational) -> Self {
        let mut num = vec![BigInt::zero(); field.phi];
        num[0] = r.numer().clone();
        CycloElem::from_parts(field.clone(), num, r.denom().clone())
    }

    pub fn from_rational(n: u32, r: &Rational) -> Self {
        Self::from_rational_in(&CyclotomicField::new(n), r)
    }

    pub fn one_in(field: &Arc<CyclotomicField>) -> Self {
        Self::from_rational_in(field, &Rational::one())
    }

    pub fn one(n: u32) -> Self {
        Self::one_in(&CyclotomicField::new(n))
    }

    /// `ζ^e` for any integer `e`.
    pub fn zeta_pow_in(field: &Arc<CyclotomicField>, e: i64) -> Self {
        CycloElem {
            field: field.clone(),
            num: field.power_vector(e),
            den: BigInt::one(),
        }
    }

    pub fn zeta(n: u32) -> Self {
        Self::zeta_pow_in(&CyclotomicField::new(n), 1)
    }

    /// Builds `Σ c_i ζ^i` from coefficients of any length, reducing mod `Φ_n`.
    pub fn from_coeffs_in(field: &Arc<CyclotomicField>, coeffs: &[Rational]) -> Self {
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut num: Vec<BigInt> = coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(den.clone())).to_integer())
            .collect();
        if num.len() < field.phi {
            num.resize(field.phi, BigInt::zero());
        }
        let num = field.reduce(num);
        CycloElem::from_parts(field.clone(), num, den)
    }

    pub fn from_coeffs(n: u32, coeffs: &[Rational]) -> Self {
        Self::from_coeffs_in(&CyclotomicField::new(n), coeffs)
    }

    /// `Σ c_i ζ^i` with integer coefficients.
    pub fn from_int_coeffs_in(field: &Arc<CyclotomicField>, coeffs: Vec<BigInt>) -> Self {
        let mut coeffs = coeffs;
        if coeffs.len() < field.phi {
            coeffs.resize(field.phi, BigInt::zero());
        }
        let num = field.reduce(coeffs);
        CycloElem::from_parts(field.clone(), num, BigInt::one())
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    pub fn level(&self) -> u32 {
        self.field.n
    }

    /// Coordinates in the power basis, length `φ(n)`.
    pub fn coeffs(&self) -> Vec<Rational> {
        self.num
            .iter()
            .map(|c| Rational::new(c.clone(), self.den.clone()))
            .collect()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(Rational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    fn check_level(&self, other: &Self) -> Result<()> {
        if self.field.n != other.field.n {
            return Err(Error::LevelMismatch(self.field.n, other.field.n));
        }
        Ok(())
    }

    fn add_signed(&self, other: &Self, negate: bool) -> Self {
        let num = if self.den == other.den {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| if negate { a - b } else { a + b })
                .collect()
        } else {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| {
                    let (x, y) = (a * &other.den, b * &self.den);
                    if negate {
                        x - y
                    } else {
                        x + y
                    }
                })
                .collect()
        };
        let den = if self.den == other.den {
            self.den.clone()
        } else {
            &self.den * &other.den
        };
        CycloElem::from_parts(self.field.clone(), num, den)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self.add_signed(other, false))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self.add_signed(other, true))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        let d = self.field.phi;
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let num = self.field.reduce(prod);
        Ok(CycloElem::from_parts(
            self.field.clone(),
            num,
            &self.den * &other.den,
        ))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let num = self.num.iter().map(|c| c * r.numer()).collect();
        CycloElem::from_parts(self.field.clone(), num, &self.den * r.denom())
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let num = self.num.iter().map(|c| c * k).collect();
        CycloElem::from_parts(self.field.clone(), num, self.den.clone())
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against `Φ_n`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let a = QPoly::new(self.coeffs());
        let m = QPoly::new(
            self.field
                .modulus
                .iter()
                .map(|&c| Rational::from_integer(BigInt::from(c)))
                .collect(),
        );
        let (g, s) = a.ext_gcd_mod(&m);
        // Φ_n is irreducible, so a nonzero element is always coprime to it.
        debug_assert_eq!(g.degree(), Some(0));
        Ok(CycloElem::from_coeffs_in(&self.field, s.coeffs()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        self.checked_mul(&other.inverse()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = CycloElem::one_in(&self.field);
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &b;
            }
            k >>= 1;
            if k > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// The Galois conjugate `ζ ↦ ζ^a` for `a` coprime to `n`.
    pub fn galois(&self, a: i64) -> Result<Self> {
        let n = self.field.n as i64;
        if gcd_u64(a.rem_euclid(n) as u64, n as u64) != 1 && n > 1 {
            return Err(Error::InvalidExponent {
                exponent: a,
                level: self.field.n,
            });
        }
        let mut v = vec![BigInt::zero(); (n as usize).max(self.field.phi)];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                v[(a * i as i64).rem_euclid(n) as usize] += c;
            }
        }
        let num = self.field.reduce(v);
        Ok(CycloElem::from_parts(self.field.clone(), num, self.den.clone()))
    }

    /// Complex conjugation, i.e. `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Self {
        self.galois(-1).expect("-1 is a unit modulo n")
    }

    /// Reduction of an element of `Q(ζ_p)` modulo `(p)` or modulo `𝔭_p = (1-ζ_p)`.
    pub fn reduce_mod(&self, ideal: Ideal) -> Result<ResidueVector> {
        let p = self.field.n as u64;
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let dinv = inv_mod(bigint_mod(&self.den, p), p).ok_or(Error::PrimeExcluded { prime: p })?;
        let coords: Vec<u64> = self
            .num
            .iter()
            .map(|c| mul_mod(bigint_mod(c, p), dinv, p))
            .collect();
        let full = ResidueVector {
            prime: p,
            ideal: Ideal::Full,
            coords,
        };
        Ok(match ideal {
            Ideal::Full => full,
            Ideal::Prime => full.to_prime_ideal(),
        })
    }

    /// Substitutes `ζ_n ↦ e^{2πi·exponent/n}`. The result is computed with
    /// `precision + GUARD_BITS` working bits and rounded back to `precision`.
    pub fn embed_complex(&self, exponent: i64, precision: usize) -> Result<BigComplex> {
        if precision < 64 {
            return Err(Error::PrecisionTooLow(precision));
        }
        let n = self.field.n as i64;
        if n > 1 && gcd_u64(exponent.rem_euclid(n) as u64, n as u64) != 1 {
            return Err(Error::InvalidExponent {
                exponent,
                level: self.field.n,
            });
        }
        let wp = precision + GUARD_BITS;
        let mut ctx = FloatCtx::new(wp);
        let mut acc = BigComplex::zero(wp);
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let angle = (2 * exponent * i as i64).rem_euclid(2 * n);
            let root = ctx.exp_i_pi_frac(angle, n);
            acc = acc.add(&root.scale(&bigfloat_from_bigint(c, wp), wp), wp);
        }
        let den = bigfloat_from_bigint(&self.den, wp);
        let re = acc.re.div(&den, precision, RM);
        let im = acc.im.div(&den, precision, RM);
        Ok(BigComplex::new(re, im))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(CycloJson::from(self)).expect("serializable")
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let j: CycloJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        j.try_into()
    }
}

/// `[m]_{ζ_n} = 1 + ζ_n + … + ζ_n^{m-1}`, defined for `1 ≤ m < n`.
pub fn q_integer(m: i64, n: u32) -> Result<CycloElem> {
    q_integer_in(m, &CyclotomicField::new(n))
}

pub fn q_integer_in(m: i64, field: &Arc<CyclotomicField>) -> Result<CycloElem> {
    let n = field.n;
    if m < 1 || m >= n as i64 {
        return Err(Error::QIntegerOutOfRange { m, n });
    }
    let mut v = vec![BigInt::zero(); (m as usize).max(field.phi)];
    for c in v.iter_mut().take(m as usize) {
        *c = BigInt::one();
    }
    Ok(CycloElem::from_int_coeffs_in(field, v))
}

/// `1 - ζ_n`
pub fn one_minus_zeta_in(field: &Arc<CyclotomicField>) -> CycloElem {
    &CycloElem::one_in(field) - &CycloElem::zeta_pow_in(field, 1)
}

pub fn one_minus_zeta(n: u32) -> CycloElem {
    one_minus_zeta_in(&CyclotomicField::new(n))
}

impl fmt::Display for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{}", format_rational(&a))?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{}*", format_rational(&a))?;
                    }
                    if i == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> $tr<&'a CycloElem> for &'a CycloElem {
            type Output = CycloElem;
            fn $method(self, rhs: &'a CycloElem) -> CycloElem {
                self.$checked(rhs).expect("cyclotomic level mismatch")
            }
        }
        impl $tr<CycloElem> for CycloElem {
            type Output = CycloElem;
            fn $method(self, rhs: CycloElem) -> CycloElem {
                (&self).$checked(&rhs).expect("cyclotomic level mismatch")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &CycloElem {
    type Output = CycloElem;
    fn neg(self) -> CycloElem {
        CycloElem {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycloElem {
    type Output = CycloElem;
    fn neg(self) -> CycloElem {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct CycloJson {
    n: u32,
    coeffs: Vec<String>,
}

impl From<&CycloElem> for CycloJson {
    fn from(e: &CycloElem) -> Self {
        CycloJson {
            n: e.level(),
            coeffs: e.coeffs().iter().map(format_rational).collect(),
        }
    }
}

impl TryFrom<CycloJson> for CycloElem {
    type Error = Error;
    fn try_from(j: CycloJson) -> Result<Self> {
        if j.n == 0 {
            return Err(Error::InvalidArgument("level must be positive".into()));
        }
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(CycloElem::from_coeffs(j.n, &coeffs))
    }
}

impl Serialize for CycloElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycloJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CycloJson::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// Which ideal of `Z[ζ_p]` a residue is taken modulo.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ideal {
    /// `(p)`; residues are vectors of length `p-1` over `F_p`.
    Full,
    /// `𝔭_p = (1-ζ_p)`; residues are single elements of `F_p`.
    Prime,
}

/// An element of `Z[ζ_p]/(p)` (power-basis coordinates) or of
/// `Z[ζ_p]/𝔭_p ≅ F_p` (a single coordinate).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueVector {
    pub prime: u64,
    pub ideal: Ideal,
    pub coords: Vec<u64>,
}

impl ResidueVector {
    pub fn zero(prime: u64, ideal: Ideal) -> Self {
        let len = match ideal {
            Ideal::Full => (prime - 1) as usize,
            Ideal::Prime => 1,
        };
        ResidueVector {
            prime,
            ideal,
            coords: vec![0; len],
        }
    }

    pub fn scalar(prime: u64, value: u64) -> Self {
        ResidueVector {
            prime,
            ideal: Ideal::Prime,
            coords: vec![value % prime],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Image under `ζ_p ↦ 1`.
    pub fn to_prime_ideal(&self) -> ResidueVector {
        let p = self.prime;
        let s = self.coords.iter().fold(0u64, |acc, &c| (acc + c) % p);
        ResidueVector::scalar(p, s)
    }

    pub fn add(&self, other: &ResidueVector) -> ResidueVector {
        assert_eq!(self.prime, other.prime);
        assert_eq!(self.ideal, other.ideal);
        let p = self.prime;
        ResidueVector {
            prime: p,
            ideal: self.ideal,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| (a + b) % p)
                .collect(),
        }
    }

    pub fn scale(&self, c: u64) -> ResidueVector {
        let p = self.prime;
        ResidueVector {
            prime: p,
            ideal: self.ideal,
            coords: self.coords.iter().map(|&a| mul_mod(a, c, p)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_int};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn elem(n: u32, cs: &[i64]) -> CycloElem {
        CycloElem::from_coeffs(n, &cs.iter().map(|&c| rat_int(c)).collect::<Vec<_>>())
    }

    #[test]
    fn inverse_of_one_minus_i() {
        let a = one_minus_zeta(4);
        let inv = a.inverse().unwrap();
        assert_eq!(inv.coeffs(), vec![rat(1, 2), rat(1, 2)]);
        assert!((&a * &inv).is_one());
    }

    #[test]
    fn zeta_to_the_n_is_one() {
        for n in [2u32, 3, 5, 12] {
            assert!(CycloElem::zeta(n).pow(n as i64).unwrap().is_one());
        }
    }

    #[test]
    fn additive_identity_and_level_mismatch() {
        let a = elem(7, &[1, -2, 3]);
        assert_eq!(&a + &CycloElem::zero(7), a);
        assert_eq!(
            a.checked_add(&CycloElem::one(5)),
            Err(Error::LevelMismatch(7, 5))
        );
        assert_eq!(CycloElem::zero(7).inverse(), Err(Error::DivisionByZero));
    }

    #[test]
    fn q_integers() {
        assert!(q_integer(1, 9).unwrap().is_one());
        assert_eq!(q_integer(2, 5).unwrap(), elem(5, &[1, 1]));
        assert_eq!(q_integer(3, 7).unwrap(), elem(7, &[1, 1, 1]));
        assert!(q_integer(0, 5).is_err());
        assert!(q_integer(5, 5).is_err());
        for n in 2..=50u32 {
            let f = CyclotomicField::new(n);
            let om = one_minus_zeta_in(&f);
            for m in 1..n as i64 {
                let lhs = &q_integer_in(m, &f).unwrap() * &om;
                let rhs = &CycloElem::one_in(&f) - &CycloElem::zeta_pow_in(&f, m);
                assert_eq!(lhs, rhs, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn reductions() {
        let p = 7u32;
        let pz = CycloElem::zeta(p).scale_int(p as i64);
        assert!(pz.reduce_mod(Ideal::Full).unwrap().is_zero());
        assert!(one_minus_zeta(p)
            .reduce_mod(Ideal::Prime)
            .unwrap()
            .is_zero());
        // 2(1-ζ_5): the depth-one value z_5(1)
        let z = one_minus_zeta(5).scale_int(2);
        assert_eq!(z.reduce_mod(Ideal::Full).unwrap().coords, vec![2, 3, 0, 0]);
        assert!(z.reduce_mod(Ideal::Prime).unwrap().is_zero());
        assert_eq!(
            CycloElem::from_rational(5, &rat(1, 5)).reduce_mod(Ideal::Full),
            Err(Error::PrimeExcluded { prime: 5 })
        );
        assert_eq!(
            CycloElem::one(6).reduce_mod(Ideal::Full),
            Err(Error::NotPrime(6))
        );
    }

    #[test]
    fn embeddings() {
        let i = CycloElem::zeta(4).embed_complex(1, 128).unwrap().to_c64();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let n = 10_000u32;
        let v = one_minus_zeta(n).embed_complex(1, 128).unwrap().to_c64();
        let approx = Complex64::new(0.0, -2.0 * std::f64::consts::PI / n as f64);
        assert!((v - approx).norm() < 1e-6);
        let q3 = q_integer(3, 6).unwrap().embed_complex(1, 128).unwrap().to_c64();
        assert!((q3 - Complex64::new(1.0, 3f64.sqrt())).norm() < 1e-14);
        assert!(CycloElem::zeta(6).embed_complex(2, 128).is_err());
        assert!(CycloElem::zeta(6).embed_complex(1, 32).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let a = elem(5, &[2, -2]).scale(&rat(1, 3));
        let v = a.to_json_value();
        assert_eq!(v["n"], 5);
        assert_eq!(v["coeffs"][0], "2/3");
        assert_eq!(CycloElem::from_json_value(&v).unwrap(), a);
    }

    #[test]
    fn galois_conjugation() {
        let f = CyclotomicField::new(12);
        let z = CycloElem::zeta_pow_in(&f, 1);
        assert_eq!(z.conj(), CycloElem::zeta_pow_in(&f, -1));
        assert!((&z * &z.conj()).is_one());
        assert!(z.galois(2).is_err());
    }

    fn arb_elem(n: u32) -> impl Strategy<Value = CycloElem> {
        let phi = totient(n);
        prop::collection::vec((-20i64..20, 1i64..6), phi).prop_map(move |v| {
            CycloElem::from_coeffs(n, &v.iter().map(|&(a, b)| rat(a, b)).collect::<Vec<_>>())
        })
    }

    fn arb_triple() -> impl Strategy<Value = (CycloElem, CycloElem, CycloElem)> {
        (1u32..=30).prop_flat_map(|n| (arb_elem(n), arb_elem(n), arb_elem(n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

        #[test]
        fn field_axioms((a, b, c) in arb_triple()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            if !a.is_zero() {
                prop_assert!((&a * &a.inverse().unwrap()).is_one());
            }
        }

        #[test]
        fn prime_reduction_factors_through_full(
            (p, cs) in prop::sample::select(vec![5u32, 7, 11, 13, 31, 53, 97])
                .prop_flat_map(|p| (Just(p), prop::collection::vec((-50i64..50, 1i64..4), (p - 1) as usize)))
        ) {
            let a = CycloElem::from_coeffs(p, &cs.iter().map(|&(x, y)| rat(x, y)).collect::<Vec<_>>());
            let full = a.reduce_mod(Ideal::Full).unwrap();
            prop_assert_eq!(full.to_prime_ideal(), a.reduce_mod(Ideal::Prime).unwrap());
        }

        #[test]
        fn embedding_is_multiplicative((a, b, _c) in arb_triple()) {
            let prec = 128;
            let lhs = (&a * &b).embed_complex(1, prec).unwrap();
            let rhs = a.embed_complex(1, prec).unwrap().mul(&b.embed_complex(1, prec).unwrap(), prec);
            prop_assert!(lhs.dist(&rhs, prec) < 2f64.powi(-(prec as i32) / 2));
        }
    }
}
