//! Dense univariate polynomials over `Z` and `Q`, coefficients stored
//! lowest degree first.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{format_rational, Rational};

/// Polynomial with small integer coefficients (cyclotomic polynomials).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    pub coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn trim(mut self) -> Self {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0 {
            self.coeffs.pop();
        }
        self
    }

    /// Exact division by a monic polynomial. Panics if `divisor` is not monic.
    fn div_exact_monic(&self, divisor: &IntPoly) -> IntPoly {
        assert_eq!(*divisor.coeffs.last().unwrap(), 1, "divisor must be monic");
        let dd = divisor.degree();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0i64; self.coeffs.len().saturating_sub(dd).max(1)];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &dj) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] -= c * dj;
            }
        }
        debug_assert!(rem.iter().all(|&c| c == 0), "division was not exact");
        IntPoly { coeffs: quot }.trim()
    }
}

/// The `n`-th cyclotomic polynomial, obtained by dividing `x^d - 1` by
/// `Φ_e` for every proper divisor `e` of `d`, for each divisor `d` of `n`
/// in increasing order.
pub fn cyclotomic_poly(n: u32) -> IntPoly {
    assert!(n >= 1, "cyclotomic_poly needs n >= 1");
    let divisors: Vec<u32> = (1..=n).filter(|d| n % d == 0).collect();
    let mut table: Vec<(u32, IntPoly)> = Vec::with_capacity(divisors.len());
    for &d in &divisors {
        let mut acc = vec![0i64; d as usize + 1];
        acc[0] = -1;
        acc[d as usize] = 1;
        let mut p = IntPoly { coeffs: acc };
        for (e, phi_e) in &table {
            if d % e == 0 {
                p = p.div_exact_monic(phi_e);
            }
        }
        table.push((d, p));
    }
    table.pop().expect("n has at least one divisor").1
}

/// Polynomial over `Q`; the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        let mut p = QPoly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::new(vec![c])
    }

    /// `x - a`
    pub fn linear_root(a: Rational) -> Self {
        QPoly::new(vec![-a, Rational::one()])
    }

    pub fn from_int(p: &IntPoly) -> Self {
        QPoly::new(
            p.coeffs
                .iter()
                .map(|&c| Rational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, c: &Rational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &QPoly) -> (QPoly, QPoly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let c = &rem[i] / &lead;
            for (j, dj) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] -= &c * dj;
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        (QPoly::new(quot), QPoly::new(rem))
    }

    /// Returns `(g, s)` with `g = gcd(self, m)` monic and `s·self ≡ g (mod m)`.
    pub fn ext_gcd_mod(&self, m: &QPoly) -> (QPoly, QPoly) {
        let (mut r0, mut r1) = (m.clone(), self.div_rem(m).1);
        let (mut s0, mut s1) = (QPoly::zero(), QPoly::constant(Rational::one()));
        while !r1.is_zero() {
            let (q, r2) = r0.div_rem(&r1);
            let s2 = s0.sub(&q.mul(&s1));
            r0 = std::mem::replace(&mut r1, r2);
            s0 = std::mem::replace(&mut s1, s2);
        }
        match r0.degree() {
            None => (r0, s0),
            Some(d) => {
                let lead_inv = r0.coeffs[d].recip();
                (r0.scale(&lead_inv), s0.scale(&lead_inv))
            }
        }
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let body = format_rational(&a);
            match i {
                0 => write!(f, "{body}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{body}*")?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}
