//! Exact values of the finite multiple harmonic q-series
//!
//! `z_n(k; ζ_n) = Σ_{n > m_1 > … > m_r > 0} Π_j ζ_n^{(k_j-1)m_j} / [m_j]^{k_j}`
//!
//! and the star version (`≥`), together with the depth-one polynomials
//! `D_k`, Gregory coefficients and degenerate Bernoulli values.

use std::collections::HashMap;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{factorial, rat, rat_int, Rational};
use crate::cyclotomic::{one_minus_zeta_in, CycloElem, CyclotomicField};
use crate::error::{Error, Result};
use crate::hoffman::{HPoly, Index};
use crate::poly::QPoly;

/// Evaluator for one level `n`. Caches the summands `ζ^{(k-1)m}/[m]^k` and
/// the nested prefix sums of every index suffix seen so far, so evaluating
/// many indices of the same weight shares work.
pub struct ZEvaluator {
    field: Arc<CyclotomicField>,
    inv_q: Vec<CycloElem>,
    summands: HashMap<u32, Arc<Vec<CycloElem>>>,
    prefix: HashMap<(Vec<u32>, bool), Arc<Vec<CycloElem>>>,
}

impl ZEvaluator {
    pub fn new(n: u32) -> Self {
        let field = CyclotomicField::new(n);
        let inv_q = (0..n as i64)
            .map(|m| {
                if m == 0 {
                    CycloElem::zero_in(&field)
                } else {
                    inverse_q_integer(m, &field)
                }
            })
            .collect();
        ZEvaluator {
            field,
            inv_q,
            summands: HashMap::new(),
            prefix: HashMap::new(),
        }
    }

    pub fn level(&self) -> u32 {
        self.field.level()
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    /// `[t_k(0), t_k(1), …, t_k(n-1)]` with `t_k(m) = ζ^{(k-1)m} [m]^{-k}`
    /// and `t_k(0) = 0`.
    fn summands(&mut self, k: u32) -> Arc<Vec<CycloElem>> {
        if let Some(v) = self.summands.get(&k) {
            return v.clone();
        }
        let n = self.level() as i64;
        let v: Vec<CycloElem> = (0..n)
            .map(|m| {
                if m == 0 {
                    return CycloElem::zero_in(&self.field);
                }
                let inv = self.inv_q[m as usize].pow(k as i64).expect("nonnegative power");
                let twist = CycloElem::zeta_pow_in(&self.field, (k as i64 - 1) * m);
                &twist * &inv
            })
            .collect();
        let v = Arc::new(v);
        self.summands.insert(k, v.clone());
        v
    }

    /// Prefix sums `P(M) = Σ_{0<m≤M} t_{k_1}(m) · Q(m - 1 or m)` for
    /// `M = 0..n-1`, where `Q` is the prefix array of the tail.
    fn prefix_sums(&mut self, parts: &[u32], star: bool) -> Arc<Vec<CycloElem>> {
        let key = (parts.to_vec(), star);
        if let Some(v) = self.prefix.get(&key) {
            return v.clone();
        }
        let n = self.level() as usize;
        let t = self.summands(parts[0]);
        let tail = if parts.len() > 1 {
            Some(self.prefix_sums(&parts[1..], star))
        } else {
            None
        };
        let mut out = Vec::with_capacity(n);
        let mut acc = CycloElem::zero_in(&self.field);
        out.push(acc.clone());
        for m in 1..n {
            let term = match &tail {
                None => t[m].clone(),
                Some(q) => {
                    let inner = if star { &q[m] } else { &q[m - 1] };
                    if inner.is_zero() {
                        CycloElem::zero_in(&self.field)
                    } else {
                        &t[m] * inner
                    }
                }
            };
            if !term.is_zero() {
                acc = &acc + &term;
            }
            out.push(acc.clone());
        }
        let out = Arc::new(out);
        self.prefix.insert(key, out.clone());
        out
    }

    fn eval(&mut self, k: &Index, star: bool) -> CycloElem {
        if k.is_empty() {
            return CycloElem::one_in(&self.field);
        }
        let n = self.level() as usize;
        if n == 1 || (!star && k.depth() >= n) {
            return CycloElem::zero_in(&self.field);
        }
        self.prefix_sums(k.parts(), star)[n - 1].clone()
    }

    /// `z_n(k; ζ_n)`
    pub fn z(&mut self, k: &Index) -> CycloElem {
        self.eval(k, false)
    }

    /// `z★_n(k; ζ_n)`
    pub fn z_star(&mut self, k: &Index) -> CycloElem {
        self.eval(k, true)
    }

    /// Linear extension to `Ĥ¹` with `ħ ↦ 1 - ζ_n`.
    pub fn z_hpoly(&mut self, w: &HPoly, star: bool) -> CycloElem {
        let om = one_minus_zeta_in(&self.field);
        let mut hbar_pows = vec![CycloElem::one_in(&self.field)];
        let mut acc = CycloElem::zero_in(&self.field);
        for (k, h, c) in w.terms() {
            while hbar_pows.len() <= h as usize {
                let next = hbar_pows.last().unwrap() * &om;
                hbar_pows.push(next);
            }
            let v = self.eval(k, star);
            acc = &acc + &(&v * &hbar_pows[h as usize]).scale(c);
        }
        acc
    }
}

/// `[m]^{-1}` at level `n`. For `gcd(m, n) = 1` and `a = m^{-1} mod n` this
/// is the geometric sum `Σ_{j<a} ζ^{mj}`; otherwise use the field inverse.
fn inverse_q_integer(m: i64, field: &Arc<CyclotomicField>) -> CycloElem {
    let n = field.level() as i64;
    let (g, x, _) = egcd(m, n);
    if g == 1 {
        let a = x.rem_euclid(n);
        let mut v = vec![num_bigint::BigInt::zero(); n as usize];
        for j in 0..a {
            v[((m * j) % n) as usize] += 1;
        }
        CycloElem::from_int_coeffs_in(field, v)
    } else {
        crate::cyclotomic::q_integer_in(m, field)
            .expect("1 <= m < n")
            .inverse()
            .expect("q-integer is nonzero")
    }
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    (e.gcd, e.x, e.y)
}

/// `z_n(k; ζ_n)`; `1` for the empty index and `0` when `dep(k) ≥ n`.
pub fn z_exact(k: &Index, n: u32) -> CycloElem {
    ZEvaluator::new(n).z(k)
}

/// `z★_n(k; ζ_n)`
pub fn z_star_exact(k: &Index, n: u32) -> CycloElem {
    ZEvaluator::new(n).z_star(k)
}

/// Evaluates a combination of `z_n` values with `ħ ↦ 1 - ζ_n`.
pub fn z_hpoly_exact(w: &HPoly, n: u32) -> CycloElem {
    ZEvaluator::new(n).z_hpoly(w, false)
}

/// Star counterpart of [`z_hpoly_exact`].
pub fn z_star_hpoly_exact(w: &HPoly, n: u32) -> CycloElem {
    ZEvaluator::new(n).z_hpoly(w, true)
}

/// The polynomial `D_k` with `z_n(k; ζ_n) = D_k(n) (1 - ζ_n)^k` for all
/// `n ≥ 1`: the `z^k` coefficient of `-Σ_{l≥1} (-H)^l` where
/// `H = Σ_{j≥1} h_j(x) z^j` and `h_j(x) = Π_{a=1}^{j} (x - a) / (j+1)!`.
pub fn depth_one_poly(k: u32) -> Result<QPoly> {
    if k == 0 {
        return Err(Error::InvalidArgument("depth-one polynomial needs k >= 1".into()));
    }
    let k = k as usize;
    let mut h = vec![QPoly::zero(); k + 1];
    let mut falling = QPoly::constant(Rational::one());
    for (j, hj) in h.iter_mut().enumerate().skip(1) {
        falling = falling.mul(&QPoly::linear_root(rat_int(j as i64)));
        *hj = falling.scale(&Rational::new(1.into(), factorial(j as u32 + 1)));
    }
    let neg_h: Vec<QPoly> = h.iter().map(|p| p.scale(&rat_int(-1))).collect();
    // power = (-H)^l, truncated at degree k
    let mut power = neg_h.clone();
    let mut total = QPoly::zero();
    for _ in 1..=k {
        total = total.sub(&power[k]);
        let mut next = vec![QPoly::zero(); k + 1];
        for (i, a) in power.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in neg_h.iter().enumerate().take(k + 1 - i) {
                if !b.is_zero() {
                    next[i + j] = next[i + j].add(&a.mul(b));
                }
            }
        }
        power = next;
    }
    Ok(total)
}

/// Gregory coefficient `G_k`: `z / log(1+z) = Σ G_k z^k`.
pub fn gregory(k: u32) -> Rational {
    gregory_table(k).pop().expect("nonempty table")
}

/// `[G_0, …, G_k]`
pub fn gregory_table(k: u32) -> Vec<Rational> {
    // log(1+z)/z = Σ a_j z^j with a_j = (-1)^j/(j+1)
    let a = |j: usize| rat(if j % 2 == 0 { 1 } else { -1 }, j as i64 + 1);
    let mut g = vec![Rational::one()];
    for i in 1..=k as usize {
        let s = (1..=i).fold(Rational::zero(), |acc, j| acc + a(j) * &g[i - j]);
        g.push(-s);
    }
    g
}

/// Degenerate Bernoulli value `β_k(1/n) = -k! D_k(n) / n^k`.
pub fn degenerate_bernoulli_value(k: u32, n: u32) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let d = depth_one_poly(k)?;
    let nn = rat_int(n as i64);
    let val = d.eval(&nn);
    let nk = num_traits::pow(nn, k as usize);
    Ok(-Rational::from_integer(factorial(k)) * val / nk)
}
