//! Values over windows of primes: truncated harmonic sums in `F_p`, the
//! cyclotomic values `z_p(k; ζ_p) mod (p)`, and per-prime relation checks.

use std::collections::BTreeMap;

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arith::{inverse_table, is_prime, mul_mod, pow_mod, rat, rational_mod, Rational};
use crate::cyclotomic::{one_minus_zeta_in, Ideal, ResidueVector};
use crate::error::{Error, Result};
use crate::hoffman::{compositions_of_weight, delta, HPoly, Index};
use crate::qseries::ZEvaluator;

/// The ring a relation is checked in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ring {
    /// `F_p` per prime, with `ħ ↦ 0`.
    A,
    /// `Z[ζ_p]/(p)` per prime, with `ħ ↦ 1 - ζ_p`.
    Acyc,
}

impl std::str::FromStr for Ring {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Ring::A),
            "acyc" => Ok(Ring::Acyc),
            _ => Err(Error::Parse(format!("unknown ring `{s}` (expected A or Acyc)"))),
        }
    }
}

/// Strict (`>`) or weak (`≥`) nested sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Plain,
    Star,
}

impl Mode {
    pub fn is_star(self) -> bool {
        self == Mode::Star
    }
}

/// Values indexed by primes, with a ledger of primes that had to be skipped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdelicValue {
    pub entries: BTreeMap<u64, ResidueVector>,
    pub excluded: BTreeMap<u64, String>,
}

impl AdelicValue {
    fn push(&mut self, p: u64, r: Result<ResidueVector>) {
        match r {
            Ok(v) => {
                self.entries.insert(p, v);
            }
            Err(e) => {
                self.excluded.insert(p, e.to_string());
            }
        }
    }

    /// True when every non-excluded entry vanishes.
    pub fn is_zero(&self) -> bool {
        self.entries.values().all(ResidueVector::is_zero)
    }

    /// Applies `ζ_p ↦ 1` to every entry.
    pub fn to_prime_ideal(&self) -> AdelicValue {
        AdelicValue {
            entries: self
                .entries
                .iter()
                .map(|(p, v)| (*p, v.to_prime_ideal()))
                .collect(),
            excluded: self.excluded.clone(),
        }
    }
}

fn check_primes(primes: &[u64]) -> Result<()> {
    match primes.iter().find(|&&p| !is_prime(p)) {
        Some(&p) => Err(Error::NotPrime(p)),
        None => Ok(()),
    }
}

/// Truncated harmonic sums mod `p` for many indices, sharing inverse tables
/// and suffix prefix-sums.
pub struct FpEvaluator {
    p: u64,
    inv: Vec<u64>,
    powers: BTreeMap<u32, Vec<u64>>,
    prefix: BTreeMap<(Vec<u32>, bool), Vec<u64>>,
}

impl FpEvaluator {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FpEvaluator {
            p,
            inv: inverse_table(p),
            powers: BTreeMap::new(),
            prefix: BTreeMap::new(),
        })
    }

    fn powers(&mut self, k: u32) -> &Vec<u64> {
        let (p, inv) = (self.p, &self.inv);
        self.powers.entry(k).or_insert_with(|| {
            (0..p as usize)
                .map(|m| if m == 0 { 0 } else { pow_mod(inv[m], k as u64, p) })
                .collect()
        })
    }

    fn prefix_sums(&mut self, parts: &[u32], star: bool) -> Vec<u64> {
        let key = (parts.to_vec(), star);
        if let Some(v) = self.prefix.get(&key) {
            return v.clone();
        }
        let p = self.p;
        let tail = if parts.len() > 1 {
            Some(self.prefix_sums(&parts[1..], star))
        } else {
            None
        };
        let t = self.powers(parts[0]).clone();
        let mut out = vec![0u64; p as usize];
        let mut acc = 0u64;
        for m in 1..p as usize {
            let term = match &tail {
                None => t[m],
                Some(q) => mul_mod(t[m], if star { q[m] } else { q[m - 1] }, p),
            };
            acc = (acc + term) % p;
            out[m] = acc;
        }
        self.prefix.insert(key, out.clone());
        out
    }

    /// `Σ_{p > m_1 > … > m_r > 0} Π m_j^{-k_j} mod p` (`≥` when `star`).
    pub fn value(&mut self, k: &Index, star: bool) -> u64 {
        if k.is_empty() {
            return 1 % self.p;
        }
        self.prefix_sums(k.parts(), star)[self.p as usize - 1]
    }
}

/// The finite value of `k` at a single prime.
pub fn fmzv_at(k: &Index, p: u64, star: bool) -> Result<u64> {
    Ok(FpEvaluator::new(p)?.value(k, star))
}

/// `ζ_A(k)` over a window of primes.
pub fn fmzv(k: &Index, primes: &[u64]) -> Result<AdelicValue> {
    fmzv_mode(k, primes, Mode::Plain)
}

/// `ζ★_A(k)` over a window of primes.
pub fn fmzv_star(k: &Index, primes: &[u64]) -> Result<AdelicValue> {
    fmzv_mode(k, primes, Mode::Star)
}

fn fmzv_mode(k: &Index, primes: &[u64], mode: Mode) -> Result<AdelicValue> {
    check_primes(primes)?;
    let vals: Vec<(u64, u64)> = primes
        .par_iter()
        .map(|&p| (p, fmzv_at(k, p, mode.is_star()).expect("checked prime")))
        .collect();
    let mut out = AdelicValue::default();
    for (p, v) in vals {
        out.push(p, Ok(ResidueVector::scalar(p, v)));
    }
    Ok(out)
}

/// `Z(k)` (or `Z★(k)`) over a window of primes: `z_p(k; ζ_p)` reduced mod `(p)`.
pub fn z_cyc(k: &Index, primes: &[u64], mode: Mode) -> Result<AdelicValue> {
    z_cyc_hpoly(&HPoly::monomial(k.clone()), primes, mode)
}

/// Linear extension of [`z_cyc`] with `ħ ↦ 1 - ζ_p`.
pub fn z_cyc_hpoly(w: &HPoly, primes: &[u64], mode: Mode) -> Result<AdelicValue> {
    check_primes(primes)?;
    let vals: Vec<(u64, Result<ResidueVector>)> = primes
        .par_iter()
        .map(|&p| {
            let mut ev = ZEvaluator::new(p as u32);
            (p, ev.z_hpoly(w, mode.is_star()).reduce_mod(Ideal::Full))
        })
        .collect();
    let mut out = AdelicValue::default();
    for (p, r) in vals {
        out.push(p, r);
    }
    Ok(out)
}

/// Outcome of a relation check at one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeStatus {
    Zero,
    Nonzero(ResidueVector),
    Excluded(String),
}

/// Per-prime outcome of [`verify_relation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    pub ring: Ring,
    pub mode: Mode,
    pub homogeneous: bool,
    pub primes: BTreeMap<u64, PrimeStatus>,
}

impl RelationReport {
    /// True when the combination vanishes at every non-excluded prime.
    pub fn holds(&self) -> bool {
        self.primes
            .values()
            .all(|s| !matches!(s, PrimeStatus::Nonzero(_)))
    }

    pub fn failing_primes(&self) -> Vec<u64> {
        self.primes
            .iter()
            .filter(|(_, s)| matches!(s, PrimeStatus::Nonzero(_)))
            .map(|(p, _)| *p)
            .collect()
    }

    pub fn excluded_primes(&self) -> Vec<u64> {
        self.primes
            .iter()
            .filter(|(_, s)| matches!(s, PrimeStatus::Excluded(_)))
            .map(|(p, _)| *p)
            .collect()
    }

    /// `{prime: {status, residue?}}`
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for (p, s) in &self.primes {
            let v = match s {
                PrimeStatus::Zero => json!({"status": "zero"}),
                PrimeStatus::Nonzero(r) => json!({"status": "nonzero", "residue": r.coords}),
                PrimeStatus::Excluded(why) => json!({"status": "excluded", "reason": why}),
            };
            m.insert(p.to_string(), v);
        }
        serde_json::Value::Object(m)
    }
}

fn eval_in_a(combo: &HPoly, p: u64, star: bool) -> Result<ResidueVector> {
    let mut ev = FpEvaluator::new(p)?;
    let mut acc = 0u64;
    for (k, h, c) in combo.terms() {
        if h > 0 {
            continue;
        }
        let c = rational_mod(c, p)?;
        acc = (acc + mul_mod(c, ev.value(k, star), p)) % p;
    }
    Ok(ResidueVector::scalar(p, acc))
}

fn eval_in_acyc(combo: &HPoly, p: u64, star: bool) -> Result<ResidueVector> {
    let mut ev = ZEvaluator::new(p as u32);
    let field = ev.field().clone();
    let om = one_minus_zeta_in(&field);
    let mut acc = ResidueVector::zero(p, Ideal::Full);
    for (k, h, c) in combo.terms() {
        let c = rational_mod(c, p)?;
        let v = if star { ev.z_star(k) } else { ev.z(k) };
        let v = if h > 0 { &v * &om.pow(h as i64)? } else { v };
        acc = acc.add(&v.reduce_mod(Ideal::Full)?.scale(c));
    }
    Ok(acc)
}

/// Evaluates `combo` in the chosen ring at every prime and reports whether
/// it vanishes. Primes dividing a denominator are excluded.
pub fn verify_relation(
    combo: &HPoly,
    ring: Ring,
    primes: &[u64],
    mode: Mode,
) -> Result<RelationReport> {
    check_primes(primes)?;
    let star = mode.is_star();
    let results: Vec<(u64, Result<ResidueVector>)> = primes
        .par_iter()
        .map(|&p| {
            let r = match ring {
                Ring::A => eval_in_a(combo, p, star),
                Ring::Acyc => eval_in_acyc(combo, p, star),
            };
            (p, r)
        })
        .collect();
    let mut out = BTreeMap::new();
    for (p, r) in results {
        let status = match r {
            Ok(v) if v.is_zero() => PrimeStatus::Zero,
            Ok(v) => PrimeStatus::Nonzero(v),
            Err(e) => PrimeStatus::Excluded(e.to_string()),
        };
        out.insert(p, status);
    }
    Ok(RelationReport {
        ring,
        mode,
        homogeneous: combo.is_homogeneous(),
        primes: out,
    })
}

/// `e_{4,1} - 2 e_{3,1,1}`, which vanishes in `A`.
pub fn hoffman_41() -> HPoly {
    HPoly::from_terms([
        (Index::from_parts(&[4, 1]), 0, Rational::one()),
        (Index::from_parts(&[3, 1, 1]), 0, rat(-2, 1)),
    ])
}

/// The mod-`p` shadow of the weight-five star identity
/// `2z★(4,1) + z★(3,2) = (n⁴-1)(n+5)/1440 (1-ζ)^5 + (n+2)/3 (1-ζ)^2 z★(2,1)`
/// at `n = p`: `2e_{4,1} + e_{3,2} + ħ^5/288 - (2/3) ħ^2 e_{2,1}`.
/// Under `ħ ↦ 0` it becomes `2ζ★_A(4,1) + ζ★_A(3,2)`.
pub fn star_5() -> HPoly {
    HPoly::from_terms([
        (Index::from_parts(&[4, 1]), 0, rat(2, 1)),
        (Index::from_parts(&[3, 2]), 0, rat(1, 1)),
        (Index::empty(), 5, rat(1, 288)),
        (Index::from_parts(&[2, 1]), 2, rat(-2, 3)),
    ])
}

/// Checks the weight-five star identity exactly in `Q(ζ_n)`.
pub fn star_5_exact(n: u32) -> bool {
    let mut ev = ZEvaluator::new(n);
    let f = ev.field().clone();
    let om = one_minus_zeta_in(&f);
    let ix = Index::from_parts;
    let lhs = &ev.z_star(&ix(&[4, 1])).scale_int(2) + &ev.z_star(&ix(&[3, 2]));
    let nn = n as i64;
    let c5 = Rational::new(((nn.pow(4) - 1) * (nn + 5)).into(), 1440.into());
    let c2 = rat(nn + 2, 3);
    let rhs = &om.pow(5).expect("power").scale(&c5)
        + &(&om.pow(2).expect("power") * &ev.z_star(&ix(&[2, 1]))).scale(&c2);
    lhs == rhs
}

/// `e_k - δ(e_k)` for every index of weight `w`: the duality relations
/// `Z★(k) = (-1)^{wt+1} Z★(reverse(k^∨))`. Zero elements are dropped.
pub fn duality_family(w: u32) -> Vec<HPoly> {
    compositions_of_weight(w)
        .into_iter()
        .filter(|k| !k.is_empty())
        .map(|k| {
            let e = HPoly::monomial(k);
            e.sub(&delta(&e).expect("nonempty, hbar-free"))
        })
        .filter(|r| !r.is_zero())
        .collect()
}

/// `e_k - (-1)^{wt} e_{reverse(k)}`: reversal relations of finite values.
pub fn reversal_family(w: u32) -> Vec<HPoly> {
    compositions_of_weight(w)
        .into_iter()
        .map(|k| {
            let sign = if w % 2 == 0 { rat(-1, 1) } else { rat(1, 1) };
            HPoly::from_terms([(k.clone(), 0, Rational::one()), (k.reverse(), 0, sign)])
        })
        .filter(|r| !r.is_zero())
        .collect()
}
