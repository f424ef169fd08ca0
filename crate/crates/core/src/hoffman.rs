//! Indices, the word algebra `H¹` and its `ħ`-extension.
//!
//! An element of `Ĥ¹ = Q[ħ] ⊗ H¹` is an [`HPoly`]: a finite map from
//! `(index, ħ-degree)` to a nonzero rational coefficient. Products follow
//! the usual recursion on first letters; `ħ` has weight one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, parse_rational, rat, Rational};
use crate::error::{Error, Result};

/// A tuple of positive integers `(k_1, …, k_r)`, possibly empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Index(Vec<u32>);

impl Index {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&k| k == 0) {
            return Err(Error::InvalidArgument(
                "index parts must be positive".into(),
            ));
        }
        Ok(Index(parts))
    }

    /// Builds an index from parts already known to be positive.
    pub fn from_parts(parts: &[u32]) -> Self {
        assert!(parts.iter().all(|&k| k > 0), "index parts must be positive");
        Index(parts.to_vec())
    }

    pub fn empty() -> Self {
        Index(Vec::new())
    }

    /// Parses `"3,1,1"`; `""`, `"∅"` and `"()"` denote the empty index.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if t.is_empty() || t == "∅" {
            return Ok(Index::empty());
        }
        let parts = t
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("invalid index `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Index::new(parts).map_err(|_| Error::Parse(format!("invalid index `{s}`")))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reverse(&self) -> Index {
        Index(self.0.iter().rev().copied().collect())
    }

    /// `(k, self)`
    pub fn prepend(&self, k: u32) -> Index {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(k);
        v.extend_from_slice(&self.0);
        Index(v)
    }

    /// The index as a word in `e_0, e_1` (`false`, `true`):
    /// `e_0^{k_1-1} e_1 ⋯ e_0^{k_r-1} e_1`.
    pub fn to_binary_word(&self) -> Vec<bool> {
        let mut w = Vec::with_capacity(self.weight() as usize);
        for &k in &self.0 {
            w.extend(std::iter::repeat(false).take(k as usize - 1));
            w.push(true);
        }
        w
    }

    /// Inverse of [`Index::to_binary_word`]; the word must end in `e_1`.
    pub fn from_binary_word(w: &[bool]) -> Result<Index> {
        if w.last() == Some(&false) {
            return Err(Error::InvalidArgument("word must end in e1".into()));
        }
        let mut parts = Vec::new();
        let mut run = 1;
        for &b in w {
            if b {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        Ok(Index(parts))
    }

    /// The Hoffman dual: drop the final `e_1`, swap `e_0 ↔ e_1`, append `e_1`.
    pub fn hoffman_dual(&self) -> Result<Index> {
        if self.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let mut w = self.to_binary_word();
        w.pop();
        for b in w.iter_mut() {
            *b = !*b;
        }
        w.push(true);
        Index::from_binary_word(&w)
    }

    /// `reverse(dual(self))`
    pub fn dual_reverse(&self) -> Result<Index> {
        Ok(self.hoffman_dual()?.reverse())
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// All `2^{w-1}` indices of weight `w` (just the empty index for `w = 0`),
/// in lexicographic order of their parts.
pub fn compositions_of_weight(w: u32) -> Vec<Index> {
    fn go(rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Index>) {
        if rest == 0 {
            out.push(Index(cur.clone()));
            return;
        }
        for k in 1..=rest {
            cur.push(k);
            go(rest - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(w, &mut Vec::new(), &mut out);
    out
}

/// A monomial key: an index together with a power of `ħ`.
pub type Term = (Index, u32);

/// A finite `Q[ħ]`-linear combination of indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HPoly {
    terms: BTreeMap<Term, Rational>,
}

impl HPoly {
    pub fn zero() -> Self {
        HPoly::default()
    }

    /// `e_∅`, the unit.
    pub fn one() -> Self {
        HPoly::monomial(Index::empty())
    }

    pub fn monomial(k: Index) -> Self {
        HPoly::term(k, 0, Rational::one())
    }

    pub fn term(k: Index, hbar: u32, c: Rational) -> Self {
        let mut p = HPoly::zero();
        p.add_term(k, hbar, c);
        p
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Index, u32, Rational)>) -> Self {
        let mut p = HPoly::zero();
        for (k, h, c) in it {
            p.add_term(k, h, c);
        }
        p
    }

    pub fn add_term(&mut self, k: Index, hbar: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key = (k, hbar);
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &HPoly, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for ((k, h), v) in &other.terms {
            self.add_term(k.clone(), *h, v * c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Index, u32, &Rational)> {
        self.terms.iter().map(|((k, h), c)| (k, *h, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &Index, hbar: u32) -> Rational {
        self.terms
            .get(&(k.clone(), hbar))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &HPoly) -> HPoly {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one());
        out
    }

    pub fn sub(&self, other: &HPoly) -> HPoly {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn scale(&self, c: &Rational) -> HPoly {
        let mut out = HPoly::zero();
        out.add_scaled(self, c);
        out
    }

    /// Multiplies by `ħ^k`.
    pub fn mul_hbar(&self, k: u32) -> HPoly {
        HPoly {
            terms: self
                .terms
                .iter()
                .map(|((i, h), c)| ((i.clone(), h + k), c.clone()))
                .collect(),
        }
    }

    /// Prepends the letter `e_k` to every index.
    pub fn prepend(&self, k: u32) -> HPoly {
        HPoly {
            terms: self
                .terms
                .iter()
                .map(|((i, h), c)| ((i.prepend(k), *h), c.clone()))
                .collect(),
        }
    }

    pub fn max_hbar_degree(&self) -> u32 {
        self.terms.keys().map(|(_, h)| *h).max().unwrap_or(0)
    }

    pub fn is_hbar_free(&self) -> bool {
        self.terms.keys().all(|(_, h)| *h == 0)
    }

    /// The image under `ħ ↦ 0`.
    pub fn hbar_to_zero(&self) -> HPoly {
        HPoly {
            terms: self
                .terms
                .iter()
                .filter(|((_, h), _)| *h == 0)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Part of `ħ`-degree exactly `d`, returned with `ħ` stripped.
    pub fn hbar_component(&self, d: u32) -> HPoly {
        HPoly {
            terms: self
                .terms
                .iter()
                .filter(|((_, h), _)| *h == d)
                .map(|((k, _), c)| ((k.clone(), 0), c.clone()))
                .collect(),
        }
    }

    /// Distinct total weights `wt(index) + ħ-degree` of the terms.
    pub fn total_weights(&self) -> Vec<u32> {
        let mut w: Vec<u32> = self.terms.keys().map(|(k, h)| k.weight() + h).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    pub fn is_homogeneous(&self) -> bool {
        self.total_weights().len() <= 1
    }

    fn require_hbar_free(&self) -> Result<()> {
        if self.is_hbar_free() {
            Ok(())
        } else {
            Err(Error::HbarPresent)
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(
            self.terms()
                .map(|(k, h, c)| TermJson {
                    index: k.to_string(),
                    hbar_degree: h,
                    coeff: CoeffJson::Text(format_rational(c)),
                })
                .collect::<Vec<_>>(),
        )
        .expect("serializable")
    }

    /// Parses a JSON list of `{index, hbar_degree | hbar, coeff}` objects.
    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let terms: Vec<TermJson> =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut p = HPoly::zero();
        for t in terms {
            let c = match t.coeff {
                CoeffJson::Text(s) => parse_rational(&s)?,
                CoeffJson::Int(i) => Rational::from_integer(i.into()),
            };
            p.add_term(Index::parse(&t.index)?, t.hbar_degree, c);
        }
        Ok(p)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        HPoly::from_json_value(&v)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    index: String,
    #[serde(alias = "hbar", default)]
    hbar_degree: u32,
    coeff: CoeffJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffJson {
    Text(String),
    Int(i64),
}

impl fmt::Display for HPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, h, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{}*", format_rational(&a))?;
            }
            match h {
                0 => {}
                1 => write!(f, "h*")?,
                _ => write!(f, "h^{h}*")?,
            }
            write!(f, "e({k})")?;
        }
        Ok(())
    }
}

/// Merge rule of a quasi-shuffle product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Merge {
    sign: i64,
    hbar: bool,
}

const STUFFLE: Merge = Merge { sign: 1, hbar: false };
const STAR: Merge = Merge { sign: -1, hbar: false };
const Q_STUFFLE: Merge = Merge { sign: 1, hbar: true };
const Q_STAR: Merge = Merge { sign: -1, hbar: true };

/// Product of two monomials `e_a · e_b`, memoized over suffix pairs.
fn monomial_product(a: &[u32], b: &[u32], m: Merge) -> HPoly {
    let (la, lb) = (a.len(), b.len());
    // table[i][j] = a[i..] ∘ b[j..]
    let mut table: Vec<Vec<HPoly>> = vec![vec![HPoly::zero(); lb + 1]; la + 1];
    for i in (0..=la).rev() {
        for j in (0..=lb).rev() {
            let v = if i == la {
                HPoly::monomial(Index(b[j..].to_vec()))
            } else if j == lb {
                HPoly::monomial(Index(a[i..].to_vec()))
            } else {
                let mut v = table[i + 1][j].prepend(a[i]);
                v.add_scaled(&table[i][j + 1].prepend(b[j]), &Rational::one());
                let s = a[i] + b[j];
                let sign = Rational::from_integer(m.sign.into());
                let rest = &table[i + 1][j + 1];
                v.add_scaled(&rest.prepend(s), &sign);
                if m.hbar {
                    v.add_scaled(&rest.prepend(s - 1).mul_hbar(1), &sign);
                }
                v
            };
            table[i][j] = v;
        }
    }
    std::mem::take(&mut table[0][0])
}

fn bilinear(v: &HPoly, w: &HPoly, m: Merge) -> HPoly {
    let mut out = HPoly::zero();
    let mut cache: HashMap<(&Index, &Index), HPoly> = HashMap::new();
    for (a, ha, ca) in v.terms() {
        for (b, hb, cb) in w.terms() {
            let key = if a <= b { (a, b) } else { (b, a) };
            let prod = cache
                .entry(key)
                .or_insert_with(|| monomial_product(key.0.parts(), key.1.parts(), m));
            out.add_scaled(&prod.mul_hbar(ha + hb), &(ca * cb));
        }
    }
    out
}

/// The stuffle product `∗` (merge term `+e_{k+k'}`).
pub fn stuffle(v: &HPoly, w: &HPoly) -> HPoly {
    bilinear(v, w, STUFFLE)
}

/// The star product `⋆` (merge term `-e_{k+k'}`).
pub fn star_prod(v: &HPoly, w: &HPoly) -> HPoly {
    bilinear(v, w, STAR)
}

/// `∗_q`, merge term `+(e_{k+k'} + ħ e_{k+k'-1})`.
pub fn q_stuffle(v: &HPoly, w: &HPoly) -> HPoly {
    bilinear(v, w, Q_STUFFLE)
}

/// `⋆_q`, merge term `-(e_{k+k'} + ħ e_{k+k'-1})`.
pub fn q_star(v: &HPoly, w: &HPoly) -> HPoly {
    bilinear(v, w, Q_STAR)
}

/// `e_k ↦ (-1)^{wt(k)+1} e_{reverse(k^∨)}`, extended linearly.
pub fn delta(w: &HPoly) -> Result<HPoly> {
    w.require_hbar_free()?;
    let mut out = HPoly::zero();
    for (k, _, c) in w.terms() {
        let d = k.dual_reverse()?;
        let c = if k.weight() % 2 == 1 { c.clone() } else { -c };
        out.add_term(d, 0, c);
    }
    Ok(out)
}

fn map_with_e1(w: &HPoly, star: bool) -> Result<HPoly> {
    w.require_hbar_free()?;
    let e1 = HPoly::monomial(Index(vec![1]));
    let mut out = HPoly::zero();
    for (k, _, c) in w.terms() {
        let dep = k.depth() as i64;
        let (factor, prod) = if star {
            (rat(2, 2 * dep - 1), star_prod(&e1, &HPoly::monomial(k.clone())))
        } else {
            (rat(-2, 2 * dep + 1), stuffle(&e1, &HPoly::monomial(k.clone())))
        };
        out.add_scaled(&prod, &(factor * c));
    }
    Ok(out)
}

/// `L(e_k) = -2/(2 dep(k)+1) · e_1 ∗ e_k`
pub fn map_l(w: &HPoly) -> Result<HPoly> {
    map_with_e1(w, false)
}

/// `L★(e_k) = 2/(2 dep(k)-1) · e_1 ⋆ e_k`; on the empty index this gives `-2 e_1`.
pub fn map_lstar(w: &HPoly) -> Result<HPoly> {
    map_with_e1(w, true)
}

fn rho_with(w: &HPoly, map: fn(&HPoly) -> Result<HPoly>) -> HPoly {
    // Horner: Σ_d L^d(w_d) = w_0 + L(w_1 + L(w_2 + …))
    let top = w.max_hbar_degree();
    let mut acc = w.hbar_component(top);
    for d in (0..top).rev() {
        acc = map(&acc).expect("hbar-free by construction");
        acc.add_scaled(&w.hbar_component(d), &Rational::one());
    }
    acc
}

/// `ρ(ħ^k w) = L^k(w)`
pub fn rho(w: &HPoly) -> HPoly {
    rho_with(w, map_l)
}

/// `ρ★(ħ^k w) = (L★)^k(w)`
pub fn rho_star(w: &HPoly) -> HPoly {
    rho_with(w, map_lstar)
}

/// `v ∗̃ w = ρ(v ∗_q w)` on `ħ`-free inputs.
pub fn tilde_ast(v: &HPoly, w: &HPoly) -> Result<HPoly> {
    v.require_hbar_free()?;
    w.require_hbar_free()?;
    Ok(rho(&q_stuffle(v, w)))
}

/// `v ⋆̃ w = ρ★(v ⋆_q w)` on `ħ`-free inputs.
pub fn tilde_star(v: &HPoly, w: &HPoly) -> Result<HPoly> {
    v.require_hbar_free()?;
    w.require_hbar_free()?;
    Ok(rho_star(&q_star(v, w)))
}

/// Expresses `z★(k)` as a combination of non-star values `z(k')`, with `ħ`
/// standing for `1-q`. Each `≥` splits into `>` and `=`; equal summation
/// variables merge `e_a, e_b` into `e_{a+b} + ħ e_{a+b-1}`.
pub fn star_to_mono(k: &Index) -> HPoly {
    let mut memo = HashMap::new();
    star_to_mono_rec(k.parts(), &mut memo)
}

fn star_to_mono_rec(k: &[u32], memo: &mut HashMap<Vec<u32>, HPoly>) -> HPoly {
    if k.len() <= 1 {
        return HPoly::monomial(Index(k.to_vec()));
    }
    if let Some(v) = memo.get(k) {
        return v.clone();
    }
    let mut out = star_to_mono_rec(&k[1..], memo).prepend(k[0]);
    let s = k[0] + k[1];
    let mut merged = Vec::with_capacity(k.len() - 1);
    merged.push(s);
    merged.extend_from_slice(&k[2..]);
    out.add_scaled(&star_to_mono_rec(&merged, memo), &Rational::one());
    merged[0] = s - 1;
    out.add_scaled(&star_to_mono_rec(&merged, memo).mul_hbar(1), &Rational::one());
    memo.insert(k.to_vec(), out.clone());
    out
}

/// Linear extension of [`star_to_mono`], multiplying `ħ`-degrees.
pub fn star_to_mono_poly(w: &HPoly) -> HPoly {
    let mut memo = HashMap::new();
    let mut out = HPoly::zero();
    for (k, h, c) in w.terms() {
        out.add_scaled(&star_to_mono_rec(k.parts(), &mut memo).mul_hbar(h), c);
    }
    out
}

/// Expresses `z(k)` as a combination of star values `z★(k')`; the inverse
/// of [`star_to_mono`]. Every non-leading term of `star_to_mono(k)` has
/// smaller depth, so the inverse follows by recursion on depth.
pub fn mono_to_star(k: &Index) -> HPoly {
    let mut memo = HashMap::new();
    mono_to_star_rec(k, &mut memo)
}

fn mono_to_star_rec(k: &Index, memo: &mut HashMap<Index, HPoly>) -> HPoly {
    if let Some(v) = memo.get(k) {
        return v.clone();
    }
    let mut out = HPoly::monomial(k.clone());
    if k.depth() > 1 {
        for (t, h, c) in star_to_mono(k).terms() {
            if t == k && h == 0 {
                continue;
            }
            out.add_scaled(&mono_to_star_rec(t, memo).mul_hbar(h), &-c);
        }
    }
    memo.insert(k.clone(), out.clone());
    out
}
