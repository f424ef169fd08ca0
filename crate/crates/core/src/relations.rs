//! Duality and double-shuffle relations among star values, the resulting
//! dimension upper bounds, observed dimensions of exact value spaces, and
//! probes of the kernel of `Z(k) ↦ Z(k) mod (1 - ζ_p)`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_prime, Rational};
use crate::cyclotomic::{one_minus_zeta_in, Ideal};
use crate::error::{Error, Result};
use crate::hoffman::{compositions_of_weight, delta, map_l, tilde_star, HPoly, Index};
use crate::linalg::{certified_rank, integer_row, rank_mod_p, RationalMatrix, SparseRow};
use crate::qseries::ZEvaluator;

fn duality_sign(k: &Index) -> Rational {
    if k.weight() % 2 == 1 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

fn dual(k: &Index) -> Index {
    k.dual_reverse().expect("nonempty index")
}

/// Unordered pairs of nonempty indices with total weight `k`.
fn index_pairs(k: u32) -> Vec<(Index, Index)> {
    let mut out = Vec::new();
    for w in 1..k {
        if w > k - w {
            break;
        }
        let left = compositions_of_weight(w);
        let right = compositions_of_weight(k - w);
        for (i, a) in left.iter().enumerate() {
            for (j, b) in right.iter().enumerate() {
                if w == k - w && j < i {
                    continue;
                }
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Memoized `e_a ⋆̃ e_b`, symmetric in its arguments.
struct TildeCache {
    map: HashMap<(Index, Index), HPoly>,
}

impl TildeCache {
    fn build(pairs: &[(Index, Index)]) -> Self {
        let mut keys: Vec<(Index, Index)> = pairs
            .iter()
            .flat_map(|(a, b)| {
                let (da, db) = (dual(a), dual(b));
                [ordered(a, b), ordered(&da, &db)]
            })
            .collect();
        keys.sort();
        keys.dedup();
        let map = keys
            .into_par_iter()
            .map(|(a, b)| {
                let t = tilde_star(&HPoly::monomial(a.clone()), &HPoly::monomial(b.clone()))
                    .expect("hbar-free inputs");
                ((a, b), t)
            })
            .collect();
        TildeCache { map }
    }

    fn get(&self, a: &Index, b: &Index) -> &HPoly {
        &self.map[&ordered(a, b)]
    }
}

fn ordered(a: &Index, b: &Index) -> (Index, Index) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

fn double_shuffle(cache: &TildeCache, a: &Index, b: &Index) -> HPoly {
    let t = cache.get(a, b);
    let s = duality_sign(a) * duality_sign(b);
    let tt = delta(cache.get(&dual(a), &dual(b))).expect("hbar-free");
    t.sub(&tt.scale(&s))
}

/// The duality elements `e_k - (-1)^{k+1} e_{δ-dual}` and the double-shuffle
/// elements `e_a ⋆̃ e_b - δ(δe_a ⋆̃ δe_b)` of weight `k`. Zero elements and
/// exact duplicates are dropped.
pub fn relation_family(k: u32) -> Vec<HPoly> {
    if k == 0 {
        return Vec::new();
    }
    let mut out: Vec<HPoly> = compositions_of_weight(k)
        .into_iter()
        .map(|idx| {
            let mut e = HPoly::monomial(idx.clone());
            e.add_term(dual(&idx), 0, -duality_sign(&idx));
            e
        })
        .collect();
    let pairs = index_pairs(k);
    let cache = TildeCache::build(&pairs);
    out.extend(pairs.par_iter().map(|(a, b)| double_shuffle(&cache, a, b)).collect::<Vec<_>>());
    out.retain(|e| !e.is_zero());
    let mut seen = std::collections::HashSet::new();
    out.retain(|e| seen.insert(e.to_string()));
    out
}

/// One row of the dimension table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionRow {
    pub k: u32,
    pub num_indices: usize,
    pub relation_rank: usize,
    pub upper_bound: usize,
    /// Primes used to certify the rank of the double-shuffle block.
    pub primes: Vec<u64>,
}

/// Coordinates of `H¹_k` modulo the duality relations: each orbit
/// `{k, δ-dual}` keeps its smaller member; a self-dual index of even weight
/// is zero.
struct DualityQuotient {
    /// index -> (column, sign) expressing `e_index = sign · e_rep`
    coord: BTreeMap<Index, (usize, Rational)>,
    cols: usize,
    rank: usize,
}

impl DualityQuotient {
    fn new(k: u32) -> Self {
        let mut coord = BTreeMap::new();
        let mut cols = 0;
        let mut rank = 0;
        for idx in compositions_of_weight(k) {
            let d = dual(&idx);
            let sign = duality_sign(&idx);
            if d == idx {
                if sign.is_one() {
                    coord.insert(idx, (cols, Rational::one()));
                    cols += 1;
                } else {
                    rank += 1;
                }
            } else if idx < d {
                coord.insert(idx, (cols, Rational::one()));
                coord.insert(d, (cols, sign));
                cols += 1;
                rank += 1;
            }
        }
        DualityQuotient { coord, cols, rank }
    }

    fn project(&self, w: &HPoly) -> SparseRow {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (idx, _, c) in w.terms() {
            if let Some((col, s)) = self.coord.get(idx) {
                *acc.entry(*col).or_insert_with(Rational::zero) += c * s;
            }
        }
        let row: Vec<(usize, Rational)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        integer_row(&row)
    }
}

/// Upper bound for the dimension of the weight-`k` value space:
/// `2^{k-1}` minus the rank of [`relation_family`]`(k)`.
///
/// The duality relations are used to pass to a quotient first; the
/// double-shuffle rows are projected there and ranked exactly with
/// [`certified_rank`].
pub fn dimension_row(k: u32) -> Result<DimensionRow> {
    if k == 0 {
        return Ok(DimensionRow {
            k,
            num_indices: 1,
            relation_rank: 0,
            upper_bound: 1,
            primes: Vec::new(),
        });
    }
    let quotient = DualityQuotient::new(k);
    let pairs = index_pairs(k);
    let cache = TildeCache::build(&pairs);
    let mut rows: Vec<SparseRow> = pairs
        .par_iter()
        .map(|(a, b)| quotient.project(&double_shuffle(&cache, a, b)))
        .filter(|r| !r.is_empty())
        .collect();
    rows.sort();
    rows.dedup();
    let (ds_rank, primes) = if rows.is_empty() {
        (0, Vec::new())
    } else {
        let cert = certified_rank(&rows, quotient.cols)?;
        (cert.rank, cert.primes)
    };
    let num_indices = 1usize << (k - 1);
    let relation_rank = quotient.rank + ds_rank;
    Ok(DimensionRow {
        k,
        num_indices,
        relation_rank,
        upper_bound: num_indices - relation_rank,
        primes,
    })
}

/// [`dimension_row`] for every `k ≤ k_max`.
pub fn dimension_upper_bounds(k_max: u32) -> Result<Vec<DimensionRow>> {
    (0..=k_max).map(dimension_row).collect()
}

/// Reference values of the upper bounds for `k = 0..=12`.
pub const DIMENSION_TABLE: [usize; 13] = [1, 1, 1, 2, 2, 4, 5, 8, 12, 17, 27, 38, 57];

/// Matrix whose rows are the power-basis coordinates of `z_p(k; ζ_p)` for
/// all indices of weight `k`, in [`compositions_of_weight`] order.
pub fn value_matrix(k: u32, p: u32) -> Result<(Vec<Index>, RationalMatrix)> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    let indices = if k == 0 {
        vec![Index::empty()]
    } else {
        compositions_of_weight(k)
    };
    let mut ev = ZEvaluator::new(p);
    let rows: Vec<Vec<Rational>> = indices.iter().map(|i| ev.z(i).coeffs()).collect();
    let cols = ev.field().degree();
    Ok((indices, RationalMatrix::from_rows(cols, rows)?))
}

/// `dim_Q` of the span of `z_p(k; e^{2πi/p})` over all indices of weight `k`.
pub fn observed_dimension(k: u32, p: u32) -> Result<usize> {
    let (_, m) = value_matrix(k, p)?;
    Ok(m.rank())
}

/// Basis of the `Q`-linear relations among the exact values
/// `z_p(k; ζ_p)`, as integer combinations of indices.
pub fn value_relations(k: u32, p: u32) -> Result<Vec<HPoly>> {
    let (indices, m) = value_matrix(k, p)?;
    let t = transpose(&m);
    let (_, kernel) = t.rank_kernel();
    Ok(kernel
        .into_iter()
        .map(|v| {
            HPoly::from_terms(
                indices
                    .iter()
                    .zip(v)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (i.clone(), 0, Rational::from_integer(c))),
            )
        })
        .collect())
}

fn transpose(m: &RationalMatrix) -> RationalMatrix {
    let data = (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m.get(i, j).clone()).collect())
        .collect();
    RationalMatrix::from_rows(m.rows(), data).expect("rectangular")
}

/// Outcome of [`ker_phi_probe`] at one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KerPhiPrime {
    pub prime: u64,
    /// The image mod `(1 - ζ_p)` vanishes.
    pub prime_image_zero: bool,
    /// The value mod `(p)` lies in `(1 - ζ_p)` times the span of the
    /// weight-`(k-1)` values.
    pub in_varpi_span: bool,
    /// Rank of that span mod `(p)`.
    pub span_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KerPhiReport {
    pub weight: u32,
    pub primes: Vec<KerPhiPrime>,
    pub excluded: BTreeMap<u64, String>,
}

/// Evaluates a homogeneous `ħ`-free combination at each prime in
/// `Z[ζ_p]/(p)` and tests membership in `ker φ` and in `(1-ζ_p)·Z_{k-1}`.
pub fn ker_phi_probe(combo: &HPoly, primes: &[u64]) -> Result<KerPhiReport> {
    if !combo.is_hbar_free() {
        return Err(Error::HbarPresent);
    }
    if !combo.is_homogeneous() {
        return Err(Error::InvalidArgument("combination must be weight-homogeneous".into()));
    }
    let weight = combo.total_weights().first().copied().unwrap_or(0);
    if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
        return Err(Error::NotPrime(p));
    }
    let lower: Vec<Index> = match weight {
        0 => Vec::new(),
        1 => vec![Index::empty()],
        w => compositions_of_weight(w - 1),
    };
    let results: Vec<(u64, Result<KerPhiPrime>)> = primes
        .par_iter()
        .map(|&p| {
            let probe = || -> Result<KerPhiPrime> {
                let mut ev = ZEvaluator::new(p as u32);
                let varpi = one_minus_zeta_in(ev.field());
                let v = ev.z_hpoly(combo, false).reduce_mod(Ideal::Full)?;
                let prime_image_zero = v.to_prime_ideal().is_zero();
                let span: Vec<Vec<u64>> = lower
                    .iter()
                    .map(|i| {
                        let w = varpi.checked_mul(&ev.z(i))?;
                        Ok(w.reduce_mod(Ideal::Full)?.coords)
                    })
                    .collect::<Result<_>>()?;
                let span_rank = rank_mod_p(&span, p);
                let mut with = span;
                with.push(v.coords.clone());
                let in_varpi_span = rank_mod_p(&with, p) == span_rank;
                Ok(KerPhiPrime {
                    prime: p,
                    prime_image_zero,
                    in_varpi_span,
                    span_rank,
                })
            };
            (p, probe())
        })
        .collect();
    let mut report = KerPhiReport {
        weight,
        primes: Vec::new(),
        excluded: BTreeMap::new(),
    };
    for (p, r) in results {
        match r {
            Ok(x) => report.primes.push(x),
            Err(e) => {
                report.excluded.insert(p, e.to_string());
            }
        }
    }
    Ok(report)
}

/// `L(e_k)`, the `ħ`-image of a weight-`w` index as a weight-`(w+1)` element.
pub fn hbar_image(k: &Index) -> HPoly {
    map_l(&HPoly::monomial(k.clone())).expect("hbar-free")
}

/// Kernel vector as an `HPoly` over the given index order.
pub fn combination(indices: &[Index], v: &[BigInt]) -> HPoly {
    HPoly::from_terms(
        indices
            .iter()
            .zip(v)
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i.clone(), 0, Rational::from_integer(c.clone()))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_in;
    use crate::finite::{verify_relation, Mode, Ring};

    #[test]
    fn small_table() {
        let rows = dimension_upper_bounds(8).unwrap();
        let got: Vec<usize> = rows.iter().map(|r| r.upper_bound).collect();
        assert_eq!(got, DIMENSION_TABLE[..=8].to_vec());
    }

    #[test]
    fn quotient_rank_matches_direct_rank() {
        for k in 1..=6 {
            let fam = relation_family(k);
            let idx = compositions_of_weight(k);
            let col: BTreeMap<&Index, usize> = idx.iter().enumerate().map(|(i, x)| (x, i)).collect();
            let data: Vec<Vec<Rational>> = fam
                .iter()
                .map(|e| {
                    let mut r = vec![Rational::zero(); idx.len()];
                    for (i, _, c) in e.terms() {
                        r[col[i]] += c;
                    }
                    r
                })
                .collect();
            let rank = if data.is_empty() {
                0
            } else {
                RationalMatrix::from_rows(idx.len(), data).unwrap().rank()
            };
            assert_eq!(dimension_row(k).unwrap().relation_rank, rank, "k={k}");
        }
    }

    #[test]
    fn family_is_homogeneous_and_sound() {
        let primes = primes_in(7, 31);
        for k in 1..=5 {
            for e in relation_family(k) {
                assert!(e.is_hbar_free());
                assert_eq!(e.total_weights(), vec![k]);
                let rep = verify_relation(&e, Ring::Acyc, &primes, Mode::Star).unwrap();
                assert!(rep.holds(), "k={k}: {e}");
            }
        }
    }

    #[test]
    fn observed_dimensions_small() {
        assert_eq!(observed_dimension(3, 13).unwrap(), 2);
        assert_eq!(observed_dimension(5, 11).unwrap(), 4);
        assert!(observed_dimension(2, 2).unwrap() <= 1);
        assert!(observed_dimension(2, 9).is_err());
    }

    #[test]
    fn value_relations_vanish() {
        for v in value_relations(4, 11).unwrap() {
            let mut ev = ZEvaluator::new(11);
            assert!(ev.z_hpoly(&v, false).is_zero());
        }
    }

    #[test]
    fn ker_phi_examples() {
        let primes = primes_in(7, 31);
        let combo = HPoly::from_terms([
            (Index::from_parts(&[4, 1]), 0, Rational::one()),
            (Index::from_parts(&[3, 1, 1]), 0, -Rational::from_integer(2.into())),
        ]);
        let rep = ker_phi_probe(&combo, &primes).unwrap();
        assert!(rep.primes.iter().all(|x| x.prime_image_zero));
        assert!(rep.primes.iter().all(|x| !x.in_varpi_span));

        let member = hbar_image(&Index::from_parts(&[2]));
        let rep = ker_phi_probe(&member, &primes).unwrap();
        assert!(rep.primes.iter().all(|x| x.in_varpi_span && x.prime_image_zero));
    }
}
