//! Exact linear algebra: fraction-free elimination over `Q`, dense rank over
//! `F_p`, and a certified rank for large sparse integer matrices.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{
    bigint_mod, inv_mod, is_prime, lcm_denominators, mul_mod, primitive_integer_vector,
    rational_reconstruction, Rational,
};
use crate::error::{Error, Result};

/// Dense matrix over `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Rational>>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![vec![Rational::zero(); cols]; rows],
        }
    }

    /// Builds a matrix from rows; all rows must have length `cols`.
    pub fn from_rows(cols: usize, data: Vec<Vec<Rational>>) -> Result<Self> {
        if data.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        Ok(RationalMatrix {
            rows: data.len(),
            cols,
            data,
        })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
            .collect();
        RationalMatrix::from_rows(cols, data).expect("rectangular input")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i][j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i]
    }

    /// `self · v`
    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        self.data
            .iter()
            .map(|r| r.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// Rank and a basis of the right kernel, by fraction-free (Bareiss)
    /// elimination. Each row is first scaled to integers; the pivot in each
    /// column is the entry of smallest nonzero magnitude. Kernel vectors are
    /// primitive integer vectors with positive leading entry.
    pub fn rank_kernel(&self) -> (usize, Vec<Vec<BigInt>>) {
        let mut a: Vec<Vec<BigInt>> = self
            .data
            .iter()
            .map(|r| {
                let l = lcm_denominators(r);
                r.iter()
                    .map(|x| (x * Rational::from_integer(l.clone())).to_integer())
                    .collect()
            })
            .collect();
        let (rows, cols) = (self.rows, self.cols);
        let mut prev = BigInt::one();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows)
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()))
            else {
                continue;
            };
            a.swap(r, piv);
            let (top, bottom) = a.split_at_mut(r + 1);
            let prow = &top[r];
            bottom.par_iter_mut().for_each(|row| {
                let f = row[c].clone();
                for j in c + 1..cols {
                    let v = &prow[c] * &row[j] - &f * &prow[j];
                    row[j] = v / &prev;
                }
                row[c] = BigInt::zero();
            });
            prev = a[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        let rank = pivots.len();
        let kernel = echelon_kernel(&a[..rank], &pivots, cols);
        (rank, kernel)
    }

    pub fn rank(&self) -> usize {
        self.rank_kernel().0
    }
}

/// Kernel of an integer row-echelon matrix by rational back-substitution.
fn echelon_kernel(a: &[Vec<BigInt>], pivots: &[usize], cols: usize) -> Vec<Vec<BigInt>> {
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; cols];
        for &p in pivots {
            v[p] = true;
        }
        v
    };
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut x = vec![Rational::zero(); cols];
            x[f] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate().rev() {
                let s = (pc + 1..cols).fold(Rational::zero(), |acc, j| {
                    if a[i][j].is_zero() || x[j].is_zero() {
                        acc
                    } else {
                        acc + Rational::from_integer(a[i][j].clone()) * &x[j]
                    }
                });
                x[pc] = -s / Rational::from_integer(a[i][pc].clone());
            }
            primitive_integer_vector(&x)
        })
        .collect()
}

/// Rank over `F_p` of a dense matrix with entries in `[0, p)`.
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] % p != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = inv_mod(m[r][c], p).expect("nonzero pivot");
        for j in c..cols {
            m[r][j] = mul_mod(m[r][j], inv, p);
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for j in c..cols {
                row[j] = (row[j] + p - mul_mod(f, prow[j], p)) % p;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// A sparse integer row: `(column, value)` pairs with distinct columns.
pub type SparseRow = Vec<(usize, BigInt)>;

/// Scales a sparse rational row to a primitive integer row.
pub fn integer_row(row: &[(usize, Rational)]) -> SparseRow {
    let l = lcm_denominators(row.iter().map(|(_, c)| c));
    let ints: Vec<(usize, BigInt)> = row
        .iter()
        .map(|(j, c)| (*j, (c * Rational::from_integer(l.clone())).to_integer()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, (_, x)| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|(j, x)| (j, x / &g)).collect()
    }
}

/// Incremental row reduction over `F_p`: a set of fully reduced pivot rows.
struct ModEchelon {
    p: u64,
    cols: usize,
    /// pivot column -> dense reduced row (pivot entry 1, zero at other pivots)
    rows: BTreeMap<usize, Vec<u64>>,
}

impl ModEchelon {
    fn new(p: u64, cols: usize) -> Self {
        ModEchelon {
            p,
            cols,
            rows: BTreeMap::new(),
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Inserts a row; returns true if it increased the rank.
    fn insert(&mut self, sparse: &[(usize, u64)]) -> bool {
        let p = self.p;
        let mut v = vec![0u64; self.cols];
        for &(j, x) in sparse {
            v[j] = x % p;
        }
        for (&c, row) in &self.rows {
            let f = v[c];
            if f == 0 {
                continue;
            }
            let nf = p - f;
            for (vj, &rj) in v.iter_mut().zip(row.iter()).skip(c) {
                if rj != 0 {
                    *vj = (*vj + nf * rj) % p;
                }
            }
        }
        let Some(c) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(v[c], p).expect("nonzero");
        for x in v.iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        // keep the basis fully reduced
        for row in self.rows.values_mut() {
            let f = row[c];
            if f == 0 {
                continue;
            }
            let nf = p - f;
            for (rj, &vj) in row.iter_mut().zip(v.iter()).skip(c) {
                if vj != 0 {
                    *rj = (*rj + nf * vj) % p;
                }
            }
        }
        self.rows.insert(c, v);
        true
    }

    /// Right-kernel basis in reduced form: for each free column `f`, the
    /// vector with `x_f = 1`, zero on other free columns.
    fn kernel(&self) -> Vec<(usize, Vec<u64>)> {
        let p = self.p;
        (0..self.cols)
            .filter(|c| !self.rows.contains_key(c))
            .map(|f| {
                let mut x = vec![0u64; self.cols];
                x[f] = 1;
                for (&c, row) in &self.rows {
                    x[c] = (p - row[f]) % p;
                }
                (f, x)
            })
            .collect()
    }
}

fn dot_mod(row: &[(usize, u64)], x: &[u64], p: u64) -> u64 {
    row.iter()
        .fold(0u64, |acc, &(j, v)| (acc + mul_mod(v, x[j], p)) % p)
}

/// Rank of a sparse integer matrix over `F_p`, with the reduced kernel.
/// Rows are inserted until the rank stalls, then every row is tested
/// against the kernel and only rows outside the current span are inserted.
fn rank_and_kernel_mod_p(
    rows: &[SparseRow],
    cols: usize,
    p: u64,
) -> (usize, Vec<(usize, Vec<u64>)>) {
    let reduced: Vec<Vec<(usize, u64)>> = rows
        .par_iter()
        .map(|r| {
            r.iter()
                .map(|(j, x)| (*j, bigint_mod(x, p)))
                .filter(|(_, x)| *x != 0)
                .collect()
        })
        .collect();
    let mut ech = ModEchelon::new(p, cols);
    let mut stall = 0;
    for r in &reduced {
        if ech.rank() == cols {
            break;
        }
        if ech.insert(r) {
            stall = 0;
        } else {
            stall += 1;
            if stall > 64 {
                break;
            }
        }
    }
    loop {
        let kernel = ech.kernel();
        if kernel.is_empty() {
            return (ech.rank(), kernel);
        }
        let outside: Vec<usize> = reduced
            .par_iter()
            .enumerate()
            .filter(|(_, r)| kernel.iter().any(|(_, x)| dot_mod(r, x, p) != 0))
            .map(|(i, _)| i)
            .collect();
        if outside.is_empty() {
            return (ech.rank(), kernel);
        }
        for i in outside {
            ech.insert(&reduced[i]);
        }
    }
}

/// A rank over `Q` together with the evidence that certifies it.
#[derive(Clone, Debug)]
pub struct CertifiedRank {
    pub rank: usize,
    /// Primes used for the modular computations.
    pub primes: Vec<u64>,
    /// Right-kernel basis over `Q`, as primitive integer vectors (dense).
    pub kernel: Vec<Vec<BigInt>>,
}

/// Primes just below `2^31`, in decreasing order.
fn large_primes() -> impl Iterator<Item = u64> {
    (1u64 << 20..(1u64 << 31)).rev().filter(|&q| is_prime(q))
}

/// Exact rank of a sparse integer matrix.
///
/// `rank_p ≤ rank_Q` for every prime, so the modular rank is a lower bound.
/// The upper bound comes from a kernel: the reduced kernel basis modulo
/// several primes is lifted by CRT and rational reconstruction, and each
/// lifted vector is checked against every row in exact integer arithmetic.
/// `cols - rank_p` verified, independent kernel vectors force
/// `rank_Q ≤ rank_p`.
pub fn certified_rank(rows: &[SparseRow], cols: usize) -> Result<CertifiedRank> {
    let mut primes_used = Vec::new();
    let mut modulus = BigInt::one();
    // residues[v][j] accumulated by CRT, for kernel vector v
    let mut crt: Vec<Vec<BigInt>> = Vec::new();
    let mut free_cols: Option<Vec<usize>> = None;
    let mut rank = None;
    let mut last_lift: Option<Vec<Vec<Rational>>> = None;
    for p in large_primes() {
        if primes_used.len() >= 64 {
            break;
        }
        let (r, kernel) = rank_and_kernel_mod_p(rows, cols, p);
        let frees: Vec<usize> = kernel.iter().map(|(f, _)| *f).collect();
        match (&rank, &free_cols) {
            (Some(r0), Some(f0)) if r < *r0 || (r == *r0 && frees != *f0) => continue, // unlucky prime
            (Some(r0), _) if r > *r0 => {
                // earlier primes were unlucky; restart
                primes_used.clear();
                modulus = BigInt::one();
                crt.clear();
                last_lift = None;
            }
            _ => {}
        }
        rank = Some(r);
        free_cols = Some(frees);
        primes_used.push(p);
        let pb = BigInt::from(p);
        if crt.is_empty() {
            crt = kernel
                .iter()
                .map(|(_, x)| x.iter().map(|&v| BigInt::from(v)).collect())
                .collect();
            modulus = pb;
        } else {
            // combine: x ≡ a (mod M), x ≡ b (mod p)
            let minv = bigint_mod(&modulus, p);
            let minv = BigInt::from(inv_mod(minv, p).expect("coprime moduli"));
            for (acc, (_, x)) in crt.iter_mut().zip(&kernel) {
                for (a, &b) in acc.iter_mut().zip(x) {
                    let t = ((BigInt::from(b) - &*a) * &minv).mod_floor(&pb);
                    *a += &modulus * t;
                }
            }
            modulus *= &pb;
        }
        let lifted: Option<Vec<Vec<Rational>>> = crt
            .iter()
            .map(|v| v.iter().map(|a| rational_reconstruction(a, &modulus)).collect())
            .collect();
        let Some(lifted) = lifted else {
            continue;
        };
        let stable = last_lift.as_ref() == Some(&lifted);
        last_lift = Some(lifted.clone());
        if !stable {
            continue;
        }
        let kernel: Vec<Vec<BigInt>> = lifted.iter().map(|v| primitive_integer_vector(v)).collect();
        let ok = rows.par_iter().all(|row| {
            kernel.iter().all(|v| {
                row.iter()
                    .fold(BigInt::zero(), |acc, (j, x)| acc + x * &v[*j])
                    .is_zero()
            })
        });
        if ok {
            return Ok(CertifiedRank {
                rank: rank.expect("set above"),
                primes: primes_used,
                kernel,
            });
        }
    }
    Err(Error::Certificate(format!(
        "kernel did not lift after {} primes",
        primes_used.len()
    )))
}

/// Converts a small integer to `u64` residue, for tests and callers with
/// machine-size data.
pub fn i64_mod(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64).to_u64().expect("nonnegative")
}
