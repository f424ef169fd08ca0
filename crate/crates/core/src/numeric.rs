//! Multi-precision evaluation of `z_n(k; e^{2πi/n})`, the half-range sums
//! `A_n^±`, and extrapolation of `n → ∞` limits.
//!
//! With `q = e^{2πi/n}` one has
//! `q^{(k-1)m}/[m]^k = e^{πi((k-2)m+k)/n} (sin(π/n)/sin(mπ/n))^k`,
//! so every summand is a tabulated root of unity times a real power.

use std::collections::HashMap;

use astro_float::BigFloat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bigfloat::{bigfloat_to_f64, BigComplex, FloatCtx, GUARD_BITS, RM};
use crate::error::{Error, Result};
use crate::hoffman::{star_to_mono, Index};

/// Tables for one level `n` at one working precision.
pub struct NumericLevel {
    n: u32,
    prec: usize,
    wp: usize,
    /// `e^{πij/n}` for `j = 0..2n`
    roots: Vec<BigComplex>,
    powers: HashMap<(u32, bool), Vec<BigFloat>>,
}

impl NumericLevel {
    /// Builds the root table. Entries are products of one coarse and one fine
    /// root (`j = bB + r`), so only `O(√n)` sine/cosine evaluations are needed.
    pub fn new(n: u32, precision: usize) -> Result<Self> {
        if precision < 64 {
            return Err(Error::PrecisionTooLow(precision));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("level must be positive".into()));
        }
        let wp = precision + GUARD_BITS;
        let two_n = 2 * n as i64;
        let block = ((two_n as f64).sqrt().ceil() as i64).max(1);
        let trig = |js: Vec<i64>| -> Vec<BigComplex> {
            js.par_iter()
                .map_init(
                    || FloatCtx::new(wp),
                    |ctx, &j| ctx.exp_i_pi_frac(j, n as i64),
                )
                .collect()
        };
        let fine = trig((0..block).collect());
        let coarse = trig((0..=(two_n / block)).map(|b| b * block).collect());
        let roots: Vec<BigComplex> = (0..two_n)
            .into_par_iter()
            .map(|j| {
                let (b, r) = ((j / block) as usize, (j % block) as usize);
                if r == 0 {
                    coarse[b].clone()
                } else {
                    coarse[b].mul(&fine[r], wp)
                }
            })
            .collect();
        Ok(NumericLevel {
            n,
            prec: precision,
            wp,
            roots,
            powers: HashMap::new(),
        })
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    fn root(&self, j: i64) -> &BigComplex {
        &self.roots[j.rem_euclid(2 * self.n as i64) as usize]
    }

    fn sin_pi(&self, m: u32) -> &BigFloat {
        &self.roots[m as usize].im
    }

    /// `base(m)^k` for `m = 0..n` where `base(m)` is `sin(π/n)/sin(mπ/n)`
    /// (`scaled = false`) or `π/(n sin(mπ/n))` (`scaled = true`); index 0 unused.
    fn powers(&mut self, k: u32, scaled: bool) -> &Vec<BigFloat> {
        let key = (k, scaled);
        if !self.powers.contains_key(&key) {
            let wp = self.wp;
            let n = self.n;
            let num = if scaled {
                let mut ctx = FloatCtx::new(wp);
                ctx.pi().div(&BigFloat::from_u64(n as u64, wp), wp, RM)
            } else {
                self.sin_pi(1).clone()
            };
            let v: Vec<BigFloat> = (0..n)
                .into_par_iter()
                .map(|m| {
                    if m == 0 {
                        return BigFloat::from_u64(0, wp);
                    }
                    let base = num.div(self.sin_pi(m), wp, RM);
                    let mut acc = base.clone();
                    for _ in 1..k {
                        acc = acc.mul(&base, wp, RM);
                    }
                    acc
                })
                .collect();
            self.powers.insert(key, v);
        }
        &self.powers[&key]
    }

    /// Nested sum over `upper ≥ m_1 > m_2 > … > 0` (or `≥` between the
    /// `m_j` when `star`) of `Π summand(k_j, m_j)`.
    fn nested_sum(
        &self,
        parts: &[u32],
        upper: u32,
        star: bool,
        summand: &dyn Fn(&NumericLevel, u32, u32) -> BigComplex,
    ) -> BigComplex {
        let wp = self.wp;
        if parts.is_empty() {
            return BigComplex::one(wp);
        }
        let len = upper as usize + 1;
        // prefix[m] for the current tail, starting from the last part
        let mut prefix: Option<Vec<BigComplex>> = None;
        for &k in parts.iter().rev() {
            let mut out = Vec::with_capacity(len);
            let mut acc = BigComplex::zero(wp);
            out.push(acc.clone());
            for m in 1..len {
                let t = summand(self, k, m as u32);
                let term = match &prefix {
                    None => t,
                    Some(q) => t.mul(if star { &q[m] } else { &q[m - 1] }, wp),
                };
                acc = acc.add(&term, wp);
                out.push(acc.clone());
            }
            prefix = Some(out);
        }
        prefix.expect("nonempty parts").pop().expect("nonempty prefix")
    }

    fn prepare(&mut self, parts: &[u32], scaled: bool) {
        for &k in parts {
            self.powers(k, scaled);
        }
    }

    /// `z_n(k; e^{2πi/n})` or its star version.
    pub fn z(&mut self, k: &Index, star: bool) -> BigComplex {
        if k.is_empty() {
            return BigComplex::one(self.prec);
        }
        if self.n == 1 {
            return BigComplex::zero(self.prec);
        }
        self.prepare(k.parts(), false);
        let summand = |lv: &NumericLevel, k: u32, m: u32| {
            let phase = lv.root((k as i64 - 2) * m as i64 + k as i64);
            phase.scale(&lv.powers[&(k, false)][m as usize], lv.wp)
        };
        let v = self.nested_sum(k.parts(), self.n - 1, star, &summand);
        round(&v, self.prec)
    }

    /// `A_n^+(k)` (sum over `n/2 ≥ m_1 > … > m_r > 0`, phases `e^{+πi(k-2)m/n}`)
    /// or `A_n^-(k)` (`n/2 > m_1`, phases `e^{-πi(k-2)m/n}`), each summand
    /// divided by `((n/π) sin(mπ/n))^k`.
    pub fn a_pm(&mut self, k: &Index, plus: bool) -> BigComplex {
        let upper = if plus { self.n / 2 } else { (self.n - 1) / 2 };
        self.prepare(k.parts(), true);
        let sign: i64 = if plus { 1 } else { -1 };
        let summand = move |lv: &NumericLevel, k: u32, m: u32| {
            let phase = lv.root(sign * (k as i64 - 2) * m as i64);
            phase.scale(&lv.powers[&(k, true)][m as usize], lv.wp)
        };
        let v = self.nested_sum(k.parts(), upper, false, &summand);
        round(&v, self.prec)
    }

    /// Right-hand side of the half-range decomposition
    /// `(e^{πi/n}(n/π)sin(π/n))^{wt} Σ_a (-1)^{k_1+…+k_a} A^-(k_a,…,k_1) A^+(k_{a+1},…,k_r)`.
    pub fn decomposition(&mut self, k: &Index) -> BigComplex {
        let wp = self.wp;
        let parts = k.parts();
        let mut total = BigComplex::zero(wp);
        let mut sign_weight = 0u32;
        for a in 0..=parts.len() {
            if a > 0 {
                sign_weight += parts[a - 1];
            }
            let head = Index::from_parts(&parts[..a]).reverse();
            let tail = Index::from_parts(&parts[a..]);
            let term = self.a_pm(&head, false).mul(&self.a_pm(&tail, true), wp);
            total = if sign_weight % 2 == 0 {
                total.add(&term, wp)
            } else {
                total.sub(&term, wp)
            };
        }
        let mut ctx = FloatCtx::new(wp);
        let n_over_pi = BigFloat::from_u64(self.n as u64, wp).div(&ctx.pi(), wp, RM);
        let factor = self.root(1).scale(&n_over_pi.mul(self.sin_pi(1), wp, RM), wp);
        round(&total.mul(&factor.powi(k.weight(), wp), wp), self.prec)
    }

    /// `(-πi/n)^j`
    fn minus_pi_i_over_n_pow(&self, j: u32) -> BigComplex {
        let wp = self.wp;
        let mut ctx = FloatCtx::new(wp);
        let x = ctx.pi().div(&BigFloat::from_u64(self.n as u64, wp), wp, RM);
        BigComplex::new(BigFloat::from_u64(0, wp), x.neg()).powi(j, wp)
    }

    /// Right-hand side of the conjugation relation exactly as usually
    /// displayed: `conj A^+(k)` for odd `n`, and
    /// `conj A^+(k) + (-πi/n)^{k_1} conj A^+(k_2,…)` for even `n`.
    pub fn conjugation_displayed(&mut self, k: &Index) -> BigComplex {
        let wp = self.wp;
        let base = self.a_pm(k, true).conj();
        if self.n % 2 == 1 || k.is_empty() {
            return base;
        }
        let tail = Index::from_parts(&k.parts()[1..]);
        let extra = self
            .minus_pi_i_over_n_pow(k.parts()[0])
            .mul(&self.a_pm(&tail, true).conj(), wp);
        round(&base.add(&extra, wp), self.prec)
    }

    /// Exact form of the conjugation relation for even `n`, where the
    /// boundary term `m_1 = n/2` restricts the remaining variables to
    /// `m_2 < n/2`: `A^-(k) = conj A^+(k) + (-πi/n)^{k_1} A^-(k_2,…)`.
    pub fn conjugation_exact(&mut self, k: &Index) -> BigComplex {
        let wp = self.wp;
        let base = self.a_pm(k, true).conj();
        if self.n % 2 == 1 || k.is_empty() {
            return base;
        }
        let tail = Index::from_parts(&k.parts()[1..]);
        let extra = self
            .minus_pi_i_over_n_pow(k.parts()[0])
            .mul(&self.a_pm(&tail, false), wp);
        round(&base.add(&extra, wp), self.prec)
    }
}

fn round(v: &BigComplex, p: usize) -> BigComplex {
    BigComplex::new(
        v.re.clone().add(&BigFloat::from_u64(0, p), p, RM),
        v.im.clone().add(&BigFloat::from_u64(0, p), p, RM),
    )
}

/// `z_n(k; e^{2πi/n})` (or `z★`) at `precision` bits.
pub fn z_numeric(k: &Index, n: u32, precision: usize, star: bool) -> Result<BigComplex> {
    Ok(NumericLevel::new(n, precision)?.z(k, star))
}

/// `A_n^±(k)` at `precision` bits.
pub fn a_pm(k: &Index, n: u32, precision: usize, plus: bool) -> Result<BigComplex> {
    Ok(NumericLevel::new(n, precision)?.a_pm(k, plus))
}

/// `|z_n(k) - decomposition(k)|`
pub fn decomposition_residual(k: &Index, n: u32, precision: usize) -> Result<f64> {
    let mut lv = NumericLevel::new(n, precision)?;
    let z = lv.z(k, false);
    let d = lv.decomposition(k);
    Ok(z.dist(&d, precision))
}

/// `|A^-(k) - conjugation RHS|`, for the displayed and the exact form.
pub fn conjugation_residuals(k: &Index, n: u32, precision: usize) -> Result<(f64, f64)> {
    let mut lv = NumericLevel::new(n, precision)?;
    let a = lv.a_pm(k, false);
    let displayed = lv.conjugation_displayed(k);
    let exact = lv.conjugation_exact(k);
    Ok((a.dist(&displayed, precision), a.dist(&exact, precision)))
}

/// `|z_n(reverse k) - (-e^{2πi/n})^{wt} conj z_n(k)|`
pub fn reversal_residual(k: &Index, n: u32, precision: usize, star: bool) -> Result<f64> {
    let mut lv = NumericLevel::new(n, precision)?;
    let wp = lv.wp;
    let lhs = lv.z(&k.reverse(), star);
    let minus_q = lv.root(2).neg();
    let rhs = minus_q.powi(k.weight(), wp).mul(&lv.z(k, star).conj(), wp);
    Ok(lhs.dist(&rhs, precision))
}

/// Parses `"start:factor:count"` into a geometric schedule.
pub fn geometric_schedule(spec: &str) -> Result<Vec<u32>> {
    let bad = || Error::Parse(format!("invalid schedule `{spec}` (expected start:factor:count)"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: u64 = parts[0].trim().parse().map_err(|_| bad())?;
    let factor: u64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if start == 0 || factor < 2 {
        return Err(bad());
    }
    let mut out = Vec::with_capacity(count);
    let mut n = start;
    for _ in 0..count {
        if n > u32::MAX as u64 {
            return Err(bad());
        }
        out.push(n as u32);
        n *= factor;
    }
    Ok(out)
}

/// Default schedule `1000, 2000, …, 64000`.
pub fn default_schedule() -> Vec<u32> {
    geometric_schedule("1000:2:7").expect("valid literal")
}

/// A limit estimate with its error bar.
#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    #[serde(serialize_with = "ser_c64")]
    pub value: Complex64,
    pub error_bar: f64,
    pub converged: bool,
    /// Power of `log n` in the correction model that was selected.
    pub log_power: usize,
    pub schedule: Vec<u32>,
    #[serde(serialize_with = "ser_c64_vec")]
    pub samples: Vec<Complex64>,
}

fn ser_c64<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("complex", 2)?;
    st.serialize_field("re", &format!("{:.15e}", c.re))?;
    st.serialize_field("im", &format!("{:.15e}", c.im))?;
    st.end()
}

fn ser_c64_vec<S: serde::Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&[format!("{:.15e}", c.re), format!("{:.15e}", c.im)])?;
    }
    seq.end()
}

/// Basis `1, 1/n, log n/n, …, (log n)^J/n, 1/n²` evaluated at `n`.
fn basis(n: f64, j: usize) -> Vec<f64> {
    let l = n.ln();
    let mut b = vec![1.0];
    for i in 0..=j {
        b.push(l.powi(i as i32) / n);
    }
    b.push(1.0 / (n * n));
    b
}

/// Solves the square system `M c = y` (real `M`, complex `y`) by Gaussian
/// elimination with partial pivoting and returns `c_0`.
fn solve_constant(m: Vec<Vec<f64>>, y: Vec<Complex64>) -> Option<Complex64> {
    let n = y.len();
    let mut a: Vec<Vec<Complex64>> = m
        .into_iter()
        .zip(y)
        .map(|(row, yi)| {
            let mut r: Vec<Complex64> = row.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            r.push(yi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col].norm().partial_cmp(&a[j][col].norm()).expect("finite")
        })?;
        if a[piv][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
            }
        }
    }
    Some(a[0][n] / a[0][0])
}

/// Fits `basis(n, j)` through the `len` samples ending at position `end`
/// (exclusive) and returns the constant term.
fn fit_window(ns: &[f64], zs: &[Complex64], end: usize, j: usize) -> Option<Complex64> {
    let len = j + 3;
    if end < len {
        return None;
    }
    // Rescale columns so the system is well conditioned.
    let rows: Vec<Vec<f64>> = (end - len..end).map(|i| basis(ns[i], j)).collect();
    let scale: Vec<f64> = (0..len)
        .map(|c| rows.iter().map(|r| r[c].abs()).fold(0.0, f64::max).max(1e-300))
        .collect();
    let m = rows
        .into_iter()
        .map(|r| r.iter().zip(&scale).map(|(x, s)| x / s).collect())
        .collect();
    let y = zs[end - len..end].to_vec();
    solve_constant(m, y).map(|c| c / scale[0])
}

/// Extrapolates `n → ∞` from samples `z(n_i)` with the model
/// `c + Σ_{i≤J} c_i (log n)^i/n + d/n²`. For each `J` the error bar is the
/// change in the estimate when the fitting window moves back by one sample;
/// the `J` with the smallest bar is reported. The estimate is flagged as not
/// converged when that bar exceeds the previous window's bar, or when the
/// schedule is too short to compare the two.
pub fn extrapolate(schedule: &[u32], samples: &[Complex64]) -> Result<LimitEstimate> {
    if schedule.len() < 3 || schedule.len() != samples.len() {
        return Err(Error::InvalidArgument(
            "schedule needs at least three points".into(),
        ));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("schedule must be increasing".into()));
    }
    let ns: Vec<f64> = schedule.iter().map(|&n| n as f64).collect();
    let len = ns.len();
    let mut best: Option<(f64, Complex64, usize, bool)> = None;
    for j in 0..=3usize {
        let (Some(last), Some(prev)) = (
            fit_window(&ns, samples, len, j),
            fit_window(&ns, samples, len - 1, j),
        ) else {
            continue;
        };
        let bar = (last - prev).norm();
        let older = fit_window(&ns, samples, len - 2, j).map(|p2| (prev - p2).norm());
        let shrinking = older.map_or(false, |o| bar <= o);
        if best.as_ref().map_or(true, |b| bar < b.0) {
            best = Some((bar, last, j, shrinking));
        }
    }
    let (bar, value, log_power, shrinking) = match best {
        Some(b) => b,
        None => {
            // Too few points for any model: fall back to the last two samples.
            let d = (samples[len - 1] - samples[len - 2]).norm();
            (d, samples[len - 1], 0, false)
        }
    };
    Ok(LimitEstimate {
        value,
        error_bar: bar,
        converged: shrinking && bar.is_finite(),
        log_power,
        schedule: schedule.to_vec(),
        samples: samples.to_vec(),
    })
}

/// Samples `z_n(k)` (or `z★`) along a schedule, levels in parallel.
pub fn sample_schedule(
    indices: &[Index],
    schedule: &[u32],
    precision: usize,
    star: bool,
) -> Result<Vec<Vec<Complex64>>> {
    let per_level: Vec<Vec<Complex64>> = schedule
        .par_iter()
        .map(|&n| -> Result<Vec<Complex64>> {
            let mut lv = NumericLevel::new(n, precision)?;
            Ok(indices.iter().map(|k| lv.z(k, star).to_c64()).collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..indices.len())
        .map(|i| per_level.iter().map(|row| row[i]).collect())
        .collect())
}

/// Approximates `ξ(k) = lim z_n(k; e^{2πi/n})` (or `ξ★`).
pub fn xi_approx(k: &Index, schedule: &[u32], precision: usize, star: bool) -> Result<LimitEstimate> {
    let samples = sample_schedule(std::slice::from_ref(k), schedule, precision, star)?;
    extrapolate(schedule, &samples[0])
}

/// `ξ★(k)` assembled from plain limits: the sum of `ξ(k')` over all `k'`
/// obtained by replacing each comma of `k` with a comma or a plus.
pub fn xi_star_from_plain(k: &Index, schedule: &[u32], precision: usize) -> Result<LimitEstimate> {
    let terms: Vec<(Index, f64)> = star_to_mono(k)
        .terms()
        .filter(|(_, h, _)| *h == 0)
        .map(|(i, _, c)| (i.clone(), num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN)))
        .collect();
    let idx: Vec<Index> = terms.iter().map(|(i, _)| i.clone()).collect();
    let samples = sample_schedule(&idx, schedule, precision, false)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut bar = 0.0;
    let mut converged = true;
    let mut combined = vec![Complex64::new(0.0, 0.0); schedule.len()];
    for ((_, c), s) in terms.iter().zip(&samples) {
        let est = extrapolate(schedule, s)?;
        value += est.value * *c;
        bar += est.error_bar * c.abs();
        converged &= est.converged;
        for (acc, z) in combined.iter_mut().zip(s) {
            *acc += z * *c;
        }
    }
    Ok(LimitEstimate {
        value,
        error_bar: bar,
        converged,
        log_power: 0,
        schedule: schedule.to_vec(),
        samples: combined,
    })
}

/// Residual `|ξ★(k^∨) + conj ξ★(k)|` with both limits extrapolated, together
/// with the sum of their error bars.
pub fn xi_duality_check(k: &Index, schedule: &[u32], precision: usize) -> Result<(f64, f64)> {
    let dual = k.hoffman_dual()?;
    let samples = sample_schedule(&[k.clone(), dual], schedule, precision, true)?;
    let a = extrapolate(schedule, &samples[0])?;
    let b = extrapolate(schedule, &samples[1])?;
    Ok(((b.value + a.value.conj()).norm(), a.error_bar + b.error_bar))
}

/// `f64` view of a big-float real part, for diagnostics.
pub fn to_f64(x: &BigFloat) -> f64 {
    bigfloat_to_f64(x)
}
