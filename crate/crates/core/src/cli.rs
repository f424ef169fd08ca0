//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code:
//! 0 success, 1 relation failed, 2 usage or parse error, 3 non-convergence.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::arith::{format_rational, is_prime, primes_in};
use crate::error::{Error, Result};
use crate::finite::{
    duality_family, hoffman_41, reversal_family, star_5, star_5_exact, verify_relation, Mode,
    RelationReport, Ring,
};
use crate::hoffman::{HPoly, Index};
use crate::numeric::{default_schedule, geometric_schedule, xi_approx, LimitEstimate, NumericLevel};
use crate::qseries::ZEvaluator;
use crate::relations::{dimension_row, observed_dimension, DimensionRow, DIMENSION_TABLE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RELATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Largest weight allowed by `dimtable` without `--extended`.
pub const DEFAULT_KMAX_CEILING: u32 = 10;

#[derive(Parser, Debug)]
#[command(name = "cycmzv", version, about = "Multiple harmonic q-series at roots of unity")]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "CYCMZV_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate z_n(k; ζ_n) exactly or numerically
    Eval(EvalArgs),
    /// Check a relation at a range of primes (or levels)
    Verify(VerifyArgs),
    /// Dimension upper bounds and observed dimensions by weight
    Dimtable(DimtableArgs),
    /// Estimate the limit n → ∞ of z_n(k; e^{2πi/n})
    Limit(LimitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Index as `k1,k2,...` (empty string for the empty index)
    pub index: String,
    #[arg(long)]
    pub n: u32,
    /// Weak inequalities (z★)
    #[arg(long)]
    pub star: bool,
    #[arg(long, conflicts_with = "numeric")]
    pub exact: bool,
    #[arg(long)]
    pub numeric: bool,
    /// Working precision in bits for `--numeric`
    #[arg(long, default_value_t = 128)]
    pub precision: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Builtin (`duality`, `reversal`, `hoffman-4-1`, `star-5`) or a JSON file
    pub relation: String,
    /// Inclusive prime range `lo..hi`, or a comma list
    #[arg(long, default_value = "7..100")]
    pub primes: String,
    /// Exact check over levels `lo..hi` instead of primes (`star-5` only)
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, default_value = "Acyc")]
    pub ring: Ring,
    #[arg(long)]
    pub star: bool,
    /// Weight for the `duality` and `reversal` families
    #[arg(long, default_value_t = 5)]
    pub weight: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DimMode {
    Bounds,
    Observed,
    Both,
}

#[derive(Args, Debug)]
pub struct DimtableArgs {
    #[arg(long, default_value_t = 8)]
    pub kmax: u32,
    /// Primes for observed dimensions: `lo..hi` or a comma list
    #[arg(long, default_value = "11..61")]
    pub primes: String,
    #[arg(long, value_enum, default_value_t = DimMode::Bounds)]
    pub mode: DimMode,
    /// Allow weights above 10
    #[arg(long)]
    pub extended: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct LimitArgs {
    pub index: String,
    /// `start:factor:count` or a comma list of levels
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long, default_value_t = 128)]
    pub precision: usize,
    #[arg(long)]
    pub star: bool,
    /// Largest error bar accepted as converged
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Runs the CLI on `args` (including the program name), writing results to
/// `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Dimtable(a) => cmd_dimtable(a, out, err),
        Command::Limit(a) => cmd_limit(a, out),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Parse(_)
                | Error::InvalidArgument(_)
                | Error::NotPrime(_)
                | Error::EmptyIndex
                | Error::HbarPresent
                | Error::PrecisionTooLow(_)
                | Error::InvalidExponent { .. } => EXIT_USAGE,
                _ => EXIT_RELATION_FAILED,
            }
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("output error: {e}"))
}

fn emit_json(out: &mut (dyn Write + Send), v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable")).map_err(io)
}

/// Parses `lo..hi` (inclusive), `lo..=hi`, a single number or a comma list.
pub fn parse_range(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Parse(format!("invalid range `{s}`"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

/// Primes in a range spec; explicit lists must consist of primes.
pub fn parse_primes(s: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let bad = || Error::Parse(format!("invalid prime range `{s}`"));
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        return Ok(primes_in(lo, hi));
    }
    let v = parse_range(s)?;
    match v.iter().find(|&&p| !is_prime(p)) {
        Some(&p) => Err(Error::NotPrime(p)),
        None => Ok(v),
    }
}

fn cmd_eval(a: &EvalArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let k = Index::parse(&a.index)?;
    if a.n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    if a.numeric {
        let mut lv = NumericLevel::new(a.n, a.precision)?;
        let v = lv.z(&k, a.star);
        let digits = ((a.precision as f64) * std::f64::consts::LOG10_2) as usize;
        let digits = digits.saturating_sub(4).max(1);
        let (re, im) = v.format_fixed(digits);
        match a.format {
            Format::Json => emit_json(
                out,
                &json!({
                    "index": k.to_string(), "n": a.n, "star": a.star, "mode": "numeric",
                    "precision": a.precision, "value": {"re": re, "im": im},
                }),
            )?,
            Format::Csv => writeln!(out, "re,im\n{re},{im}").map_err(io)?,
            Format::Text => writeln!(out, "{}", complex_text(&re, &im)).map_err(io)?,
        }
        return Ok(EXIT_OK);
    }
    let mut ev = ZEvaluator::new(a.n);
    let v = if a.star { ev.z_star(&k) } else { ev.z(&k) };
    match a.format {
        Format::Json => emit_json(
            out,
            &json!({
                "index": k.to_string(), "n": a.n, "star": a.star, "mode": "exact",
                "value": v.to_json_value(),
            }),
        )?,
        Format::Csv => {
            writeln!(out, "power,coeff").map_err(io)?;
            for (j, c) in v.coeffs().iter().enumerate() {
                writeln!(out, "{j},{}", format_rational(c)).map_err(io)?;
            }
        }
        Format::Text => writeln!(out, "{v}").map_err(io)?,
    }
    Ok(EXIT_OK)
}

fn builtin(name: &str, weight: u32) -> Option<Vec<HPoly>> {
    match name {
        "duality" => Some(duality_family(weight)),
        "reversal" => Some(reversal_family(weight)),
        "hoffman-4-1" => Some(vec![hoffman_41()]),
        "star-5" => Some(vec![star_5()]),
        _ => None,
    }
}

fn cmd_verify(a: &VerifyArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    if let Some(levels) = &a.n {
        if a.relation != "star-5" {
            return Err(Error::InvalidArgument(
                "--n is only supported for the star-5 builtin".into(),
            ));
        }
        let levels = parse_range(levels)?;
        if levels.contains(&0) || levels.iter().any(|&n| n > u32::MAX as u64) {
            return Err(Error::InvalidArgument("levels must be positive".into()));
        }
        let failing: Vec<u64> = {
            use rayon::prelude::*;
            levels
                .par_iter()
                .filter(|&&n| !star_5_exact(n as u32))
                .copied()
                .collect()
        };
        match a.format {
            Format::Json => emit_json(
                out,
                &json!({"relation": "star-5", "levels": levels, "failing": failing, "holds": failing.is_empty()}),
            )?,
            Format::Csv => {
                writeln!(out, "n,holds").map_err(io)?;
                for n in &levels {
                    writeln!(out, "{n},{}", !failing.contains(n)).map_err(io)?;
                }
            }
            Format::Text => writeln!(
                out,
                "star-5: {} levels checked, {} failing{}",
                levels.len(),
                failing.len(),
                if failing.is_empty() { String::new() } else { format!(" {failing:?}") }
            )
            .map_err(io)?,
        }
        return Ok(if failing.is_empty() { EXIT_OK } else { EXIT_RELATION_FAILED });
    }
    let primes = parse_primes(&a.primes)?;
    if primes.is_empty() {
        return Err(Error::InvalidArgument("no primes in range".into()));
    }
    let (combos, mode) = match builtin(&a.relation, a.weight) {
        // star-5 is a star identity; its mode is fixed
        Some(c) if a.relation == "star-5" => (c, Mode::Star),
        Some(c) => (c, if a.star { Mode::Star } else { Mode::Plain }),
        None => {
            let text = std::fs::read_to_string(&a.relation).map_err(|e| {
                Error::Parse(format!("`{}` is not a builtin and could not be read: {e}", a.relation))
            })?;
            (vec![HPoly::from_json_str(&text)?], if a.star { Mode::Star } else { Mode::Plain })
        }
    };
    let reports: Vec<(HPoly, RelationReport)> = combos
        .into_iter()
        .map(|c| verify_relation(&c, a.ring, &primes, mode).map(|r| (c, r)))
        .collect::<Result<_>>()?;
    let holds = reports.iter().all(|(_, r)| r.holds());
    match a.format {
        Format::Json => {
            let items: Vec<Value> = reports
                .iter()
                .map(|(c, r)| json!({"combo": c.to_string(), "holds": r.holds(), "report": r.to_json_value()}))
                .collect();
            emit_json(out, &json!({"relation": a.relation, "holds": holds, "results": items}))?;
        }
        Format::Csv => {
            writeln!(out, "combo,zero_primes,failing_primes,excluded_primes").map_err(io)?;
            for (c, r) in &reports {
                let fail = r.failing_primes();
                let excl = r.excluded_primes();
                let zero = r.primes.len() - fail.len() - excl.len();
                writeln!(out, "\"{c}\",{zero},{},{}", join(&fail), join(&excl)).map_err(io)?;
            }
        }
        Format::Text => {
            for (c, r) in &reports {
                let fail = r.failing_primes();
                let excl = r.excluded_primes();
                write!(out, "{c}: ").map_err(io)?;
                if fail.is_empty() {
                    write!(out, "zero at {} primes", r.primes.len() - excl.len()).map_err(io)?;
                } else {
                    write!(out, "NONZERO at {}", join(&fail)).map_err(io)?;
                }
                if !excl.is_empty() {
                    write!(out, " (excluded {})", join(&excl)).map_err(io)?;
                }
                writeln!(out).map_err(io)?;
            }
            writeln!(out, "{}", if holds { "verified" } else { "FAILED" }).map_err(io)?;
        }
    }
    if !holds {
        let _ = writeln!(err, "relation does not vanish at every prime");
    }
    Ok(if holds { EXIT_OK } else { EXIT_RELATION_FAILED })
}

fn complex_text(re: &str, im: &str) -> String {
    match im.strip_prefix('-') {
        Some(m) => format!("{re} - {m}i"),
        None => format!("{re} + {im}i"),
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_dimtable(a: &DimtableArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    if a.kmax > DEFAULT_KMAX_CEILING && !a.extended {
        return Err(Error::InvalidArgument(format!(
            "--kmax above {DEFAULT_KMAX_CEILING} needs --extended"
        )));
    }
    let want_bounds = a.mode != DimMode::Observed;
    let want_observed = a.mode != DimMode::Bounds;
    let primes = if want_observed { parse_primes(&a.primes)? } else { Vec::new() };
    let mut rows: Vec<(u32, Option<DimensionRow>, Vec<usize>)> = Vec::new();
    let mut mismatch = false;
    for k in 0..=a.kmax {
        let bound = if want_bounds { Some(dimension_row(k)?) } else { None };
        if let (Some(b), Some(&r)) = (&bound, DIMENSION_TABLE.get(k as usize)) {
            if b.upper_bound != r {
                mismatch = true;
                let _ = writeln!(err, "warning: k={k} bound {} differs from reference {r}", b.upper_bound);
            }
        }
        let observed = primes
            .iter()
            .map(|&p| observed_dimension(k, p as u32))
            .collect::<Result<Vec<_>>>()?;
        rows.push((k, bound, observed));
    }
    let num_indices = |k: u32| if k == 0 { 1usize } else { 1usize << (k - 1) };
    match a.format {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(k, b, obs)| {
                    let mut v = json!({"k": k, "num_indices": num_indices(*k)});
                    if let Some(b) = b {
                        v["relation_rank"] = json!(b.relation_rank);
                        v["upper_bound"] = json!(b.upper_bound);
                    }
                    if want_observed {
                        let m: serde_json::Map<String, Value> = primes
                            .iter()
                            .zip(obs)
                            .map(|(p, d)| (p.to_string(), json!(d)))
                            .collect();
                        v["observed"] = Value::Object(m);
                    }
                    v
                })
                .collect();
            emit_json(out, &Value::Array(items))?;
        }
        Format::Csv | Format::Text => {
            let sep = if a.format == Format::Csv { "," } else { "\t" };
            let mut header = vec!["k".to_string(), "num_indices".to_string()];
            if want_bounds {
                header.push("relation_rank".into());
                header.push("upper_bound".into());
            }
            header.extend(primes.iter().map(|p| format!("p{p}")));
            writeln!(out, "{}", header.join(sep)).map_err(io)?;
            for (k, b, obs) in &rows {
                let mut cells = vec![k.to_string(), num_indices(*k).to_string()];
                if let Some(b) = b {
                    cells.push(b.relation_rank.to_string());
                    cells.push(b.upper_bound.to_string());
                }
                cells.extend(obs.iter().map(usize::to_string));
                writeln!(out, "{}", cells.join(sep)).map_err(io)?;
            }
        }
    }
    Ok(if mismatch { EXIT_RELATION_FAILED } else { EXIT_OK })
}

/// `start:factor:count` or a comma-separated list of levels.
pub fn parse_schedule(s: &str) -> Result<Vec<u32>> {
    if s.contains(':') {
        return geometric_schedule(s);
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("invalid schedule `{s}`")))
        })
        .collect()
}

fn cmd_limit(a: &LimitArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let k = Index::parse(&a.index)?;
    let schedule = match &a.schedule {
        Some(s) => parse_schedule(s)?,
        None => default_schedule(),
    };
    let mut est: LimitEstimate = xi_approx(&k, &schedule, a.precision, a.star)?;
    est.converged &= est.error_bar <= a.tolerance;
    match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&est).expect("serializable");
            v["index"] = json!(k.to_string());
            v["star"] = json!(a.star);
            v["error_bar"] = json!(format!("{:.3e}", est.error_bar));
            emit_json(out, &v)?;
        }
        Format::Csv => {
            writeln!(out, "re,im,error_bar,converged,log_power").map_err(io)?;
            writeln!(
                out,
                "{:.12e},{:.12e},{:.3e},{},{}",
                est.value.re, est.value.im, est.error_bar, est.converged, est.log_power
            )
            .map_err(io)?;
        }
        Format::Text => {
            let (re, im) = (format!("{:.12}", est.value.re), format!("{:.12}", est.value.im));
            writeln!(out, "value      {}", complex_text(&re, &im)).map_err(io)?;
            writeln!(out, "error bar  {:.3e}", est.error_bar).map_err(io)?;
            writeln!(out, "model      (log n)^j/n, j <= {}", est.log_power).map_err(io)?;
            writeln!(out, "levels     {}", join(&est.schedule.iter().map(|&n| n as u64).collect::<Vec<_>>())).map_err(io)?;
            writeln!(out, "converged  {}", est.converged).map_err(io)?;
        }
    }
    Ok(if est.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}
