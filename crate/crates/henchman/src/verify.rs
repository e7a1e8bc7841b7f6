use henchman_core::cipher::{CipherCode, Codebook, DEFAULT_TABLE_LIMIT};
use henchman_core::rd::BaOptions;
use henchman_core::rng::{stream, Purpose};
use henchman_core::subproblem::{binomial_tail, chernoff_binary, chernoff_bounded, type_bound_check};
use henchman_core::{Distribution, Error, Sequence};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::VerifyConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, fmt9, round9, write_csv, write_json};
use crate::subproblem::{decay, params};
use crate::{Format, Report, RunContext};

/// Rate offset above the source entropy used by the soft-covering suite.
const COVERING_MARGIN: f64 = 0.25;
const COVERING_KEY_RATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The suite declined to run on these parameters.
    Refused,
}

impl Status {
    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Refused => "refused: regime",
        }
    }
}

/// One row of the verification table. `slack` is `bound - measured`, so a
/// dominating bound has nonnegative slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub case: String,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub status: Status,
    /// Hard checks fail the run; soft ones only report.
    pub hard: bool,
}

impl CheckRow {
    fn new(suite: &'static str, case: String, measured: f64, bound: f64, ok: bool, hard: bool) -> Self {
        Self {
            suite,
            case,
            measured: round9(measured),
            bound: round9(bound),
            slack: round9(bound - measured),
            status: Status::of(ok),
            hard,
        }
    }
}

/// A sequence whose running type tracks `p` as closely as possible.
fn typed_sequence(p: &Distribution, n: usize) -> Sequence {
    let mut counts = vec![0usize; p.alphabet_size()];
    let symbols = (0..n)
        .map(|i| {
            let target = (i + 1) as f64;
            let s = (0..counts.len())
                .max_by(|&a, &b| {
                    let ga = target * p.get(a) - counts[a] as f64;
                    let gb = target * p.get(b) - counts[b] as f64;
                    ga.partial_cmp(&gb).expect("finite").then(b.cmp(&a))
                })
                .expect("nonempty alphabet");
            counts[s] += 1;
            s as u8
        })
        .collect();
    Sequence::from_symbols(symbols)
}

/// `P[d(X^n, z^n) <= D, typical]` against the type-counting bound, in log2,
/// with `z^n` of the source's type.
fn exponential_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRow>, CliError> {
    let src = cfg.source.build("source")?;
    let d = cfg.d.build(src.alphabet_size(), "d")?;
    if d.cols() != src.alphabet_size() {
        return Err(CliError::Config("verify needs a square distortion matrix".into()));
    }
    let ba = BaOptions::default();
    let cases: Vec<(f64, usize)> = cfg
        .levels
        .iter()
        .flat_map(|&l| cfg.n_grid.iter().map(move |&n| (l, n)))
        .collect();
    cases
        .par_iter()
        .map(|&(level, n)| {
            let z = typed_sequence(&src, n);
            let c = type_bound_check(&src, &d, level, cfg.delta, &z, &ba)?;
            let measured = if c.check.probability > 0.0 {
                c.check.probability.log2()
            } else {
                f64::NEG_INFINITY
            };
            Ok(CheckRow::new(
                "exponential_bound",
                format!("level={} n={n} log2", fmt9(level)),
                measured,
                c.log2_type_bound,
                c.dominated,
                true,
            ))
        })
        .collect()
}

/// Binary Chernoff against the exact tail, and the bounded-variable form
/// against Monte Carlo with a three-sigma allowance.
fn chernoff_suite(cfg: &VerifyConfig, seed: u64) -> Vec<CheckRow> {
    let mut rng = stream(Purpose::Trial, seed, 0);
    let mut rows = Vec::with_capacity(cfg.chernoff_points + cfg.bounded_points);
    for _ in 0..cfg.chernoff_points {
        let m = rng.gen_range(1..=30u64);
        let p: f64 = rng.gen_range(0.0..1.0);
        let k: f64 = rng.gen_range(0.01..=m as f64);
        let exact = binomial_tail(m, p, k);
        let bound = chernoff_binary(m as f64, p, k);
        rows.push(CheckRow::new(
            "chernoff_binary",
            format!("m={m} p={} k={}", fmt9(p), fmt9(k)),
            exact,
            bound,
            bound >= exact - 1e-12,
            true,
        ));
    }
    // Draws are scaled powers of a uniform: values in [0, a] with mean a/(s+1).
    let bounded: Vec<(f64, f64, usize, f64, u64)> = (0..cfg.bounded_points)
        .map(|i| {
            let a: f64 = rng.gen_range(0.5..3.0);
            let s: f64 = rng.gen_range(0.5..4.0);
            let m = rng.gen_range(2..=20usize);
            let t: f64 = rng.gen_range(0.3..1.5);
            (a, s, m, t, i as u64)
        })
        .collect();
    let samples = cfg.mc_samples.max(1);
    rows.par_extend(bounded.par_iter().map(|&(a, s, m, t, i)| {
        let mut r = stream(Purpose::Trial, seed, i + 1);
        let mean = a / (s + 1.0);
        let k = m as f64 * mean + t * a * (m as f64).sqrt();
        let mut hits = 0usize;
        for _ in 0..samples {
            let sum: f64 = (0..m).map(|_| a * r.gen::<f64>().powf(s)).sum();
            hits += (sum >= k) as usize;
        }
        let est = hits as f64 / samples as f64;
        let sigma = (est * (1.0 - est) / samples as f64).sqrt();
        let bound = chernoff_bounded(m as f64, mean, k, a);
        CheckRow::new(
            "chernoff_bounded",
            format!("m={m} a={} mean={} k={}", fmt9(a), fmt9(mean), fmt9(k)),
            est,
            bound,
            bound >= est - 3.0 * sigma,
            true,
        )
    }));
    rows
}

fn mean_tv(src: &Distribution, n: usize, rate: f64, seeds: &[u64]) -> Result<f64, CliError> {
    let tvs = seeds
        .par_iter()
        .map(|&s| {
            let code = CipherCode::lossless(Codebook::build(s, n, rate, COVERING_KEY_RATE, src)?);
            let p = code.induced_joint(src, DEFAULT_TABLE_LIMIT)?;
            let q = code.ideal_joint(DEFAULT_TABLE_LIMIT)?;
            p.tv(&q)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    Ok(tvs.iter().sum::<f64>() / tvs.len() as f64)
}

/// Mean TV between the induced and ideal joints above the entropy; each
/// blocklength should improve on the previous one.
fn covering_suite(cfg: &VerifyConfig, seeds: &[u64]) -> Result<Vec<CheckRow>, CliError> {
    let src = cfg.source.build("source")?;
    let rate = src.entropy() + COVERING_MARGIN;
    let mut ns = cfg.n_grid.clone();
    ns.sort_unstable();
    let mut rows = Vec::new();
    let mut prev: Option<f64> = None;
    for n in ns {
        let tv = mean_tv(&src, n, rate, seeds)?;
        let bound = prev.unwrap_or(1.0);
        rows.push(CheckRow::new(
            "soft_covering",
            format!("n={n} rate={}", fmt9(rate)),
            tv,
            bound,
            tv < bound,
            false,
        ));
        prev = Some(tv);
    }
    Ok(rows)
}

/// Mean best-code success upper bound per blocklength against `tau_n`.
fn decay_suite(cfg: &VerifyConfig, base_seed: u64) -> Result<Vec<CheckRow>, CliError> {
    let Some(dc) = &cfg.decay else {
        return Ok(Vec::new());
    };
    let p = params(dc, base_seed)?;
    let rows = match decay(&p) {
        Ok((_, rows)) => rows,
        Err(Error::RegimeViolation(msg)) => {
            return Ok(vec![CheckRow {
                suite: "decay",
                case: msg,
                measured: f64::NAN,
                bound: f64::NAN,
                slack: f64::NAN,
                status: Status::Refused,
                hard: false,
            }]);
        }
        Err(e) => return Err(e.into()),
    };
    Ok(p.n_grid
        .iter()
        .map(|&n| {
            let sel: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.upper).collect();
            let mean = sel.iter().sum::<f64>() / sel.len().max(1) as f64;
            let tau = p.tau.at(n);
            CheckRow::new("decay", format!("n={n} mean_upper"), mean, tau, mean <= tau, false)
        })
        .collect())
}

pub fn checks(cfg: &VerifyConfig, base_seed: u64) -> Result<Vec<CheckRow>, CliError> {
    let seeds = cfg.seeds.seeds(base_seed);
    if seeds.is_empty() {
        return Err(CliError::Config("no seeds".into()));
    }
    if cfg.n_grid.is_empty() || cfg.levels.is_empty() {
        return Err(CliError::Config("levels and n_grid must be nonempty".into()));
    }
    let mut rows = exponential_suite(cfg)?;
    rows.extend(chernoff_suite(cfg, base_seed));
    rows.extend(covering_suite(cfg, &seeds)?);
    rows.extend(decay_suite(cfg, base_seed)?);
    Ok(rows)
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        fmt9(v)
    }
}

pub fn run(cfg: &VerifyConfig, ctx: &RunContext) -> Result<Report, CliError> {
    if ctx.format == Format::Svg {
        return Err(CliError::Config("verify writes csv or json".into()));
    }
    let rows = checks(cfg, ctx.seed)?;
    ensure_dir(&ctx.out_dir)?;
    let mut report = Report::default();
    match ctx.format {
        Format::Csv | Format::Svg => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.suite.to_string(),
                        r.case.clone(),
                        num(r.measured),
                        num(r.bound),
                        num(r.slack),
                        r.status.label().to_string(),
                        r.hard.to_string(),
                    ]
                })
                .collect();
            report.files.push(write_csv(
                &ctx.out_dir.join("verify.csv"),
                &["suite", "case", "measured", "bound", "slack", "status", "hard"],
                &table,
            )?);
        }
        Format::Json => {
            report.files.push(write_json(&ctx.out_dir.join("verify.json"), &rows)?);
        }
    }
    let mut suites: Vec<&'static str> = rows.iter().map(|r| r.suite).collect();
    suites.dedup();
    for s in suites {
        let sel: Vec<&CheckRow> = rows.iter().filter(|r| r.suite == s).collect();
        if let Some(r) = sel.iter().find(|r| r.status == Status::Refused) {
            report.lines.push(format!("{s}: {} ({})", r.status.label(), r.case));
            continue;
        }
        let passed = sel.iter().filter(|r| r.status == Status::Pass).count();
        let kind = if sel[0].hard { "hard" } else { "soft" };
        report.lines.push(format!("{s}: {passed}/{} pass ({kind})", sel.len()));
    }
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| r.hard && r.status == Status::Fail).collect();
    if let Some(first) = failed.first() {
        return Err(CliError::Invariant(format!(
            "{} hard check(s) failed, first: {} {}",
            failed.len(),
            first.suite,
            first.case
        )));
    }
    Ok(report)
}
