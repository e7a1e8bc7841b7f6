//! Lossy compression of a codeword drawn uniformly from a random codebook,
//! optionally observed through a noisy channel: best-code success, the
//! per-codeword statistics behind its analysis, and the concentration
//! bounds used to show it decays.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cipher::Codebook;
use crate::error::{Error, Result};
use crate::math::{abs, exp, exp2, index_count, ln, log2, powf, round, sqrt};
use crate::prob::{
    distortion_unchecked, tv_slices, Channel, Distribution, DistortionMatrix, JointDistribution, Sequence,
};
use crate::rd::{rate_distortion, rd_exponent, side_info_rate_distortion, BaOptions};
use crate::seq::{space_size, symbols_of};

/// Typicality radius used when none is given.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Largest denominator tried when putting distortions on a rational lattice.
pub const DEFAULT_LATTICE_DENOMINATOR: u32 = 1024;

/// One instance: compress `X^n(J)` (or its noisy observation) at rate `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemInstance {
    /// Codewords indexed by message; the key dimension must be 1.
    pub codebook: Codebook,
    pub rate: f64,
    pub level: f64,
    /// `P_{X|Y}` for the noisy variant, where the codebook holds `y^n(j)`
    /// and the source is `X^n ~ prod P_{X|Y}(.|y_i(J))`.
    pub noise: Option<Channel>,
    pub d: DistortionMatrix,
    pub delta: f64,
}

impl SubproblemInstance {
    pub fn new(codebook: Codebook, rate: f64, level: f64, d: DistortionMatrix) -> Result<Self> {
        let inst = Self {
            codebook,
            rate,
            level,
            noise: None,
            d,
            delta: DEFAULT_DELTA,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn noisy(codebook: Codebook, noise: Channel, rate: f64, level: f64, d: DistortionMatrix) -> Result<Self> {
        let inst = Self {
            codebook,
            rate,
            level,
            noise: Some(noise),
            d,
            delta: DEFAULT_DELTA,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.codebook.keys() != 1 {
            return Err(Error::InvalidParameter("subproblem codebooks carry a single key".into()));
        }
        if !(self.rate >= 0.0 && self.level >= 0.0 && self.delta > 0.0) {
            return Err(Error::InvalidParameter("rate and level must be >= 0, delta > 0".into()));
        }
        let source = match &self.noise {
            None => self.codebook.alphabet(),
            Some(ch) => {
                if ch.input_size() != self.codebook.alphabet() {
                    return Err(Error::AlphabetMismatch {
                        expected: self.codebook.alphabet(),
                        found: ch.input_size(),
                    });
                }
                ch.output_size()
            }
        };
        if self.d.rows() != source {
            return Err(Error::AlphabetMismatch {
                expected: source,
                found: self.d.rows(),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.codebook.n()
    }

    /// `ceil(2^{nR})`.
    pub fn list_size(&self) -> usize {
        index_count(self.n(), self.rate) as usize
    }

    /// `P_X`: the generator (clean) or its image through the noise.
    pub fn source_marginal(&self) -> Result<Distribution> {
        match &self.noise {
            None => Ok(self.codebook.generator().clone()),
            Some(ch) => ch.push(self.codebook.generator()),
        }
    }

    /// `P_XY` with `X` on rows (noisy variant only).
    pub fn joint(&self) -> Option<JointDistribution> {
        self.noise.as_ref().map(|ch| {
            JointDistribution::from_marginal_channel(self.codebook.generator(), ch)
                .expect("validated channel")
                .transpose()
        })
    }

    fn total_budget(&self) -> f64 {
        self.n() as f64 * self.level + 1e-9
    }

    fn is_typical(&self, x: &[u8]) -> bool {
        let p = self.codebook.generator();
        let mut t = vec![0.0; p.alphabet_size()];
        for &s in x {
            t[s as usize] += 1.0 / x.len() as f64;
        }
        tv_slices(&t, p.mass()) < self.delta
    }
}

/// Best-code success, exact or bracketed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

/// Limits for [`best_code_success`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessOptions {
    /// Largest number of candidate codebooks enumerated for an exact value.
    pub exhaustive_limit: f64,
    /// Largest source space enumerated in the noisy variant.
    pub source_limit: u64,
}

impl Default for SuccessOptions {
    fn default() -> Self {
        Self {
            exhaustive_limit: 1e6,
            source_limit: 1 << 16,
        }
    }
}

struct Coverage {
    /// Source sequences with positive mass.
    weights: Vec<f64>,
    /// Mass of each support point carried by typical outcomes.
    typical: Vec<f64>,
    /// `(z, support indices within the level)`, for every `z` covering
    /// at least one point.
    candidates: Vec<(Vec<u8>, Vec<u32>)>,
}

fn coverage(inst: &SubproblemInstance, opts: &SuccessOptions) -> Result<Coverage> {
    let n = inst.n();
    let jj = inst.codebook.messages() as f64;
    let mut support: BTreeMap<Vec<u8>, (f64, f64)> = BTreeMap::new();
    match &inst.noise {
        None => {
            for x in inst.codebook.entries() {
                let typ = if inst.is_typical(x) { 1.0 / jj } else { 0.0 };
                let e = support.entry(x.to_vec()).or_insert((0.0, 0.0));
                e.0 += 1.0 / jj;
                e.1 += typ;
            }
        }
        Some(ch) => {
            let a = ch.output_size();
            let xs = space_size(a, n, opts.source_limit)?;
            let pxy = inst.joint().expect("noisy");
            for xi in 0..xs {
                let x = symbols_of(xi, n, a);
                let mut total = 0.0;
                let mut typ = 0.0;
                for y in inst.codebook.entries() {
                    let p: f64 = x.iter().zip(y).map(|(&a, &b)| ch.prob(b as usize, a as usize)).product();
                    total += p / jj;
                    if p > 0.0 && jointly_typical(&x, y, &pxy, inst.delta) {
                        typ += p / jj;
                    }
                }
                if total > 0.0 {
                    support.insert(x, (total, typ));
                }
            }
        }
    }
    let mut weights = Vec::with_capacity(support.len());
    let mut typical = Vec::with_capacity(support.len());
    let mut cover: BTreeMap<Vec<u8>, Vec<u32>> = BTreeMap::new();
    let budget = inst.total_budget();
    let mut cur = vec![0u8; n];
    for (i, (x, (w, t))) in support.iter().enumerate() {
        weights.push(*w);
        typical.push(*t);
        ball(x, &inst.d, budget, 0, 0.0, &mut cur, &mut |z| {
            cover.entry(z.to_vec()).or_default().push(i as u32);
        });
    }
    Ok(Coverage {
        weights,
        typical,
        candidates: cover.into_iter().collect(),
    })
}

fn jointly_typical(x: &[u8], y: &[u8], pxy: &JointDistribution, delta: f64) -> bool {
    let cols = pxy.cols();
    let mut t = vec![0.0; pxy.rows() * cols];
    for (&a, &b) in x.iter().zip(y) {
        t[a as usize * cols + b as usize] += 1.0 / x.len() as f64;
    }
    tv_slices(&t, pxy.mass()) < delta
}

fn ball<F: FnMut(&[u8])>(x: &[u8], d: &DistortionMatrix, budget: f64, pos: usize, spent: f64, cur: &mut [u8], f: &mut F) {
    if pos == x.len() {
        f(cur);
        return;
    }
    for z in 0..d.cols() {
        let s = spent + d.get(x[pos] as usize, z);
        if s <= budget {
            cur[pos] = z as u8;
            ball(x, d, budget, pos + 1, s, cur, f);
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// `max` over reconstruction codebooks of size `ceil(2^{nR})` of
/// `P[min_z d(X^n(J), z) <= D]`.
///
/// Exact by enumeration when the number of candidate codebooks is within
/// `exhaustive_limit`; otherwise greedy max-coverage gives the lower end and
/// the union bound (sum of the largest per-`z` coverages, split on
/// typicality in the clean variant) the upper end.
pub fn best_code_success(inst: &SubproblemInstance, opts: &SuccessOptions) -> Result<SuccessEstimate> {
    let cov = coverage(inst, opts)?;
    let l = inst.list_size();
    let c = cov.candidates.len();
    let k = l.min(c);
    let mass = |set: &mut Vec<bool>, picks: &[usize]| -> f64 {
        set.iter_mut().for_each(|v| *v = false);
        let mut total = 0.0;
        for &p in picks {
            for &i in &cov.candidates[p].1 {
                if !set[i as usize] {
                    set[i as usize] = true;
                    total += cov.weights[i as usize];
                }
            }
        }
        total
    };
    let mut scratch = vec![false; cov.weights.len()];
    if c == 0 {
        return Ok(SuccessEstimate {
            lower: 0.0,
            upper: 0.0,
            exact: true,
        });
    }
    if binomial(c, k) <= opts.exhaustive_limit {
        let mut subset: Vec<usize> = (0..k).collect();
        let mut best = 0.0f64;
        loop {
            best = best.max(mass(&mut scratch, &subset));
            if !next_subset(&mut subset, c) {
                break;
            }
        }
        let best = best.min(1.0);
        return Ok(SuccessEstimate {
            lower: best,
            upper: best,
            exact: true,
        });
    }
    let lower = greedy_cover(&cov, l).min(1.0);
    let upper = union_upper(inst, &cov, l).max(lower);
    Ok(SuccessEstimate {
        lower,
        upper,
        exact: false,
    })
}

fn greedy_cover(cov: &Coverage, l: usize) -> f64 {
    let mut covered = vec![false; cov.weights.len()];
    let mut gains: Vec<f64> = cov
        .candidates
        .iter()
        .map(|(_, m)| m.iter().map(|&i| cov.weights[i as usize]).sum())
        .collect();
    let mut total = 0.0;
    for _ in 0..l {
        // Lazy greedy: stale gains only overestimate.
        let pick = loop {
            let best = (0..gains.len())
                .filter(|&i| gains[i] > 0.0)
                .max_by(|&a, &b| gains[a].partial_cmp(&gains[b]).unwrap().then(b.cmp(&a)));
            let Some(i) = best else { break None };
            let fresh: f64 = cov.candidates[i]
                .1
                .iter()
                .filter(|&&m| !covered[m as usize])
                .map(|&m| cov.weights[m as usize])
                .sum();
            if abs(fresh - gains[i]) <= 1e-15 {
                break Some(i);
            }
            gains[i] = fresh;
        };
        let Some(i) = pick else { break };
        for &m in &cov.candidates[i].1 {
            if !covered[m as usize] {
                covered[m as usize] = true;
                total += cov.weights[m as usize];
            }
        }
        gains[i] = 0.0;
    }
    total
}

fn top_sum(mut v: Vec<f64>, l: usize) -> f64 {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v.iter().take(l).sum()
}

fn union_upper(inst: &SubproblemInstance, cov: &Coverage, l: usize) -> f64 {
    let plain = top_sum(
        cov.candidates
            .iter()
            .map(|(_, m)| m.iter().map(|&i| cov.weights[i as usize]).sum())
            .collect(),
        l,
    );
    let mut best = plain;
    if inst.noise.is_none() {
        let atypical: f64 = cov.weights.iter().zip(&cov.typical).map(|(w, t)| w - t).sum();
        let split = atypical
            + top_sum(
                cov.candidates
                    .iter()
                    .map(|(_, m)| m.iter().map(|&i| cov.typical[i as usize]).sum())
                    .collect(),
                l,
            );
        best = best.min(split);
    }
    best.min(1.0)
}

fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if s[i] < n - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Distortion entries on the lattice `{k / den}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionLattice {
    pub den: u32,
    /// Entries in lattice units, row-major.
    pub units: Vec<u32>,
    pub cols: usize,
    /// Largest absolute rounding error (zero when exact).
    pub rounding: f64,
}

impl DistortionLattice {
    /// The smallest denominator up to `max_den` representing every entry
    /// exactly; otherwise `max_den` with rounding.
    pub fn new(d: &DistortionMatrix, max_den: u32) -> Self {
        let fits = |den: u32| {
            d.entries()
                .iter()
                .all(|&e| abs(e * den as f64 - round(e * den as f64)) < 1e-9)
        };
        let den = (1..=max_den).find(|&q| fits(q)).unwrap_or(max_den);
        let units: Vec<u32> = d.entries().iter().map(|&e| round(e * den as f64) as u32).collect();
        let rounding = d
            .entries()
            .iter()
            .zip(&units)
            .map(|(&e, &u)| abs(e - u as f64 / den as f64))
            .fold(0.0, f64::max);
        Self {
            den,
            units,
            cols: d.cols(),
            rounding,
        }
    }

    pub fn get(&self, x: usize, z: usize) -> u32 {
        self.units[x * self.cols + z]
    }
}

/// `P[d(X^n, z^n) <= D, (X^n, y^n) typical | Y^n = y^n]` with
/// `X_i ~ P_{X|Y}(.|y_i)` independent, computed exactly by dynamic
/// programming over (accumulated distortion on the lattice, joint counts).
///
/// Typicality is `TV(T_{x^n y^n}, P_XY) < delta` with `P_XY` having `X` on
/// rows.
#[allow(clippy::too_many_arguments)]
pub fn conditional_success(
    y: &[u8],
    backward: &Channel,
    z: &[u8],
    d: &DistortionMatrix,
    level: f64,
    pxy: &JointDistribution,
    delta: f64,
    lattice: &DistortionLattice,
) -> Result<f64> {
    if y.len() != z.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: z.len(),
        });
    }
    let n = y.len();
    let (ax, ay) = (backward.output_size(), backward.input_size());
    if pxy.rows() != ax || pxy.cols() != ay || d.rows() != ax {
        return Err(Error::AlphabetMismatch {
            expected: ax,
            found: pxy.rows(),
        });
    }
    let limit = (n as f64 * level * lattice.den as f64 + 1e-6) as u32;
    let mut states: BTreeMap<(u32, Vec<u16>), f64> = BTreeMap::new();
    states.insert((0, vec![0; ax * ay]), 1.0);
    for i in 0..n {
        let b = y[i] as usize;
        let mut next: BTreeMap<(u32, Vec<u16>), f64> = BTreeMap::new();
        for ((lvl, counts), p) in states {
            for a in 0..ax {
                let pa = backward.prob(b, a);
                if pa == 0.0 {
                    continue;
                }
                let l2 = lvl + lattice.get(a, z[i] as usize);
                if l2 > limit {
                    continue;
                }
                let mut c2 = counts.clone();
                c2[a * ay + b] += 1;
                *next.entry((l2, c2)).or_insert(0.0) += p * pa;
            }
        }
        states = next;
    }
    let mut out = 0.0;
    for ((_, counts), p) in states {
        let t: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        if tv_slices(&t, pxy.mass()) < delta {
            out += p;
        }
    }
    Ok(out)
}

/// `sum_j xi_{j,z}` (clean) or `sum_j zeta_{j,z}` (noisy) for one `z^n`.
pub fn xi_sum(inst: &SubproblemInstance, z: &Sequence) -> Result<f64> {
    xi_sum_with(inst, z, DEFAULT_LATTICE_DENOMINATOR)
}

pub fn xi_sum_with(inst: &SubproblemInstance, z: &Sequence, max_den: u32) -> Result<f64> {
    if z.len() != inst.n() {
        return Err(Error::LengthMismatch {
            left: inst.n(),
            right: z.len(),
        });
    }
    if let Some(&s) = z.symbols().iter().find(|&&s| s as usize >= inst.d.cols()) {
        return Err(Error::SymbolOutOfRange {
            symbol: s as usize,
            alphabet: inst.d.cols(),
        });
    }
    match &inst.noise {
        None => Ok(inst
            .codebook
            .entries()
            .filter(|x| {
                distortion_unchecked(x, z.symbols(), &inst.d) <= inst.level + 1e-12 && inst.is_typical(x)
            })
            .count() as f64),
        Some(ch) => {
            let lattice = DistortionLattice::new(&inst.d, max_den);
            let pxy = inst.joint().expect("noisy");
            let mut total = 0.0;
            for y in inst.codebook.entries() {
                total += conditional_success(y, ch, z.symbols(), &inst.d, inst.level, &pxy, inst.delta, &lattice)?;
            }
            Ok(total)
        }
    }
}

/// `(e m p / k)^k`: bound on `P[sum of m i.i.d. Bern(p) >= k]`.
pub fn chernoff_binary(m: f64, p: f64, k: f64) -> f64 {
    powf(core::f64::consts::E * m * p / k, k)
}

/// `(e m p / k)^{k/a}` for i.i.d. variables on `[0, a]` with mean `p`.
pub fn chernoff_bounded(m: f64, p: f64, k: f64, a: f64) -> f64 {
    powf(core::f64::consts::E * m * p / k, k / a)
}

/// Exact `P[Bin(m, p) >= k]`, summed in log space.
pub fn binomial_tail(m: u64, p: f64, k: f64) -> f64 {
    let start = crate::math::ceil(k).max(0.0) as u64;
    if start == 0 {
        return 1.0;
    }
    if start > m {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let mut log_c = 0.0; // ln C(m, 0)
    let mut out = 0.0;
    for i in 0..=m {
        if i > 0 {
            log_c += ln((m - i + 1) as f64) - ln(i as f64);
        }
        if i >= start {
            out += exp(log_c + i as f64 * ln(p) + (m - i) as f64 * ln(1.0 - p));
        }
    }
    out.min(1.0)
}

/// Sub-exponential thresholds `tau_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauFamily {
    /// `scale * n^{-power}`.
    Polynomial { scale: f64, power: f64 },
    /// `scale * 2^{-sqrt(n)}`.
    SubExpRoot { scale: f64 },
}

impl TauFamily {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            TauFamily::Polynomial { scale, power } => scale * powf(n as f64, -power),
            TauFamily::SubExpRoot { scale } => scale * exp2(-sqrt(n as f64)),
        }
    }
}

/// Parameters of a decay experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayParams {
    /// Codeword distribution: `P_X` (clean) or `P_Y` (noisy).
    pub generator: Distribution,
    pub noise: Option<Channel>,
    pub d: DistortionMatrix,
    pub codebook_rate: f64,
    pub rate: f64,
    pub level: f64,
    pub n_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    pub tau: TauFamily,
    pub delta: f64,
    pub options: SuccessOptions,
    pub ba: BaOptions,
}

/// The rate values that decide whether decay is expected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    /// `R(D)` of the source `P_X`.
    pub rd: f64,
    /// `R_Y(D)` (noisy variant).
    pub ry: Option<f64>,
    /// `min{R(D), R_C}` or `min{R(D), R_Y(D) + R_C}`.
    pub threshold: f64,
    pub holds: bool,
}

/// Checks `R < min{R(D), R_C}` (clean) or `R < min{R(D), R_Y(D) + R_C}`
/// (noisy).
pub fn regime(params: &DecayParams) -> Result<RegimeReport> {
    let (px, ry) = match &params.noise {
        None => (params.generator.clone(), None),
        Some(ch) => {
            let pxy = JointDistribution::from_marginal_channel(&params.generator, ch)?.transpose();
            let ry = side_info_rate_distortion(&pxy, &params.d, params.level, &params.ba)?;
            (ch.push(&params.generator)?, Some(ry))
        }
    };
    let rd = rate_distortion(&px, &params.d, params.level, &params.ba)?;
    let threshold = rd.min(ry.unwrap_or(0.0) + params.codebook_rate);
    Ok(RegimeReport {
        rd,
        ry,
        threshold,
        holds: params.rate < threshold,
    })
}

/// Nominal exponents of the doubly exponential bound, without the
/// vanishing terms: `alpha = R(D) - R` and `beta = R_C - R` (clean) or
/// `R_C + R_Y(D) - R` (noisy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayExponents {
    pub alpha: f64,
    pub beta: f64,
}

impl DecayExponents {
    pub fn from_regime(report: &RegimeReport, codebook_rate: f64, rate: f64) -> Self {
        Self {
            alpha: report.rd - rate,
            beta: codebook_rate + report.ry.unwrap_or(0.0) - rate,
        }
    }

    /// `log2` of `2^{-n alpha 2^{n beta}}`.
    pub fn log2_bound(&self, n: usize) -> f64 {
        -(n as f64) * self.alpha * exp2(n as f64 * self.beta)
    }
}

/// One `(n, seed)` row of a decay experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub n: usize,
    pub seed: u64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub tau_n: f64,
    /// The upper end exceeds `tau_n`.
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    pub regime: RegimeReport,
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    /// Fraction of seeds exceeding `tau_n`, per `n` in grid order.
    pub fn exceed_fraction(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64, usize)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(n, _, _)| *n == r.n) {
                Some(e) => {
                    e.1 += r.exceeds as u8 as f64;
                    e.2 += 1;
                }
                None => out.push((r.n, r.exceeds as u8 as f64, 1)),
            }
        }
        out.into_iter().map(|(n, s, c)| (n, s / c as f64)).collect()
    }
}

/// Runs [`decay_row`] over the grid after checking the regime.
pub fn decay_experiment(params: &DecayParams) -> Result<DecayTable> {
    let report = check_regime(params)?;
    let mut rows = Vec::with_capacity(params.n_grid.len() * params.seeds.len());
    for &n in &params.n_grid {
        for &seed in &params.seeds {
            rows.push(decay_row(params, n, seed)?);
        }
    }
    Ok(DecayTable { regime: report, rows })
}

/// Refuses parameters outside the decay regime.
pub fn check_regime(params: &DecayParams) -> Result<RegimeReport> {
    if params.n_grid.is_empty() || params.seeds.is_empty() {
        return Err(Error::InvalidParameter("empty n grid or seed list".into()));
    }
    let report = regime(params)?;
    if !report.holds {
        let msg: String = match report.ry {
            None => format!(
                "R = {} must be below min{{R(D), R_C}} = min{{{:.6}, {}}}",
                params.rate, report.rd, params.codebook_rate
            ),
            Some(ry) => format!(
                "R = {} must be below min{{R(D), R_Y(D) + R_C}} = min{{{:.6}, {:.6} + {}}}",
                params.rate, report.rd, ry, params.codebook_rate
            ),
        };
        return Err(Error::RegimeViolation(msg));
    }
    Ok(report)
}

/// One seed at one blocklength, without the regime gate.
pub fn decay_row(params: &DecayParams, n: usize, seed: u64) -> Result<DecayRow> {
    let cb = Codebook::build(seed, n, params.codebook_rate, 0.0, &params.generator)?;
    let inst = match &params.noise {
        None => SubproblemInstance::new(cb, params.rate, params.level, params.d.clone())?,
        Some(ch) => SubproblemInstance::noisy(cb, ch.clone(), params.rate, params.level, params.d.clone())?,
    }
    .with_delta(params.delta)?;
    let est = best_code_success(&inst, &params.options)?;
    let tau_n = params.tau.at(n);
    Ok(DecayRow {
        n,
        seed,
        lower: est.lower,
        upper: est.upper,
        exact: est.exact,
        tau_n,
        exceeds: est.upper > tau_n,
    })
}

/// A probability against its exponential bound, with measured slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub probability: f64,
    /// `-log2(probability) / n`.
    pub measured_exponent: f64,
    /// The rate the bound is stated with (`R(D)` or `R_Y(D)`).
    pub rate: f64,
    /// `rate - measured_exponent`: the vanishing term as observed.
    pub slack: f64,
}

impl BoundCheck {
    fn new(probability: f64, n: usize, rate: f64) -> Self {
        let measured = if probability > 0.0 {
            -log2(probability) / n as f64
        } else {
            f64::INFINITY
        };
        Self {
            probability,
            measured_exponent: measured,
            rate,
            slack: rate - measured,
        }
    }
}

/// `P[d(X^n, z^n) <= D, X^n typical]` for `X^n ~ prod P_X`, with the
/// type-counting bound `(n+1)^{|X||Z|} 2^{-n E_delta}` where `E_delta` is the
/// exponent minimized over the typicality ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeBoundCheck {
    pub check: BoundCheck,
    pub restricted_exponent: f64,
    pub log2_type_bound: f64,
    pub dominated: bool,
}

pub fn type_bound_check(
    p: &Distribution,
    d: &DistortionMatrix,
    level: f64,
    delta: f64,
    z: &Sequence,
    ba: &BaOptions,
) -> Result<TypeBoundCheck> {
    let n = z.len();
    // A constant side symbol turns the conditional computation into the
    // unconditional one.
    let ch = Channel::constant(1, p);
    let pxy = JointDistribution::new(p.alphabet_size(), 1, p.mass().to_vec())?;
    let lattice = DistortionLattice::new(d, DEFAULT_LATTICE_DENOMINATOR);
    let y = vec![0u8; n];
    let prob = conditional_success(&y, &ch, z.symbols(), d, level, &pxy, delta, &lattice)?;
    let rd = rate_distortion(p, d, level, ba)?;
    let e = rd_exponent(p, d, level, delta, ba)?;
    let log2_bound = (d.rows() * d.cols()) as f64 * log2((n + 1) as f64) - n as f64 * e;
    Ok(TypeBoundCheck {
        check: BoundCheck::new(prob, n, rd),
        restricted_exponent: e,
        log2_type_bound: log2_bound,
        dominated: prob == 0.0 || log2(prob) <= log2_bound + 1e-9,
    })
}

/// Largest `zeta` over the enumerable `(y^n, z^n)` pairs against
/// `2^{-n R_Y(D)}`.
pub fn zeta_support_check(
    py: &Distribution,
    backward: &Channel,
    d: &DistortionMatrix,
    level: f64,
    delta: f64,
    n: usize,
    ba: &BaOptions,
) -> Result<BoundCheck> {
    let pxy = JointDistribution::from_marginal_channel(py, backward)?.transpose();
    let ry = side_info_rate_distortion(&pxy, d, level, ba)?;
    let lattice = DistortionLattice::new(d, DEFAULT_LATTICE_DENOMINATOR);
    let ys = space_size(py.alphabet_size(), n, 1 << 12)?;
    let zs = space_size(d.cols(), n, 1 << 12)?;
    let mut worst = 0.0f64;
    for yi in 0..ys {
        let y = symbols_of(yi, n, py.alphabet_size());
        for zi in 0..zs {
            let z = symbols_of(zi, n, d.cols());
            worst = worst.max(conditional_success(&y, backward, &z, d, level, &pxy, delta, &lattice)?);
        }
    }
    Ok(BoundCheck::new(worst, n, ry))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(p: f64) -> Distribution {
        Distribution::bernoulli(p).unwrap()
    }

    fn ham() -> DistortionMatrix {
        DistortionMatrix::hamming(2).unwrap()
    }

    fn clean(seed: u64, n: usize, rc: f64, r: f64, level: f64) -> SubproblemInstance {
        let cb = Codebook::build(seed, n, rc, 0.0, &bern(0.5)).unwrap();
        SubproblemInstance::new(cb, r, level, ham()).unwrap()
    }

    #[test]
    fn rate_at_codebook_rate_always_succeeds() {
        for seed in 0..5 {
            let est = best_code_success(&clean(seed, 6, 0.5, 0.5, 0.0), &Default::default()).unwrap();
            assert_eq!(est.lower, 1.0);
        }
    }

    #[test]
    fn maximal_level_always_succeeds() {
        let est = best_code_success(&clean(1, 5, 1.0, 0.0, 1.0), &Default::default()).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-12 && est.exact);
    }

    #[test]
    fn exact_at_tiny_scale() {
        let est = best_code_success(&clean(3, 2, 1.0, 0.5, 0.25), &Default::default()).unwrap();
        assert!(est.exact);
        assert_eq!(est.lower, est.upper);
    }

    /// Independent oracle: enumerate every reconstruction codebook of the
    /// right size.
    fn brute_success(inst: &SubproblemInstance) -> f64 {
        let n = inst.n();
        let zs = 1usize << n;
        let l = inst.list_size();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << zs) {
            if mask.count_ones() as usize != l.min(zs) {
                continue;
            }
            let hits = inst
                .codebook
                .entries()
                .filter(|x| {
                    (0..zs).filter(|z| mask >> z & 1 == 1).any(|z| {
                        let zz = symbols_of(z as u64, n, 2);
                        distortion_unchecked(x, &zz, &ham()) <= inst.level + 1e-12
                    })
                })
                .count();
            best = best.max(hits as f64 / inst.codebook.messages() as f64);
        }
        best
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        for seed in 0..10 {
            for &(n, level) in &[(2usize, 0.25), (3, 1.0 / 3.0), (3, 0.0)] {
                let inst = clean(seed, n, 1.0, 0.5, level);
                let est = best_code_success(&inst, &Default::default()).unwrap();
                assert!(est.exact);
                assert!((est.lower - brute_success(&inst)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interval_brackets_the_exact_value() {
        for seed in 0..5 {
            let inst = clean(seed, 3, 1.0, 0.5, 1.0 / 3.0);
            let exact = best_code_success(&inst, &Default::default()).unwrap().lower;
            let opts = SuccessOptions {
                exhaustive_limit: 0.0,
                ..Default::default()
            };
            let est = best_code_success(&inst, &opts).unwrap();
            assert!(!est.exact);
            assert!(est.lower <= exact + 1e-12 && exact <= est.upper + 1e-12);
        }
    }

    #[test]
    fn union_bound_chain_holds() {
        for seed in 0..10 {
            let inst = clean(seed, 3, 1.0, 0.5, 1.0 / 3.0).with_delta(0.3).unwrap();
            let exact = best_code_success(&inst, &Default::default()).unwrap().lower;
            let jj = inst.codebook.messages() as f64;
            let atyp = inst.codebook.entries().filter(|x| !inst.is_typical(x)).count() as f64 / jj;
            let max_xi = (0..8)
                .map(|z| xi_sum(&inst, &Sequence::from_symbols(symbols_of(z, 3, 2))).unwrap())
                .fold(0.0, f64::max);
            assert!(exact <= inst.list_size() as f64 * max_xi / jj + atyp + 1e-12);
        }
    }

    #[test]
    fn xi_counts_multiplicity_at_zero_level() {
        let x = Sequence::from_symbols(vec![0, 1, 0, 1]);
        let cb = Codebook::from_entries(3, 1, &[x.clone(), x.clone(), Sequence::from_symbols(vec![1, 1, 1, 1])], &bern(0.5))
            .unwrap();
        let inst = SubproblemInstance::new(cb, 0.0, 0.0, ham()).unwrap();
        assert_eq!(xi_sum(&inst, &x).unwrap(), 2.0);
        // Below the smallest positive distortion nothing else matches.
        assert_eq!(xi_sum(&inst, &Sequence::from_symbols(vec![0, 0, 0, 1])).unwrap(), 0.0);
    }

    /// Independent oracle for the dynamic program: enumerate every x^n.
    #[test]
    fn conditional_success_matches_enumeration() {
        let back = Channel::from_rows(vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let py = bern(0.4);
        let pxy = JointDistribution::from_marginal_channel(&py, &back).unwrap().transpose();
        let d = DistortionMatrix::from_rows(vec![vec![0.0, 0.5], vec![1.25, 0.0]]).unwrap();
        let lattice = DistortionLattice::new(&d, 1024);
        assert_eq!(lattice.den, 4);
        let n = 6;
        for (yi, zi) in [(5u64, 9u64), (0, 63), (42, 42)] {
            let y = symbols_of(yi, n, 2);
            let z = symbols_of(zi, n, 2);
            for &level in &[0.1, 0.3, 0.6] {
                for &delta in &[0.15, 0.45, 1.1] {
                    let got = conditional_success(&y, &back, &z, &d, level, &pxy, delta, &lattice).unwrap();
                    let mut want = 0.0;
                    for xi in 0..64 {
                        let x = symbols_of(xi, n, 2);
                        let p: f64 = x.iter().zip(&y).map(|(&a, &b)| back.prob(b as usize, a as usize)).product();
                        if distortion_unchecked(&x, &z, &d) <= level + 1e-12 && jointly_typical(&x, &y, &pxy, delta) {
                            want += p;
                        }
                    }
                    assert!((got - want).abs() < 1e-12, "{got} vs {want} at {yi} {zi} {level} {delta}");
                }
            }
        }
    }

    #[test]
    fn irrational_entries_are_rounded() {
        let d = DistortionMatrix::from_rows(vec![vec![0.0, core::f64::consts::PI / 10.0], vec![1.0, 0.0]]).unwrap();
        let l = DistortionLattice::new(&d, 1024);
        assert_eq!(l.den, 1024);
        assert!(l.rounding > 0.0 && l.rounding <= 0.5 / 1024.0);
    }

    #[test]
    fn chernoff_examples() {
        let e = core::f64::consts::E;
        assert!((chernoff_binary(10.0, 0.1, e * 10.0 * 0.1) - 1.0).abs() < 1e-12);
        let v = chernoff_binary(10.0, 0.1, 5.0);
        assert!((v - 0.047_492).abs() < 1e-6, "{v}");
        assert!(v >= binomial_tail(10, 0.1, 5.0));
        for &(m, p, k) in &[(10.0, 0.2, 4.0), (25.0, 0.05, 3.5)] {
            assert!((chernoff_bounded(m, p, k, 1.0) - chernoff_binary(m, p, k)).abs() < 1e-15);
            let a = 2.5;
            let lhs = chernoff_bounded(m, p, k, a);
            let rhs = chernoff_binary(m, p / a, k / a);
            assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1.0));
        }
    }

    #[test]
    fn binomial_tail_edges() {
        assert_eq!(binomial_tail(5, 0.3, 0.0), 1.0);
        assert_eq!(binomial_tail(5, 0.3, 6.0), 0.0);
        assert!((binomial_tail(3, 0.5, 2.0) - 0.5).abs() < 1e-12);
        assert!((binomial_tail(4, 0.25, 3.5) - 0.25f64.powi(4)).abs() < 1e-15);
    }

    fn params(rate: f64, rc: f64, level: f64) -> DecayParams {
        DecayParams {
            generator: bern(0.5),
            noise: None,
            d: ham(),
            codebook_rate: rc,
            rate,
            level,
            n_grid: vec![2, 3],
            seeds: vec![0, 1],
            tau: TauFamily::Polynomial { scale: 1.0, power: 1.0 },
            delta: DEFAULT_DELTA,
            options: Default::default(),
            ba: Default::default(),
        }
    }

    #[test]
    fn regime_gate_refuses() {
        assert!(matches!(
            decay_experiment(&params(0.6, 0.5, 0.1)),
            Err(Error::RegimeViolation(_))
        ));
        assert!(matches!(
            decay_experiment(&params(0.5, 1.0, 0.2)),
            Err(Error::RegimeViolation(_))
        ));
        let t = decay_experiment(&params(0.2, 1.0, 0.15)).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.exceed_fraction().len(), 2);
    }

    #[test]
    fn tau_families() {
        let p = TauFamily::Polynomial { scale: 2.0, power: 0.5 };
        assert!((p.at(16) - 0.5).abs() < 1e-15);
        let s = TauFamily::SubExpRoot { scale: 1.0 };
        assert!((s.at(9) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn exponents_follow_the_regime() {
        let r = RegimeReport {
            rd: 0.5,
            ry: Some(0.1),
            threshold: 0.5,
            holds: true,
        };
        let e = DecayExponents::from_regime(&r, 0.3, 0.2);
        assert!((e.alpha - 0.3).abs() < 1e-15 && (e.beta - 0.2).abs() < 1e-15);
        assert!(e.log2_bound(10) < 0.0);
    }

    #[test]
    fn type_bound_dominates() {
        let z = Sequence::from_symbols(vec![0; 10]);
        for &delta in &[0.05, 0.1, 0.3] {
            let c = type_bound_check(&bern(0.3), &ham(), 0.1, delta, &z, &BaOptions::default()).unwrap();
            assert!(c.dominated, "{c:?}");
        }
    }

    #[test]
    fn zeta_support_reports_slack() {
        let back = Channel::binary_symmetric(0.1).unwrap();
        let c = zeta_support_check(&bern(0.5), &back, &ham(), 0.05, 0.2, 4, &BaOptions::default()).unwrap();
        assert!(c.probability > 0.0 && c.probability <= 1.0);
        assert!(c.slack.is_finite());
    }
}
