//! Rate-distortion solvers.
//!
//! Everything here is built on the Blahut–Arimoto alternating minimization
//! at a fixed Lagrange slope. A slope `s <= 0` (bits per unit distortion)
//! picks the point of the `R(D)` curve where the tangent has slope `s`;
//! internally we work with `beta = -s >= 0`. `R(D)` and `D(R)` are obtained
//! by bisecting `beta`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp2, log2};
use crate::prob::{
    kl_divergence, tv_slices, Channel, Distribution, DistortionMatrix, JointDistribution,
};

/// Largest `beta` the bisections consider; `2^-200` is numerically zero
/// weight, so this stands in for the zero-distortion limit.
pub const MAX_BETA: f64 = 200.0;

const BISECTION_STEPS: usize = 80;

/// Iteration controls for Blahut–Arimoto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaOptions {
    pub max_iterations: usize,
    /// Iteration stops once successive rate and distortion changes both fall
    /// below this, or once the Lagrangian optimality gap does.
    pub tolerance: f64,
}

impl Default for BaOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-10,
        }
    }
}

/// One point of an `R(D)` curve with its optimizing test channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    pub rate: f64,
    pub distortion: f64,
    /// Lagrange slope `dR/dD <= 0`.
    pub slope: f64,
    /// The optimizing `P_{Z|X}`.
    pub test_channel: Channel,
}

impl RdPoint {
    /// Output marginal `P_Z` of the test channel under `source`.
    pub fn output_marginal(&self, source: &Distribution) -> Result<Distribution> {
        self.test_channel.push(source)
    }
}

/// A point of the side-information curve: one test channel per `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SideInfoRdPoint {
    pub rate: f64,
    pub distortion: f64,
    pub slope: f64,
    /// `P_{Z|X, Y=y}` for each side-information symbol. Symbols with zero
    /// probability carry the constant best-guess channel.
    pub per_y_channels: Vec<Channel>,
}

#[derive(Debug, Clone)]
struct BaState {
    rate: f64,
    distortion: f64,
    output: Vec<f64>,
    conditional: Vec<f64>,
}

fn check_source(p: &Distribution, d: &DistortionMatrix) -> Result<()> {
    if p.alphabet_size() != d.rows() {
        return Err(Error::AlphabetMismatch {
            expected: d.rows(),
            found: p.alphabet_size(),
        });
    }
    Ok(())
}

/// Blahut–Arimoto at fixed `beta`, warm-started from `init` when given.
fn blahut_arimoto(
    p: &Distribution,
    d: &DistortionMatrix,
    beta: f64,
    init: Option<&[f64]>,
    opts: &BaOptions,
) -> Result<BaState> {
    match iterate(p, d, beta, init, opts) {
        (state, true) => Ok(state),
        (_, false) => Err(Error::NonConvergence {
            iterations: opts.max_iterations,
        }),
    }
}

/// Like [`blahut_arimoto`] but keeps the last iterate when the budget runs
/// out. Near the critical slope of a curve the iteration is sublinear; every
/// iterate is still a genuine test channel, so its (rate, distortion) pair is
/// achievable and the bisections can use it.
fn blahut_arimoto_relaxed(
    p: &Distribution,
    d: &DistortionMatrix,
    beta: f64,
    init: Option<&[f64]>,
    opts: &BaOptions,
) -> BaState {
    iterate(p, d, beta, init, opts).0
}

fn iterate(
    p: &Distribution,
    d: &DistortionMatrix,
    beta: f64,
    init: Option<&[f64]>,
    opts: &BaOptions,
) -> (BaState, bool) {
    let nx = d.rows();
    let nz = d.cols();
    let weights: Vec<f64> = d.entries().iter().map(|&e| exp2(-beta * e)).collect();
    let mut q: Vec<f64> = match init {
        Some(q0) if q0.len() == nz && q0.iter().all(|v| *v > 0.0) => q0.to_vec(),
        // Strictly positive start so no reconstruction symbol is lost early.
        _ => vec![1.0 / nz as f64; nz],
    };
    let mut norm = vec![0.0; nx];
    let mut gain = vec![0.0; nz];
    let mut prev_rate = f64::INFINITY;
    let mut prev_dist = f64::INFINITY;
    let mut last = None;
    for _ in 0..opts.max_iterations {
        for x in 0..nx {
            norm[x] = (0..nz).map(|z| q[z] * weights[x * nz + z]).sum();
        }
        for (z, g) in gain.iter_mut().enumerate() {
            *g = (0..nx)
                .filter(|&x| p.get(x) > 0.0)
                .map(|x| p.get(x) * weights[x * nz + z] / norm[x])
                .sum();
        }
        // Lagrangian optimality gap: max_z log2 gain(z) >= 0, zero at the optimum.
        let gap = gain
            .iter()
            .map(|&g| if g > 0.0 { log2(g) } else { f64::NEG_INFINITY })
            .fold(f64::NEG_INFINITY, f64::max);
        for z in 0..nz {
            q[z] *= gain[z];
        }
        let total: f64 = q.iter().sum();
        for v in q.iter_mut() {
            *v /= total;
        }
        let state = evaluate(p, d, &weights, &q);
        let converged = gap < opts.tolerance
            || (abs(state.rate - prev_rate) < opts.tolerance
                && abs(state.distortion - prev_dist) < opts.tolerance);
        prev_rate = state.rate;
        prev_dist = state.distortion;
        if converged {
            return (state, true);
        }
        last = Some(state);
    }
    match last {
        Some(state) => (state, false),
        None => (evaluate(p, d, &weights, &q), false),
    }
}

/// Rate, distortion and conditional induced by output marginal `q`.
fn evaluate(p: &Distribution, d: &DistortionMatrix, weights: &[f64], q: &[f64]) -> BaState {
    let nx = d.rows();
    let nz = d.cols();
    let mut conditional = vec![0.0; nx * nz];
    let mut output = vec![0.0; nz];
    for x in 0..nx {
        let row = &mut conditional[x * nz..(x + 1) * nz];
        let mut total = 0.0;
        for z in 0..nz {
            row[z] = q[z] * weights[x * nz + z];
            total += row[z];
        }
        if total > 0.0 {
            for v in row.iter_mut() {
                *v /= total;
            }
        } else {
            // Only reachable when every weight underflowed; fall back to the
            // zero-distortion symbols of this row.
            let zeros = (0..nz).filter(|&z| d.get(x, z) == 0.0).count() as f64;
            for z in 0..nz {
                row[z] = if d.get(x, z) == 0.0 { 1.0 / zeros } else { 0.0 };
            }
        }
        for z in 0..nz {
            output[z] += p.get(x) * row[z];
        }
    }
    let mut rate = 0.0;
    let mut distortion = 0.0;
    for x in 0..nx {
        let px = p.get(x);
        if px <= 0.0 {
            continue;
        }
        for z in 0..nz {
            let w = conditional[x * nz + z];
            if w > 0.0 {
                rate += px * w * log2(w / output[z]);
                distortion += px * w * d.get(x, z);
            }
        }
    }
    BaState {
        rate: rate.max(0.0),
        distortion,
        output,
        conditional,
    }
}

fn to_channel(state: &BaState, nx: usize, nz: usize) -> Result<Channel> {
    Channel::new(
        (0..nx)
            .map(|x| Distribution::from_weights(&state.conditional[x * nz..(x + 1) * nz]))
            .collect::<Result<Vec<_>>>()?,
    )
}

fn constant_point(p: &Distribution, d: &DistortionMatrix) -> Result<RdPoint> {
    let (z, dist) = d.best_constant(p);
    Ok(RdPoint {
        rate: 0.0,
        distortion: dist,
        slope: 0.0,
        test_channel: Channel::constant(d.rows(), &Distribution::point(d.cols(), z)?),
    })
}

/// `max D` worth considering: the best zero-rate distortion `min_z E d(X, z)`.
pub fn max_distortion(p: &Distribution, d: &DistortionMatrix) -> f64 {
    d.best_constant(p).1
}

/// `sum_x P(x) min_z d(x, z)`, which is zero for valid distortion matrices.
pub fn min_distortion(p: &Distribution, d: &DistortionMatrix) -> f64 {
    (0..d.rows())
        .map(|x| p.get(x) * (0..d.cols()).map(|z| d.get(x, z)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// The curve point at Lagrange `slope <= 0`.
pub fn rd_point(
    p: &Distribution,
    d: &DistortionMatrix,
    slope: f64,
    opts: &BaOptions,
) -> Result<RdPoint> {
    check_source(p, d)?;
    let beta = -slope;
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter("slope must be <= 0".into()));
    }
    if beta == 0.0 {
        return constant_point(p, d);
    }
    let state = blahut_arimoto(p, d, beta.min(MAX_BETA), None, opts)?;
    Ok(RdPoint {
        rate: state.rate,
        distortion: state.distortion,
        slope,
        test_channel: to_channel(&state, d.rows(), d.cols())?,
    })
}

/// One curve point per Lagrange slope, warm-starting along the grid.
pub fn rd_curve(
    p: &Distribution,
    d: &DistortionMatrix,
    slope_grid: &[f64],
    opts: &BaOptions,
) -> Result<Vec<RdPoint>> {
    check_source(p, d)?;
    if slope_grid.is_empty() {
        return Err(Error::InvalidParameter("empty slope grid".into()));
    }
    let mut out = Vec::with_capacity(slope_grid.len());
    let mut warm: Option<Vec<f64>> = None;
    for &slope in slope_grid {
        let beta = -slope;
        if !(beta >= 0.0) {
            return Err(Error::InvalidParameter("slopes must be <= 0".into()));
        }
        if beta == 0.0 {
            out.push(constant_point(p, d)?);
            continue;
        }
        let state = blahut_arimoto(p, d, beta.min(MAX_BETA), warm.as_deref(), opts)?;
        out.push(RdPoint {
            rate: state.rate,
            distortion: state.distortion,
            slope,
            test_channel: to_channel(&state, d.rows(), d.cols())?,
        });
        warm = Some(state.output.iter().map(|v| v.max(1e-300)).collect());
    }
    Ok(out)
}

/// Solves a slope bisection against a monotone target.
///
/// `eval(beta)` returns `(rate, distortion)`; rate is nondecreasing and
/// distortion nonincreasing in `beta`. `matches_rate` selects which of the
/// two is matched to `target`. Returns the bracketing point closest to the
/// target from the feasible side together with its `beta`.
fn bisect_beta<F>(mut eval: F, target: f64, matches_rate: bool) -> Result<(f64, f64, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let mut lo = 0.0;
    let mut hi = MAX_BETA;
    let (mut hr, mut hd) = eval(hi)?;
    // `hi` keeps the feasible side: distortion <= target (R(D)) or
    // rate >= target (D(R)).
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-13 {
            break;
        }
        let (r, dist) = eval(mid)?;
        let feasible = if matches_rate { r >= target } else { dist <= target };
        if feasible {
            hi = mid;
            hr = r;
            hd = dist;
        } else {
            lo = mid;
        }
    }
    Ok((hi, hr, hd))
}

/// `R(D)` in bits.
pub fn rate_distortion(p: &Distribution, d: &DistortionMatrix, dist: f64, opts: &BaOptions) -> Result<f64> {
    check_source(p, d)?;
    let dmax = max_distortion(p, d);
    if dist >= dmax {
        return Ok(0.0);
    }
    let mut warm: Option<Vec<f64>> = None;
    let eval = |beta: f64| -> Result<(f64, f64)> {
        let s = blahut_arimoto_relaxed(p, d, beta, warm.as_deref(), opts);
        warm = Some(s.output.iter().map(|v| v.max(1e-300)).collect());
        Ok((s.rate, s.distortion))
    };
    let (beta, r, achieved) = bisect_beta(eval, dist.max(0.0), false)?;
    // Tangent correction: R(D) = R(D_beta) - beta (D - D_beta).
    let corrected = r - beta * (dist.max(0.0) - achieved);
    Ok(corrected.clamp(0.0, r))
}

/// `D(R)`: the smallest expected distortion at rate `<= rate`.
pub fn distortion_rate(p: &Distribution, d: &DistortionMatrix, rate: f64, opts: &BaOptions) -> Result<f64> {
    Ok(rd_point_at_rate(p, d, rate, opts)?.distortion)
}

/// The curve point whose rate equals `rate` (or the zero-distortion end when
/// `rate` exceeds what zero distortion needs).
pub fn rd_point_at_rate(
    p: &Distribution,
    d: &DistortionMatrix,
    rate: f64,
    opts: &BaOptions,
) -> Result<RdPoint> {
    check_source(p, d)?;
    if rate < 0.0 || rate.is_nan() {
        return Err(Error::InvalidParameter("rate must be >= 0".into()));
    }
    let dmax = max_distortion(p, d);
    if rate == 0.0 || dmax <= min_distortion(p, d) {
        return constant_point(p, d);
    }
    let top = blahut_arimoto_relaxed(p, d, MAX_BETA, None, opts);
    if rate >= top.rate {
        return Ok(RdPoint {
            rate: top.rate,
            distortion: top.distortion.max(min_distortion(p, d)),
            slope: -MAX_BETA,
            test_channel: to_channel(&top, d.rows(), d.cols())?,
        });
    }
    let mut warm: Option<Vec<f64>> = None;
    let eval = |beta: f64| -> Result<(f64, f64)> {
        let s = blahut_arimoto_relaxed(p, d, beta, warm.as_deref(), opts);
        warm = Some(s.output.iter().map(|v| v.max(1e-300)).collect());
        Ok((s.rate, s.distortion))
    };
    let (beta, r, dist) = bisect_beta(eval, rate, true)?;
    let state = blahut_arimoto_relaxed(p, d, beta, None, opts);
    // Tangent correction back to the requested rate: dD/dR = -1/beta.
    let corrected = (dist + (r - rate) / beta).clamp(dist, dmax);
    Ok(RdPoint {
        rate,
        distortion: corrected,
        slope: -beta,
        test_channel: to_channel(&state, d.rows(), d.cols())?,
    })
}

/// Per-`y` conditional sources `P_{X|Y=y}` with weights `P(y)`.
fn conditional_sources(pxy: &JointDistribution) -> Vec<(f64, Option<Distribution>)> {
    let py = pxy.col_marginal();
    (0..pxy.cols())
        .map(|y| {
            let w = py.get(y);
            if w > 0.0 {
                (w, pxy.row_conditional(y))
            } else {
                (0.0, None)
            }
        })
        .collect()
}

struct SideInfoEval<'a> {
    parts: Vec<(f64, Option<Distribution>)>,
    d: &'a DistortionMatrix,
    opts: &'a BaOptions,
    warm: Vec<Option<Vec<f64>>>,
}

impl<'a> SideInfoEval<'a> {
    fn new(pxy: &JointDistribution, d: &'a DistortionMatrix, opts: &'a BaOptions) -> Self {
        let parts = conditional_sources(pxy);
        let warm = vec![None; parts.len()];
        Self {
            parts,
            d,
            opts,
            warm,
        }
    }

    fn at(&mut self, beta: f64) -> Result<(f64, f64, Vec<Option<BaState>>)> {
        let mut rate = 0.0;
        let mut dist = 0.0;
        let mut states = Vec::with_capacity(self.parts.len());
        for (i, (w, src)) in self.parts.iter().enumerate() {
            match src {
                Some(src) if beta > 0.0 => {
                    let s = blahut_arimoto_relaxed(src, self.d, beta, self.warm[i].as_deref(), self.opts);
                    self.warm[i] = Some(s.output.iter().map(|v| v.max(1e-300)).collect());
                    rate += w * s.rate;
                    dist += w * s.distortion;
                    states.push(Some(s));
                }
                Some(src) => {
                    dist += w * max_distortion(src, self.d);
                    states.push(None);
                }
                None => states.push(None),
            }
        }
        Ok((rate, dist, states))
    }

    fn zero_rate_distortion(&self) -> f64 {
        self.parts
            .iter()
            .filter_map(|(w, s)| s.as_ref().map(|s| w * max_distortion(s, self.d)))
            .sum()
    }

    fn channels(&self, states: &[Option<BaState>]) -> Result<Vec<Channel>> {
        let nx = self.d.rows();
        let nz = self.d.cols();
        states
            .iter()
            .zip(&self.parts)
            .map(|(s, (_, src))| match (s, src) {
                (Some(s), _) => to_channel(s, nx, nz),
                (None, Some(src)) => {
                    let (z, _) = self.d.best_constant(src);
                    Ok(Channel::constant(nx, &Distribution::point(nz, z)?))
                }
                (None, None) => Ok(Channel::constant(nx, &Distribution::point(nz, 0)?)),
            })
            .collect()
    }
}

fn check_joint(pxy: &JointDistribution, d: &DistortionMatrix) -> Result<()> {
    if pxy.rows() != d.rows() {
        return Err(Error::AlphabetMismatch {
            expected: d.rows(),
            found: pxy.rows(),
        });
    }
    Ok(())
}

/// The side-information curve point at a common Lagrange `slope`.
pub fn side_info_point(
    pxy: &JointDistribution,
    d: &DistortionMatrix,
    slope: f64,
    opts: &BaOptions,
) -> Result<SideInfoRdPoint> {
    check_joint(pxy, d)?;
    let beta = (-slope).min(MAX_BETA);
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter("slope must be <= 0".into()));
    }
    let mut ev = SideInfoEval::new(pxy, d, opts);
    let (rate, distortion, states) = ev.at(beta)?;
    Ok(SideInfoRdPoint {
        rate,
        distortion,
        slope,
        per_y_channels: ev.channels(&states)?,
    })
}

/// `D(R, P_XY) = min E d(X, Z)` over `P_{Z|XY}` with `I(X; Z | Y) <= R`.
///
/// `pxy` has the source `X` on rows and the side information `Y` on columns.
/// A common slope is swept across the per-`y` subproblems and bisected to
/// meet the rate.
pub fn side_info_distortion_rate(
    pxy: &JointDistribution,
    d: &DistortionMatrix,
    rate: f64,
    opts: &BaOptions,
) -> Result<f64> {
    Ok(side_info_point_at_rate(pxy, d, rate, opts)?.distortion)
}

/// The side-information curve point at `rate`.
pub fn side_info_point_at_rate(
    pxy: &JointDistribution,
    d: &DistortionMatrix,
    rate: f64,
    opts: &BaOptions,
) -> Result<SideInfoRdPoint> {
    check_joint(pxy, d)?;
    if rate < 0.0 || rate.is_nan() {
        return Err(Error::InvalidParameter("rate must be >= 0".into()));
    }
    let mut ev = SideInfoEval::new(pxy, d, opts);
    let zero_rate = ev.zero_rate_distortion();
    if rate == 0.0 {
        let (_, _, states) = ev.at(0.0)?;
        return Ok(SideInfoRdPoint {
            rate: 0.0,
            distortion: zero_rate,
            slope: 0.0,
            per_y_channels: ev.channels(&states)?,
        });
    }
    let (top_rate, top_dist, top_states) = ev.at(MAX_BETA)?;
    if rate >= top_rate {
        return Ok(SideInfoRdPoint {
            rate: top_rate,
            distortion: top_dist,
            slope: -MAX_BETA,
            per_y_channels: ev.channels(&top_states)?,
        });
    }
    let mut ev2 = SideInfoEval::new(pxy, d, opts);
    let eval = |beta: f64| -> Result<(f64, f64)> {
        let (r, dist, _) = ev2.at(beta)?;
        Ok((r, dist))
    };
    let (beta, r, dist) = bisect_beta(eval, rate, true)?;
    let mut ev3 = SideInfoEval::new(pxy, d, opts);
    let (_, _, states) = ev3.at(beta)?;
    let corrected = (dist + (r - rate) / beta).clamp(dist, zero_rate);
    Ok(SideInfoRdPoint {
        rate,
        distortion: corrected,
        slope: -beta,
        per_y_channels: ev3.channels(&states)?,
    })
}

/// `R_Y(D) = min I(X; Z | Y)` over `P_{Z|XY}` with `E d(X, Z) <= D`.
pub fn side_info_rate_distortion(
    pxy: &JointDistribution,
    d: &DistortionMatrix,
    dist: f64,
    opts: &BaOptions,
) -> Result<f64> {
    check_joint(pxy, d)?;
    let mut ev = SideInfoEval::new(pxy, d, opts);
    if dist >= ev.zero_rate_distortion() {
        return Ok(0.0);
    }
    let eval = |beta: f64| -> Result<(f64, f64)> {
        let (r, dd, _) = ev.at(beta)?;
        Ok((r, dd))
    };
    let (beta, r, achieved) = bisect_beta(eval, dist.max(0.0), false)?;
    let corrected = r - beta * (dist.max(0.0) - achieved);
    Ok(corrected.clamp(0.0, r))
}

/// Controls for the exponent search over the source simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSearch {
    /// Points per unit of the initial simplex lattice.
    pub lattice: usize,
    /// Pattern search stops below this step.
    pub min_step: f64,
}

impl ExponentSearch {
    /// Lattice resolution sized for the alphabet (the search is meant for
    /// alphabets of at most four symbols).
    pub fn for_alphabet(k: usize) -> Self {
        let lattice = match k {
            0..=2 => 400,
            3 => 60,
            4 => 20,
            _ => 8,
        };
        Self {
            lattice,
            min_step: 1e-7,
        }
    }
}

/// `min_Q [R(D, Q) + D(Q || P)]` over `Q` with `TV(Q, P) <= delta`.
///
/// `delta = f64::INFINITY` leaves `Q` unrestricted; `delta = 0` gives
/// `R(D, P)`. The search scans a simplex lattice restricted to the ball and
/// to `supp(P)`, then refines the best point by pattern search along
/// `e_i - e_j`.
pub fn rd_exponent(
    p: &Distribution,
    d: &DistortionMatrix,
    dist: f64,
    delta: f64,
    opts: &BaOptions,
) -> Result<f64> {
    rd_exponent_with(p, d, dist, delta, &ExponentSearch::for_alphabet(p.alphabet_size()), opts)
}

pub fn rd_exponent_with(
    p: &Distribution,
    d: &DistortionMatrix,
    dist: f64,
    delta: f64,
    search: &ExponentSearch,
    opts: &BaOptions,
) -> Result<f64> {
    check_source(p, d)?;
    if dist < 0.0 || delta < 0.0 || delta.is_nan() {
        return Err(Error::InvalidParameter("D and delta must be >= 0".into()));
    }
    let objective = |q: &[f64]| -> Result<f64> {
        let qd = Distribution::from_weights(q)?;
        let kl = kl_divergence(&qd, p)?;
        if !kl.is_finite() {
            return Ok(f64::INFINITY);
        }
        Ok(rate_distortion(&qd, d, dist, opts)? + kl)
    };
    if delta == 0.0 {
        return rate_distortion(p, d, dist, opts);
    }
    let k = p.alphabet_size();
    let inside = |q: &[f64]| -> bool {
        q.iter().all(|v| *v >= 0.0)
            && q.iter().zip(p.mass()).all(|(a, b)| *b > 0.0 || *a == 0.0)
            && tv_slices(q, p.mass()) <= delta + 1e-15
    };

    let mut best_q = p.mass().to_vec();
    let mut best = objective(&best_q)?;
    let n = search.lattice;
    let mut counts = vec![0usize; k];
    let mut visit = |q: &[f64]| -> Result<()> {
        if inside(q) {
            let v = objective(q)?;
            if v < best {
                best = v;
                best_q = q.to_vec();
            }
        }
        Ok(())
    };
    lattice_walk(k, 0, n, &mut counts, &mut |c| {
        let q: Vec<f64> = c.iter().map(|&v| v as f64 / n as f64).collect();
        visit(&q)
    })?;

    // Pattern search from the best lattice point.
    let mut step = 1.0 / n as f64;
    while step >= search.min_step {
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let mut cand = best_q.clone();
                let room = cand[j].min(step);
                if room <= 0.0 {
                    continue;
                }
                cand[i] += room;
                cand[j] -= room;
                if !inside(&cand) {
                    // Walk back to the ball boundary along the same direction.
                    let mut lo = 0.0;
                    let mut hi = room;
                    for _ in 0..50 {
                        let mid = 0.5 * (lo + hi);
                        let mut t = best_q.clone();
                        t[i] += mid;
                        t[j] -= mid;
                        if inside(&t) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    if lo <= 0.0 {
                        continue;
                    }
                    cand = best_q.clone();
                    cand[i] += lo;
                    cand[j] -= lo;
                }
                let v = objective(&cand)?;
                if v < best - 1e-15 {
                    best = v;
                    best_q = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Visits every composition of `left` into the `k - pos` remaining parts.
fn lattice_walk<F>(k: usize, pos: usize, left: usize, counts: &mut [usize], f: &mut F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if pos + 1 == k {
        counts[pos] = left;
        return f(counts);
    }
    for c in 0..=left {
        counts[pos] = c;
        lattice_walk(k, pos + 1, left - c, counts, f)?;
    }
    Ok(())
}
