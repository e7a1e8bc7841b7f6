//! Boundaries of the achievable region: the largest distortion the
//! legitimate parties can force on the eavesdropper, for lossless and lossy
//! reproduction at Bob.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::prob::{mutual_information, Channel, Distribution, DistortionMatrix, JointDistribution};
use crate::rd::{distortion_rate, rate_distortion, rd_point_at_rate, side_info_distortion_rate, BaOptions};

/// Slack allowed on the rate and distortion constraints of a channel.
pub const CONSTRAINT_TOL: f64 = 1e-6;

/// Grid points allowed per search when the alphabets are not both binary.
pub const GRID_BUDGET: u64 = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct LosslessRegionQuery {
    pub rate: f64,
    pub key_rate: f64,
    pub list_rate: f64,
    pub source: Distribution,
    pub d_e: DistortionMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossyRegionQuery {
    pub rate: f64,
    pub key_rate: f64,
    pub list_rate: f64,
    /// Bob's distortion constraint.
    pub d_b_max: f64,
    pub source: Distribution,
    /// `|X| x |Y|`; its column count fixes Bob's reproduction alphabet.
    pub d_b: DistortionMatrix,
    pub d_e: DistortionMatrix,
}

fn check_rates(rate: f64, key_rate: f64, list_rate: f64) -> Result<()> {
    if !(rate >= 0.0 && key_rate >= 0.0 && list_rate >= 0.0) {
        return Err(Error::InvalidParameter("rates must be >= 0".into()));
    }
    Ok(())
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

impl LosslessRegionQuery {
    pub fn validate(&self) -> Result<()> {
        check_rates(self.rate, self.key_rate, self.list_rate)?;
        check_source(&self.source, &self.d_e)
    }
}

impl LossyRegionQuery {
    pub fn validate(&self) -> Result<()> {
        check_rates(self.rate, self.key_rate, self.list_rate)?;
        if !(self.d_b_max >= 0.0) {
            return Err(Error::InvalidParameter("D_B must be >= 0".into()));
        }
        check_source(&self.source, &self.d_b)?;
        check_source(&self.source, &self.d_e)
    }
}

/// Largest eavesdropper distortion: `D(R_L)` when `R_0 > R_L`, else 0.
pub fn lossless_max_eve_distortion(q: &LosslessRegionQuery, ba: &BaOptions) -> Result<f64> {
    q.validate()?;
    let h = q.source.entropy();
    if q.rate < h - 1e-12 {
        return Err(Error::InfeasibleRate { rate: q.rate, entropy: h });
    }
    if q.key_rate > q.list_rate {
        distortion_rate(&q.source, &q.d_e, q.list_rate, ba)
    } else {
        Ok(0.0)
    }
}

/// Uniform simplex grid per row of `P_{Y|X}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGrid {
    /// Row entries are multiples of `1 / divisions`.
    pub divisions: u32,
    /// One coordinate-wise pass at a tenth of the step around the best point.
    pub refine: bool,
}

impl ChannelGrid {
    /// Step 0.02 for binary-to-binary channels; otherwise the finest uniform
    /// step keeping the grid within [`GRID_BUDGET`] points.
    pub fn for_alphabets(ax: usize, ay: usize) -> Self {
        if ax == 2 && ay == 2 {
            return Self {
                divisions: 50,
                refine: true,
            };
        }
        let mut k = 1u32;
        while grid_size(ax, ay, k + 1) <= GRID_BUDGET as f64 {
            k += 1;
        }
        Self {
            divisions: k,
            refine: true,
        }
    }

    pub fn step(&self) -> f64 {
        1.0 / self.divisions as f64
    }

    /// All channels of the grid, first row most significant.
    pub fn channels(&self, ax: usize, ay: usize) -> Result<Vec<Channel>> {
        let size = grid_size(ax, ay, self.divisions);
        if size > 1e7 {
            return Err(Error::ResourceGuard {
                what: "channel grid",
                requested: size,
                limit: 1e7,
            });
        }
        let rows = compositions(self.divisions, ay);
        let mut out = Vec::with_capacity(size as usize);
        let mut idx = vec![0usize; ax];
        loop {
            let ch: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| rows[i].iter().map(|&c| c as f64 / self.divisions as f64).collect())
                .collect();
            out.push(Channel::from_rows(ch)?);
            let mut pos = ax;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < rows.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

fn grid_size(ax: usize, ay: usize, k: u32) -> f64 {
    // C(k + ay - 1, ay - 1) points per row.
    let mut per_row = 1.0;
    for i in 1..ay {
        per_row *= (k as usize + i) as f64 / i as f64;
    }
    let mut total = 1.0;
    for _ in 0..ax {
        total *= per_row;
    }
    total
}

fn compositions(k: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(left - c, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, parts, &mut Vec::new(), &mut out);
    out
}

/// A boundary value, or the reason there is none.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Feasible {
        d_e_max: f64,
        /// The maximizing `P_{Y|X}` (lossy queries only).
        witness: Option<Channel>,
    },
    /// No `P_{Y|X}` meets Bob's constraints; `needed_rate` is `R(D_B)` under
    /// `d_B`.
    Infeasible { needed_rate: f64 },
}

impl Boundary {
    pub fn value(&self) -> Option<f64> {
        match self {
            Boundary::Feasible { d_e_max, .. } => Some(*d_e_max),
            Boundary::Infeasible { .. } => None,
        }
    }
}

/// Rate, Bob's distortion and the eavesdropper value for one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelScore {
    pub mutual_information: f64,
    pub bob_distortion: f64,
    /// `None` when the constraints fail.
    pub value: Option<f64>,
}

/// The channel-independent parts of a lossy query.
#[derive(Debug, Clone, PartialEq)]
pub struct LossyObjective {
    query: LossyRegionQuery,
    /// `D(R_L)` under `d_E`.
    list_distortion: f64,
    ba: BaOptions,
}

impl LossyObjective {
    pub fn new(q: &LossyRegionQuery, ba: &BaOptions) -> Result<Self> {
        q.validate()?;
        Ok(Self {
            query: q.clone(),
            list_distortion: distortion_rate(&q.source, &q.d_e, q.list_rate, ba)?,
            ba: *ba,
        })
    }

    pub fn list_distortion(&self) -> f64 {
        self.list_distortion
    }

    /// `D(R_L)` if `R_L < R_0`, else `min{D(R_L), D(R_L - R_0, P_XY)}`, for
    /// a channel meeting `I(X;Y) <= R` and `E d_B(X,Y) <= D_B`.
    pub fn score(&self, ch: &Channel) -> Result<ChannelScore> {
        let q = &self.query;
        let pxy = JointDistribution::from_marginal_channel(&q.source, ch)?;
        let info = mutual_information(&pxy);
        let dist: f64 = (0..pxy.rows())
            .flat_map(|x| (0..pxy.cols()).map(move |y| (x, y)))
            .map(|(x, y)| pxy.get(x, y) * q.d_b.get(x, y))
            .sum();
        let feasible = info <= q.rate + CONSTRAINT_TOL && dist <= q.d_b_max + CONSTRAINT_TOL;
        let value = if !feasible {
            None
        } else if q.list_rate < q.key_rate {
            Some(self.list_distortion)
        } else {
            let side = side_info_distortion_rate(&pxy, &q.d_e, q.list_rate - q.key_rate, &self.ba)?;
            Some(side.min(self.list_distortion))
        };
        Ok(ChannelScore {
            mutual_information: info,
            bob_distortion: dist,
            value,
        })
    }

    /// Cheap upper bound on [`score`](Self::score): the zero-rate value of the
    /// side-information problem, capped at `D(R_L)`.
    pub fn ceiling(&self, ch: &Channel) -> Result<f64> {
        let q = &self.query;
        if q.list_rate < q.key_rate {
            return Ok(self.list_distortion);
        }
        let pxy = JointDistribution::from_marginal_channel(&q.source, ch)?;
        let mut total = 0.0;
        for y in 0..pxy.cols() {
            total += (0..q.d_e.cols())
                .map(|z| (0..pxy.rows()).map(|x| pxy.get(x, y) * q.d_e.get(x, z)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
        }
        Ok(total.min(self.list_distortion))
    }

    /// A feasible channel whenever one exists: the `d_B` test channel at rate
    /// `R`.
    pub fn rate_distortion_witness(&self) -> Result<Channel> {
        Ok(rd_point_at_rate(&self.query.source, &self.query.d_b, self.query.rate, &self.ba)?.test_channel)
    }

    /// `R(D_B)` under `d_B`.
    pub fn needed_rate(&self) -> Result<f64> {
        rate_distortion(&self.query.source, &self.query.d_b, self.query.d_b_max, &self.ba)
    }
}

/// Best of `candidates`, skipping those whose ceiling cannot beat the
/// incumbent.
pub fn best_of(obj: &LossyObjective, candidates: &[Channel], incumbent: Option<(f64, Channel)>) -> Result<Option<(f64, Channel)>> {
    let mut best = incumbent;
    for ch in candidates {
        if let Some((b, _)) = &best {
            if obj.ceiling(ch)? <= *b {
                continue;
            }
        }
        if let Some(v) = obj.score(ch)?.value {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, ch.clone()));
            }
        }
    }
    Ok(best)
}

/// Channels one fine step apart from `center` in a single row, within one
/// coarse step of it.
pub fn refinement_candidates(center: &Channel, grid: &ChannelGrid, row: usize) -> Result<Vec<Channel>> {
    let ay = center.output_size();
    let fine = grid.step() / 10.0;
    let mut out = Vec::new();
    let mut offset = vec![-10i32; ay - 1];
    loop {
        let mut r: Vec<f64> = center.row(row).mass().to_vec();
        for (i, &o) in offset.iter().enumerate() {
            r[i] += o as f64 * fine;
        }
        let last: f64 = r[..ay - 1].iter().sum();
        r[ay - 1] = 1.0 - last;
        if offset.iter().any(|&o| o != 0) && r.iter().all(|&v| v >= -1e-12) {
            let r: Vec<f64> = r.iter().map(|v| v.max(0.0)).collect();
            let mut rows: Vec<Vec<f64>> = center.rows().iter().map(|d| d.mass().to_vec()).collect();
            rows[row] = r;
            if let Ok(ch) = Channel::from_rows(rows) {
                out.push(ch);
            }
        }
        let mut pos = 0;
        loop {
            if pos == ay - 1 {
                return Ok(out);
            }
            offset[pos] += 1;
            if offset[pos] <= 10 {
                break;
            }
            offset[pos] = -10;
            pos += 1;
        }
    }
}

/// Maximizes the eavesdropper value over `P_{Y|X}` on `grid`, seeded with the
/// `d_B` test channel at rate `R`, followed by the optional refinement pass.
pub fn lossy_max_eve_distortion(q: &LossyRegionQuery, grid: &ChannelGrid, ba: &BaOptions) -> Result<Boundary> {
    let obj = LossyObjective::new(q, ba)?;
    let channels = grid.channels(q.source.alphabet_size(), q.d_b.cols())?;
    let seed = best_of(&obj, &[obj.rate_distortion_witness()?], None)?;
    let best = best_of(&obj, &channels, seed)?;
    finish(&obj, grid, best)
}

/// Refinement and the infeasible fallback, shared with parallel callers that
/// score the coarse grid themselves.
pub fn finish(obj: &LossyObjective, grid: &ChannelGrid, best: Option<(f64, Channel)>) -> Result<Boundary> {
    let Some(mut best) = best else {
        return Ok(Boundary::Infeasible {
            needed_rate: obj.needed_rate()?,
        });
    };
    if grid.refine && best.0 < obj.list_distortion() {
        for row in 0..best.1.input_size() {
            let cands = refinement_candidates(&best.1, grid, row)?;
            if let Some(b) = best_of(obj, &cands, Some(best.clone()))? {
                best = b;
            }
        }
    }
    Ok(Boundary::Feasible {
        d_e_max: best.0,
        witness: Some(best.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    ListRate,
    KeyRate,
    BobDistortion,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionTemplate {
    Lossless(LosslessRegionQuery),
    Lossy(LossyRegionQuery, ChannelGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub boundary: Boundary,
}

impl RegionTemplate {
    /// The template with `var` set to `value`.
    pub fn at(&self, var: SweepVar, value: f64) -> Result<RegionTemplate> {
        let mut t = self.clone();
        match (&mut t, var) {
            (RegionTemplate::Lossless(q), SweepVar::ListRate) => q.list_rate = value,
            (RegionTemplate::Lossless(q), SweepVar::KeyRate) => q.key_rate = value,
            (RegionTemplate::Lossless(_), SweepVar::BobDistortion) => {
                return Err(Error::InvalidParameter("lossless queries have no D_B".into()))
            }
            (RegionTemplate::Lossy(q, _), SweepVar::ListRate) => q.list_rate = value,
            (RegionTemplate::Lossy(q, _), SweepVar::KeyRate) => q.key_rate = value,
            (RegionTemplate::Lossy(q, _), SweepVar::BobDistortion) => q.d_b_max = value,
        }
        Ok(t)
    }

    pub fn boundary(&self, ba: &BaOptions) -> Result<Boundary> {
        match self {
            RegionTemplate::Lossless(q) => Ok(Boundary::Feasible {
                d_e_max: lossless_max_eve_distortion(q, ba)?,
                witness: None,
            }),
            RegionTemplate::Lossy(q, grid) => lossy_max_eve_distortion(q, grid, ba),
        }
    }
}

/// One boundary point per grid value, ordered by value.
pub fn region_sweep(template: &RegionTemplate, var: SweepVar, grid: &[f64], ba: &BaOptions) -> Result<Vec<SweepPoint>> {
    let mut values = grid.to_vec();
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN in sweep grid".into()));
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values
        .into_iter()
        .map(|v| {
            Ok(SweepPoint {
                value: v,
                boundary: template.at(var, v)?.boundary(ba)?,
            })
        })
        .collect()
}
