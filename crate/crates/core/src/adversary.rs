//! Eavesdropper side: reconstruction lists, henchman codes, the exact
//! optimal attack at tiny scale, and the constructive attacks (point-to-point
//! rate-distortion code, key enumeration, type covering).

use alloc::vec;
use alloc::vec::Vec;

use crate::cipher::{CipherCode, CipherMode};
use crate::error::{Error, Result};
use crate::math::{ceil, index_count, log2};
use crate::prob::{distortion_unchecked, Distribution, DistortionMatrix, Sequence};
use crate::rd::{rd_point_at_rate, side_info_distortion_rate, BaOptions};
use crate::rng::{sample, stream, Purpose};
use crate::seq::{space_size, symbols_of};
use crate::types::{covering_codebook, type_count, CoverOptions, TypeIndex};

/// Per-message lists of reconstructions, each of size at most `capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionList {
    capacity: usize,
    lists: Vec<Vec<Sequence>>,
    shared: bool,
}

impl ReconstructionList {
    /// One list per message.
    pub fn per_message(lists: Vec<Vec<Sequence>>, capacity: usize) -> Result<Self> {
        if let Some(l) = lists.iter().find(|l| l.len() > capacity) {
            return Err(Error::InvalidParameter(alloc::format!(
                "list of {} entries exceeds capacity {capacity}",
                l.len()
            )));
        }
        Ok(Self {
            capacity,
            lists,
            shared: false,
        })
    }

    /// A single list used for every message.
    pub fn shared(list: Vec<Sequence>, capacity: usize) -> Result<Self> {
        let mut out = Self::per_message(vec![list], capacity)?;
        out.shared = true;
        Ok(out)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_shared(&self) -> bool {
        self.shared
    }

    pub fn list(&self, m: usize) -> &[Sequence] {
        if self.shared {
            &self.lists[0]
        } else {
            &self.lists[m]
        }
    }

    pub fn messages(&self) -> Option<usize> {
        (!self.shared).then_some(self.lists.len())
    }

    /// Closest listed sequence to `x` for message `m`: `(index, per-letter
    /// distortion)`, smallest index on ties. `None` for an empty list.
    pub fn nearest(&self, x: &[u8], m: usize, d: &DistortionMatrix) -> Option<(usize, f64)> {
        nearest_in(self.list(m), x, d)
    }
}

fn nearest_in(list: &[Sequence], x: &[u8], d: &DistortionMatrix) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, z) in list.iter().enumerate() {
        let v = distortion_unchecked(x, z.symbols(), d);
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((j, v));
        }
    }
    best
}

/// How a henchman code maps `(x^n, m)` to its index.
#[derive(Debug, Clone, PartialEq)]
pub enum HenchmanEncoder {
    /// Explicit table indexed by `x_index * messages + m`.
    Table {
        source_alphabet: usize,
        messages: usize,
        indices: Vec<usize>,
    },
    /// The index of the decoder output closest to `x^n` under `d`.
    Nearest(DistortionMatrix),
}

/// Helper code: encoder `(x^n, m) -> m_H` and decoder `(m, m_H) -> z^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HenchmanCode {
    index_count: usize,
    encoder: HenchmanEncoder,
    /// `decoder[m][m_H]`.
    decoder: Vec<Vec<Sequence>>,
}

impl HenchmanCode {
    pub fn new(index_count: usize, encoder: HenchmanEncoder, decoder: Vec<Vec<Sequence>>) -> Result<Self> {
        if decoder.iter().any(|row| row.is_empty() || row.len() > index_count) {
            return Err(Error::InvalidParameter(
                "every message needs between 1 and index_count decoder outputs".into(),
            ));
        }
        if let HenchmanEncoder::Table { indices, .. } = &encoder {
            if let Some(&j) = indices.iter().find(|&&j| j >= index_count) {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    bound: index_count,
                });
            }
        }
        Ok(Self {
            index_count,
            encoder,
            decoder,
        })
    }

    pub fn index_count(&self) -> usize {
        self.index_count
    }

    pub fn messages(&self) -> usize {
        self.decoder.len()
    }

    pub fn encoder(&self) -> &HenchmanEncoder {
        &self.encoder
    }

    pub fn encode(&self, x: &[u8], m: usize) -> usize {
        match &self.encoder {
            HenchmanEncoder::Table {
                source_alphabet,
                messages,
                indices,
            } => {
                let xi = crate::seq::index_of(x, *source_alphabet) as usize;
                indices[xi * messages + m]
            }
            HenchmanEncoder::Nearest(d) => nearest_in(&self.decoder[m], x, d).map_or(0, |(j, _)| j),
        }
    }

    /// `z^n(m, m_H)`; indices past the decoder row wrap to its last entry.
    pub fn decode(&self, m: usize, j: usize) -> &Sequence {
        let row = &self.decoder[m];
        &row[j.min(row.len() - 1)]
    }

    /// Per-letter distortion the code achieves on `(x^n, m)`.
    pub fn achieved_distortion(&self, x: &[u8], m: usize, d: &DistortionMatrix) -> f64 {
        distortion_unchecked(x, self.decode(m, self.encode(x, m)).symbols(), d)
    }
}

/// The henchman that sends the index of the closest list entry.
pub fn list_to_henchman(list: &ReconstructionList, messages: usize, d: &DistortionMatrix) -> Result<HenchmanCode> {
    let decoder = (0..messages)
        .map(|m| {
            let l = list.list(m);
            if l.is_empty() {
                Err(Error::InvalidParameter("empty reconstruction list".into()))
            } else {
                Ok(l.to_vec())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    HenchmanCode::new(list.capacity(), HenchmanEncoder::Nearest(d.clone()), decoder)
}

/// The list of all decoder outputs per message (duplicates removed, first
/// occurrence kept).
pub fn henchman_to_list(h: &HenchmanCode) -> ReconstructionList {
    let lists = h
        .decoder
        .iter()
        .map(|row| {
            let mut out: Vec<Sequence> = Vec::with_capacity(row.len());
            for z in row {
                if !out.contains(z) {
                    out.push(z.clone());
                }
            }
            out
        })
        .collect();
    ReconstructionList {
        capacity: h.index_count,
        lists,
        shared: false,
    }
}

/// Limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustiveLimits {
    /// Cap on enumerated candidates per message (subsets, or encoder x
    /// decoder pairs).
    pub per_message: f64,
    /// Cap on the exact joint table.
    pub table: u64,
}

impl Default for ExhaustiveLimits {
    fn default() -> Self {
        Self {
            per_message: 1e7,
            table: 1 << 20,
        }
    }
}

/// One message's attack problem: weights `P(x^n, m)` over source indices.
struct MessageProblem<'a> {
    weights: &'a [f64],
    n: usize,
    source_alphabet: usize,
    recon: usize,
    d: &'a DistortionMatrix,
}

impl MessageProblem<'_> {
    /// `fails[x][z] = 1{d(x, z) >= level}` as a bit per candidate.
    fn failure_matrix(&self, level: f64) -> Vec<Vec<bool>> {
        let zs = self.recon.pow(self.n as u32);
        (0..self.weights.len())
            .map(|xi| {
                let x = symbols_of(xi as u64, self.n, self.source_alphabet);
                (0..zs)
                    .map(|zi| {
                        let z = symbols_of(zi as u64, self.n, self.recon);
                        distortion_unchecked(&x, &z, self.d) >= level - 1e-12
                    })
                    .collect()
            })
            .collect()
    }

    /// Minimum failure mass over subsets of `Z^n` of size `min(size, |Z^n|)`.
    fn best_list(&self, size: usize, level: f64, limit: f64) -> Result<f64> {
        let fails = self.failure_matrix(level);
        let zs = self.recon.pow(self.n as u32);
        let k = size.min(zs);
        let count = binomial(zs, k);
        if count > limit {
            return Err(Error::ResourceGuard {
                what: "list subsets",
                requested: count,
                limit,
            });
        }
        let mut best = f64::INFINITY;
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let v: f64 = self
                .weights
                .iter()
                .enumerate()
                .filter(|(xi, w)| **w > 0.0 && subset.iter().all(|&z| fails[*xi][z]))
                .map(|(_, w)| *w)
                .sum();
            best = best.min(v);
            if !next_subset(&mut subset, zs) {
                break;
            }
        }
        Ok(best)
    }

    /// Minimum failure mass over every encoder `x -> j` and decoder
    /// `j -> z` with `j < size`.
    fn best_henchman(&self, size: usize, level: f64, limit: f64) -> Result<f64> {
        let fails = self.failure_matrix(level);
        let zs = self.recon.pow(self.n as u32);
        let xs = self.weights.len();
        let decoders = crate::math::powf(zs as f64, size as f64);
        let encoders = crate::math::powf(size as f64, xs as f64);
        if decoders * encoders > limit {
            return Err(Error::ResourceGuard {
                what: "henchman codes",
                requested: decoders * encoders,
                limit,
            });
        }
        let mut best = f64::INFINITY;
        let mut dec = vec![0usize; size];
        loop {
            let mut enc = vec![0usize; xs];
            loop {
                let v: f64 = (0..xs)
                    .filter(|&xi| fails[xi][dec[enc[xi]]])
                    .map(|xi| self.weights[xi])
                    .sum();
                best = best.min(v);
                if !odometer(&mut enc, size) {
                    break;
                }
            }
            if !odometer(&mut dec, zs) {
                break;
            }
        }
        Ok(best)
    }
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
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

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Which exhaustive search evaluates the attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackSearch {
    /// Best list of size `ceil(2^{n R_L})` per message.
    List,
    /// Best henchman encoder/decoder pair per message.
    Henchman,
}

/// Exact `min P[d(X^n, Z^n) >= D]` over attacks at list rate `rl`, under
/// the code's induced joint with i.i.d. `source`.
///
/// The minimization decomposes over messages since the attack sees `m`.
pub fn optimal_attack_value(
    code: &CipherCode,
    source: &Distribution,
    rl: f64,
    level: f64,
    d: &DistortionMatrix,
    search: AttackSearch,
    limits: &ExhaustiveLimits,
) -> Result<f64> {
    let joint = code.induced_joint(source, limits.table)?;
    let xs = joint.sources();
    let mm = code.messages();
    let sm = joint.source_message();
    let size = index_count(code.n(), rl) as usize;
    attack_value_from_weights(
        |m| (0..xs).map(|x| sm[x * mm + m]).collect(),
        mm,
        code.n(),
        code.source_alphabet(),
        size,
        level,
        d,
        search,
        limits,
    )
}

/// Same as [`optimal_attack_value`] but for several levels at once, from a
/// given `P(x^n, m)` table (row-major, `m` fastest).
#[allow(clippy::too_many_arguments)]
pub fn attack_values_from_table(
    source_message: &[f64],
    messages: usize,
    n: usize,
    source_alphabet: usize,
    list_size: usize,
    levels: &[f64],
    d: &DistortionMatrix,
    search: AttackSearch,
    limits: &ExhaustiveLimits,
) -> Result<Vec<f64>> {
    let xs = source_message.len() / messages;
    levels
        .iter()
        .map(|&level| {
            attack_value_from_weights(
                |m| (0..xs).map(|x| source_message[x * messages + m]).collect(),
                messages,
                n,
                source_alphabet,
                list_size,
                level,
                d,
                search,
                limits,
            )
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn attack_value_from_weights<F: Fn(usize) -> Vec<f64>>(
    weights: F,
    messages: usize,
    n: usize,
    source_alphabet: usize,
    size: usize,
    level: f64,
    d: &DistortionMatrix,
    search: AttackSearch,
    limits: &ExhaustiveLimits,
) -> Result<f64> {
    if d.rows() != source_alphabet {
        return Err(Error::AlphabetMismatch {
            expected: source_alphabet,
            found: d.rows(),
        });
    }
    if level <= 0.0 {
        // Distortion is never negative.
        return Ok(1.0);
    }
    space_size(d.cols(), n, 1 << 16)?;
    let mut total = 0.0;
    for m in 0..messages {
        let w = weights(m);
        let prob = MessageProblem {
            weights: &w,
            n,
            source_alphabet,
            recon: d.cols(),
            d,
        };
        total += match search {
            AttackSearch::List => prob.best_list(size, level, limits.per_message)?,
            AttackSearch::Henchman => prob.best_henchman(size, level, limits.per_message)?,
        };
    }
    Ok(total)
}

/// Controls for [`p2p_attack`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2pOptions {
    /// Descent passes over a seeded training sample; 0 keeps the raw
    /// random codebook.
    pub refine_passes: usize,
    /// Training sequences per list entry.
    pub training_per_entry: usize,
    /// Independent random starts; the one with the lowest training
    /// distortion is kept.
    pub restarts: usize,
    pub ba: BaOptions,
}

impl Default for P2pOptions {
    fn default() -> Self {
        Self {
            refine_passes: 20,
            training_per_entry: 300,
            restarts: 4,
            ba: BaOptions::default(),
        }
    }
}

/// A message-independent list from a point-to-point rate-distortion code of
/// size `ceil(2^{n R_L})`.
///
/// Entries are drawn i.i.d. from the output marginal of the
/// `D(R_L)`-optimal test channel, then optionally polished by coordinate
/// descent on the empirical distortion of a seeded training sample.
pub fn p2p_attack(
    source: &Distribution,
    d: &DistortionMatrix,
    rl: f64,
    n: usize,
    seed: u64,
    opts: &P2pOptions,
) -> Result<ReconstructionList> {
    if source.alphabet_size() != d.rows() {
        return Err(Error::AlphabetMismatch {
            expected: d.rows(),
            found: source.alphabet_size(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be positive".into()));
    }
    let size = index_count(n, rl);
    let (best_z, _) = d.best_constant(source);
    if size <= 1.0 {
        let list = vec![Sequence::from_symbols(vec![best_z as u8; n])];
        return ReconstructionList::shared(list, 1);
    }
    // Enough room for every reconstruction sequence: list them all.
    if let Ok(all) = space_size(d.cols(), n, 1 << 20) {
        if all as f64 <= size {
            let list = (0..all).map(|i| Sequence::from_symbols(symbols_of(i, n, d.cols()))).collect();
            return ReconstructionList::shared(list, size as usize);
        }
    }
    let size = size as usize;
    let point = rd_point_at_rate(source, d, rl, &opts.ba)?;
    let q = point.output_marginal(source)?;
    let draw = |restart: u64| -> Vec<Vec<u8>> {
        let mut rng = stream(Purpose::Attack, seed, 2 * restart);
        (0..size)
            .map(|_| (0..n).map(|_| sample(&q, &mut rng) as u8).collect())
            .collect()
    };
    let mut list = draw(0);
    if opts.refine_passes > 0 {
        let mut trng = stream(Purpose::Attack, seed, 1);
        let training: Vec<Vec<u8>> = (0..size * opts.training_per_entry)
            .map(|_| (0..n).map(|_| sample(source, &mut trng) as u8).collect())
            .collect();
        let mut best = f64::INFINITY;
        for restart in 0..opts.restarts.max(1) as u64 {
            let mut cand = draw(restart);
            let v = refine(&mut cand, &training, d, opts.refine_passes);
            if v < best {
                best = v;
                list = cand;
            }
        }
    }
    ReconstructionList::shared(list.into_iter().map(Sequence::from_symbols).collect(), size)
}

/// Coordinate descent on the mean nearest-entry distortion over
/// `training`: repeatedly applies any single-symbol change to an entry that
/// lowers it, until a full pass finds none or `passes` run out.
fn refine(list: &mut [Vec<u8>], training: &[Vec<u8>], d: &DistortionMatrix, passes: usize) -> f64 {
    let n = list[0].len();
    let l = list.len();
    // dist[t * l + j] = total distortion between training t and entry j.
    let mut dist: Vec<f64> = training
        .iter()
        .flat_map(|x| list.iter().map(move |z| distortion_unchecked(x, z, d) * n as f64))
        .collect();
    let nearest_excluding = |dist: &[f64], t: usize, j: usize| -> f64 {
        (0..l)
            .filter(|&i| i != j)
            .map(|i| dist[t * l + i])
            .fold(f64::INFINITY, f64::min)
    };
    for _ in 0..passes {
        let mut improved = false;
        for j in 0..l {
            let others: Vec<f64> = (0..training.len()).map(|t| nearest_excluding(&dist, t, j)).collect();
            for i in 0..n {
                let old = list[j][i] as usize;
                let current: f64 = (0..training.len()).map(|t| others[t].min(dist[t * l + j])).sum();
                let mut best = (old, current);
                for c in (0..d.cols()).filter(|&c| c != old) {
                    let total: f64 = training
                        .iter()
                        .enumerate()
                        .map(|(t, x)| {
                            let a = x[i] as usize;
                            let v = dist[t * l + j] - d.get(a, old) + d.get(a, c);
                            others[t].min(v)
                        })
                        .sum();
                    if total < best.1 - 1e-9 {
                        best = (c, total);
                    }
                }
                if best.0 != old {
                    for (t, x) in training.iter().enumerate() {
                        let a = x[i] as usize;
                        dist[t * l + j] += d.get(a, best.0) - d.get(a, old);
                    }
                    list[j][i] = best.0 as u8;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (0..training.len())
        .map(|t| (0..l).map(|j| dist[t * l + j]).fold(f64::INFINITY, f64::min))
        .sum()
}

/// The key-enumeration list `{x^n(m, k)}_k`: with `R_L >= R_0` a henchman
/// who knows the key names the correct decryption.
pub fn key_enumeration_attack(code: &CipherCode, rl: f64) -> Result<ReconstructionList> {
    let capacity = index_count(code.n(), rl) as usize;
    if capacity < code.keys() {
        return Err(Error::InvalidParameter(alloc::format!(
            "list capacity {capacity} is below the {} keys",
            code.keys()
        )));
    }
    let lists = (0..code.messages())
        .map(|m| (0..code.keys()).map(|k| code.decode(m, k)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    ReconstructionList::per_message(lists, capacity)
}

/// The henchman index the key-enumeration attack sends: the key itself.
pub fn key_enumeration_index(code: &CipherCode, k: usize) -> Result<usize> {
    if matches!(code.mode(), CipherMode::Lossy { .. }) {
        return Err(Error::InvalidParameter("key enumeration targets lossless codes".into()));
    }
    if k >= code.keys() {
        return Err(Error::IndexOutOfRange {
            index: k,
            bound: code.keys(),
        });
    }
    Ok(k)
}

/// Outcome of one type-covering description.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeCoverOutcome {
    pub z: Sequence,
    pub distortion: f64,
    /// `D(r, T_{x^n y^n})`.
    pub reference: f64,
    pub tau: f64,
    /// Bits naming the joint type: `ceil(log2 #joint types)`.
    pub type_bits: f64,
    /// Bits naming the codeword: `ceil(log2 |codebook|)`.
    pub index_bits: f64,
    pub slack_bits: f64,
    /// The covering codebook reached every member of the shell.
    pub covers: bool,
}

impl TypeCoverOutcome {
    pub fn description_bits(&self) -> f64 {
        self.type_bits + self.index_bits
    }

    /// `n r + |X||Y| log2(n + 1) + slack`.
    pub fn description_bound(&self, n: usize, r: f64, ax: usize, ay: usize) -> f64 {
        n as f64 * r + (ax * ay) as f64 * log2((n + 1) as f64) + self.slack_bits
    }

    pub fn within_guarantee(&self) -> bool {
        self.distortion <= self.reference + self.tau + 1e-9
    }
}

/// Describes `x^n` given side information `y^n` at rate `r`: first the
/// joint type, then the index of the nearest entry of the covering codebook
/// for that type's shell.
pub fn typecover_attack(
    x: &Sequence,
    y: &Sequence,
    side_alphabet: usize,
    r: f64,
    d: &DistortionMatrix,
    tau: f64,
    opts: &CoverOptions,
) -> Result<TypeCoverOutcome> {
    let jt = TypeIndex::of_pair(x, y, d.rows(), side_alphabet)?;
    let cb = covering_codebook(y, &jt, r, tau, d, opts)?;
    let reference = side_info_distortion_rate(&jt.to_joint()?, d, r, &opts.ba)?;
    let (j, distortion) = cb
        .nearest(x, d)
        .ok_or_else(|| Error::InconsistentType("x^n is outside its own type shell".into()))?;
    let types = type_count(x.len(), d.rows() * side_alphabet);
    Ok(TypeCoverOutcome {
        z: cb.entries[j].clone(),
        distortion,
        reference,
        tau,
        type_bits: if types <= 1.0 { 0.0 } else { ceil(log2(types)) },
        index_bits: cb.index_bits(),
        slack_bits: cb.slack_bits,
        covers: cb.covers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{Codebook, DEFAULT_TABLE_LIMIT};
    use crate::prob::Channel;
    use crate::rd::distortion_rate;
    use crate::rng::sample;
    use rand::Rng;

    fn seq(v: &[u8]) -> Sequence {
        Sequence::from_symbols(v.to_vec())
    }

    fn ham() -> DistortionMatrix {
        DistortionMatrix::hamming(2).unwrap()
    }

    fn random_seq<R: Rng>(n: usize, rng: &mut R) -> Sequence {
        Sequence::from_symbols((0..n).map(|_| rng.gen_range(0..2u8)).collect())
    }

    #[test]
    fn singleton_lists_give_constant_henchman() {
        let l = ReconstructionList::per_message(vec![vec![seq(&[0, 1, 1])], vec![seq(&[1, 1, 1])]], 4).unwrap();
        let h = list_to_henchman(&l, 2, &ham()).unwrap();
        for xi in 0..8 {
            let x = symbols_of(xi, 3, 2);
            assert_eq!(h.decode(0, h.encode(&x, 0)), &seq(&[0, 1, 1]));
            assert_eq!(h.decode(1, h.encode(&x, 1)), &seq(&[1, 1, 1]));
        }
    }

    #[test]
    fn list_containing_x_gives_zero_distortion() {
        let x = seq(&[1, 0, 1, 1]);
        let l = ReconstructionList::shared(vec![seq(&[0, 0, 0, 0]), x.clone()], 2).unwrap();
        let h = list_to_henchman(&l, 3, &ham()).unwrap();
        assert_eq!(h.achieved_distortion(x.symbols(), 2, &ham()), 0.0);
        let back = henchman_to_list(&h);
        assert_eq!(back.nearest(x.symbols(), 2, &ham()).unwrap().1, 0.0);
    }

    #[test]
    fn henchman_from_list_achieves_the_list_minimum() {
        let mut rng = stream(Purpose::Trial, 3, 0);
        for _ in 0..50 {
            let lists: Vec<Vec<Sequence>> = (0..3)
                .map(|_| (0..4).map(|_| random_seq(6, &mut rng)).collect())
                .collect();
            let l = ReconstructionList::per_message(lists, 4).unwrap();
            let h = list_to_henchman(&l, 3, &ham()).unwrap();
            for _ in 0..10 {
                let x = random_seq(6, &mut rng);
                let m = rng.gen_range(0..3);
                let direct = l
                    .list(m)
                    .iter()
                    .map(|z| distortion_unchecked(x.symbols(), z.symbols(), &ham()))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(h.achieved_distortion(x.symbols(), m, &ham()), direct);
            }
        }
    }

    #[test]
    fn list_from_henchman_never_does_worse() {
        let mut rng = stream(Purpose::Trial, 4, 0);
        for _ in 0..50 {
            let decoder: Vec<Vec<Sequence>> = (0..2)
                .map(|_| (0..4).map(|_| random_seq(4, &mut rng)).collect())
                .collect();
            let indices = (0..16 * 2).map(|_| rng.gen_range(0..4)).collect();
            let h = HenchmanCode::new(
                4,
                HenchmanEncoder::Table {
                    source_alphabet: 2,
                    messages: 2,
                    indices,
                },
                decoder,
            )
            .unwrap();
            let l = henchman_to_list(&h);
            let back = list_to_henchman(&l, 2, &ham()).unwrap();
            for xi in 0..16 {
                let x = symbols_of(xi, 4, 2);
                for m in 0..2 {
                    let direct = h.achieved_distortion(&x, m, &ham());
                    assert!(l.nearest(&x, m, &ham()).unwrap().1 <= direct);
                    assert!(back.achieved_distortion(&x, m, &ham()) <= direct);
                }
            }
        }
    }

    #[test]
    fn zero_level_always_fails() {
        let src = Distribution::bernoulli(0.5).unwrap();
        let code = CipherCode::lossless(Codebook::build(1, 2, 1.0, 0.5, &src).unwrap());
        let v = optimal_attack_value(&code, &src, 0.5, 0.0, &ham(), AttackSearch::List, &Default::default()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn key_enumeration_rate_recovers_the_source() {
        // One-time pad: x(m, k) = m xor k, so decoding is always correct.
        let src = Distribution::bernoulli(0.5).unwrap();
        let entries: Vec<Sequence> = (0..4u64)
            .flat_map(|m| (0..4u64).map(move |k| Sequence::from_symbols(symbols_of(m ^ k, 2, 2))))
            .collect();
        let code = CipherCode::lossless(Codebook::from_entries(4, 4, &entries, &src).unwrap());
        for search in [AttackSearch::List, AttackSearch::Henchman] {
            let v = optimal_attack_value(&code, &src, 1.0, 0.25, &ham(), search, &Default::default()).unwrap();
            assert!(v.abs() < 1e-15, "{search:?}: {v}");
        }
        // Without key rate a single guess matches x^n a quarter of the time.
        let v = optimal_attack_value(&code, &src, 0.0, 0.5, &ham(), AttackSearch::List, &Default::default())
            .unwrap();
        assert!((v - 0.75).abs() < 1e-12, "{v}");
    }

    #[test]
    fn list_and_henchman_optima_agree_on_random_codes() {
        let src = Distribution::bernoulli(0.3).unwrap();
        for seed in 0..20 {
            let code = CipherCode::lossless(Codebook::build(seed, 2, 1.0, 0.5, &src).unwrap());
            for &level in &[0.25, 0.5, 0.75, 1.0] {
                let a = optimal_attack_value(&code, &src, 0.5, level, &ham(), AttackSearch::List, &Default::default())
                    .unwrap();
                let b =
                    optimal_attack_value(&code, &src, 0.5, level, &ham(), AttackSearch::Henchman, &Default::default())
                        .unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn attack_value_is_monotone() {
        let src = Distribution::bernoulli(0.5).unwrap();
        let code = CipherCode::lossless(Codebook::build(2, 3, 1.0, 0.67, &src).unwrap());
        let lim = ExhaustiveLimits::default();
        // A larger level is an easier target.
        let mut prev = 1.0;
        for &level in &[1.0 / 3.0, 2.0 / 3.0, 1.0] {
            let v = optimal_attack_value(&code, &src, 0.34, level, &ham(), AttackSearch::List, &lim).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        let a = optimal_attack_value(&code, &src, 0.0, 2.0 / 3.0, &ham(), AttackSearch::List, &lim).unwrap();
        let b = optimal_attack_value(&code, &src, 0.34, 2.0 / 3.0, &ham(), AttackSearch::List, &lim).unwrap();
        assert!(b <= a + 1e-15);
    }

    #[test]
    fn zero_rate_p2p_is_the_best_constant() {
        let src = Distribution::bernoulli(0.3).unwrap();
        let l = p2p_attack(&src, &ham(), 0.0, 5, 1, &Default::default()).unwrap();
        assert_eq!(l.list(0), &[seq(&[0, 0, 0, 0, 0])]);
        assert!(l.is_shared());
    }

    #[test]
    fn full_rate_p2p_lists_everything() {
        let src = Distribution::bernoulli(0.5).unwrap();
        let l = p2p_attack(&src, &ham(), 1.0, 4, 1, &Default::default()).unwrap();
        for xi in 0..16 {
            assert_eq!(l.nearest(&symbols_of(xi, 4, 2), 0, &ham()).unwrap().1, 0.0);
        }
    }

    #[test]
    fn p2p_tracks_the_distortion_rate_function() {
        let src = Distribution::bernoulli(0.5).unwrap();
        let reference = distortion_rate(&src, &ham(), 0.3, &BaOptions::default()).unwrap();
        let l = p2p_attack(&src, &ham(), 0.3, 12, 17, &Default::default()).unwrap();
        let mut rng = stream(Purpose::Source, 17, 0);
        let trials = 200;
        let mean: f64 = (0..trials)
            .map(|_| {
                let x: Vec<u8> = (0..12).map(|_| sample(&src, &mut rng) as u8).collect();
                l.nearest(&x, 0, &ham()).unwrap().1
            })
            .sum::<f64>()
            / trials as f64;
        assert!((mean - reference).abs() <= 0.06, "{mean} vs {reference}");
    }

    #[test]
    fn typecover_with_perfect_side_information() {
        let x = seq(&[0, 1, 1, 0, 1, 0, 0, 0]);
        let out = typecover_attack(&x, &x, 2, 0.0, &ham(), 0.05, &CoverOptions::default()).unwrap();
        assert_eq!(out.z, x);
        assert_eq!(out.distortion, 0.0);
        assert_eq!(out.index_bits, 0.0);
    }

    #[test]
    fn typecover_description_respects_the_bound() {
        let mut rng = stream(Purpose::Trial, 9, 0);
        let bsc = Channel::binary_symmetric(0.2).unwrap();
        for _ in 0..5 {
            let x = random_seq(10, &mut rng);
            let y = Sequence::from_symbols(
                x.symbols().iter().map(|&a| sample(bsc.row(a as usize), &mut rng) as u8).collect(),
            );
            let out = typecover_attack(&x, &y, 2, 0.5, &ham(), 0.05, &CoverOptions::default()).unwrap();
            assert!(out.description_bits() <= out.description_bound(10, 0.5, 2, 2) + 1e-9);
            if out.covers {
                assert!(out.within_guarantee());
            }
        }
    }

    #[test]
    fn key_enumeration_list_has_every_decryption() {
        let src = Distribution::bernoulli(0.4).unwrap();
        let code = CipherCode::lossless(Codebook::build(5, 6, 0.9, 0.5, &src).unwrap());
        let l = key_enumeration_attack(&code, 0.5).unwrap();
        let p = code.induced_joint(&src, DEFAULT_TABLE_LIMIT).unwrap();
        assert!(key_enumeration_attack(&code, 0.3).is_err());
        for k in 0..code.keys() {
            for m in 0..code.messages() {
                let j = key_enumeration_index(&code, k).unwrap();
                assert_eq!(&l.list(m)[j], &code.decode(m, k).unwrap());
            }
        }
        assert!(p.total() > 0.99);
    }
}
