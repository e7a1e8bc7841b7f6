//! Method-of-types utilities: type enumeration, type classes, conditional
//! shells and a greedy type-covering codebook.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, ceil, log2, round};
use crate::prob::{Channel, Distribution, DistortionMatrix, JointDistribution, Sequence};
use crate::rd::{side_info_point_at_rate, BaOptions};

/// Default cap on the number of types an enumeration may produce.
pub const DEFAULT_TYPE_LIMIT: u64 = 1 << 22;

/// An `n`-type over a product alphabet, stored as a count array.
///
/// `dims` is `[|X|]` for a single type and `[|X|, |Y|]` for a joint type
/// (row-major, `y` fastest).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeIndex {
    n: usize,
    dims: Vec<usize>,
    counts: Vec<usize>,
}

impl TypeIndex {
    pub fn new(n: usize, dims: Vec<usize>, counts: Vec<usize>) -> Result<Self> {
        let cells: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || cells != counts.len() {
            return Err(Error::InconsistentType(format!(
                "{} counts for dimensions {:?}",
                counts.len(),
                dims
            )));
        }
        if counts.iter().sum::<usize>() != n {
            return Err(Error::InconsistentType(format!("counts do not sum to n = {n}")));
        }
        Ok(Self { n, dims, counts })
    }

    /// Type of a single sequence.
    pub fn of(x: &Sequence, alphabet: usize) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut counts = vec![0; alphabet];
        for &s in x.symbols() {
            let s = s as usize;
            if s >= alphabet {
                return Err(Error::SymbolOutOfRange { symbol: s, alphabet });
            }
            counts[s] += 1;
        }
        Self::new(x.len(), vec![alphabet], counts)
    }

    /// Joint type of a sequence pair.
    pub fn of_pair(x: &Sequence, y: &Sequence, ax: usize, ay: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut counts = vec![0; ax * ay];
        for (&a, &b) in x.symbols().iter().zip(y.symbols()) {
            let (a, b) = (a as usize, b as usize);
            if a >= ax {
                return Err(Error::SymbolOutOfRange { symbol: a, alphabet: ax });
            }
            if b >= ay {
                return Err(Error::SymbolOutOfRange { symbol: b, alphabet: ay });
            }
            counts[a * ay + b] += 1;
        }
        Self::new(x.len(), vec![ax, ay], counts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn is_joint(&self) -> bool {
        self.dims.len() == 2
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::from_weights(&self.frequencies()).expect("counts sum to n")
    }

    /// The joint type as a joint distribution (rows `X`, columns `Y`).
    pub fn to_joint(&self) -> Result<JointDistribution> {
        if !self.is_joint() {
            return Err(Error::InconsistentType("not a joint type".into()));
        }
        JointDistribution::from_weights(self.dims[0], self.dims[1], &self.frequencies())
    }

    fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// Column (`Y`) counts of a joint type.
    pub fn col_counts(&self) -> Result<Vec<usize>> {
        if !self.is_joint() {
            return Err(Error::InconsistentType("not a joint type".into()));
        }
        let (ax, ay) = (self.dims[0], self.dims[1]);
        Ok((0..ay).map(|y| (0..ax).map(|x| self.counts[x * ay + y]).sum()).collect())
    }

    /// Row (`X`) counts of a joint type.
    pub fn row_counts(&self) -> Result<Vec<usize>> {
        if !self.is_joint() {
            return Err(Error::InconsistentType("not a joint type".into()));
        }
        let ay = self.dims[1];
        Ok(self.counts.chunks(ay).map(|r| r.iter().sum()).collect())
    }

    /// Size of the type class: the multinomial coefficient `n! / prod c!`.
    pub fn class_size(&self) -> f64 {
        multinomial(&self.counts)
    }

    /// A sequence (pair) realizing this type, symbols in increasing order.
    pub fn realize(&self) -> (Sequence, Option<Sequence>) {
        let mut xs = Vec::with_capacity(self.n);
        let mut ys = Vec::with_capacity(self.n);
        let inner = if self.is_joint() { self.dims[1] } else { 1 };
        for (cell, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                xs.push((cell / inner) as u8);
                ys.push((cell % inner) as u8);
            }
        }
        let y = self.is_joint().then(|| Sequence::from_symbols(ys));
        (Sequence::from_symbols(xs), y)
    }
}

/// `n! / prod c_i!` as a float.
pub fn multinomial(counts: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut out = 1.0;
    for &c in counts {
        for i in 1..=c {
            total += 1;
            out *= total as f64 / i as f64;
        }
    }
    out
}

/// Number of weak compositions of `n` into `cells` parts.
pub fn type_count(n: usize, cells: usize) -> f64 {
    if cells == 0 {
        return 0.0;
    }
    // C(n + cells - 1, cells - 1)
    let mut out = 1.0;
    for i in 1..cells {
        out *= (n + i) as f64 / i as f64;
    }
    round(out)
}

fn compositions(n: usize, cells: usize, limit: u64) -> Result<Vec<Vec<usize>>> {
    let count = type_count(n, cells);
    if count > limit as f64 {
        return Err(Error::ResourceGuard {
            what: "type enumeration",
            requested: count,
            limit: limit as f64,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut cur = vec![0; cells];
    fn walk(pos: usize, left: usize, cur: &mut [usize], out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.to_vec());
            return;
        }
        for c in (0..=left).rev() {
            cur[pos] = c;
            walk(pos + 1, left - c, cur, out);
        }
    }
    walk(0, n, &mut cur, &mut out);
    Ok(out)
}

/// All `n`-types over an alphabet of size `k`.
pub fn enumerate_types(n: usize, k: usize, limit: u64) -> Result<Vec<TypeIndex>> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("n and the alphabet must be positive".into()));
    }
    Ok(compositions(n, k, limit)?
        .into_iter()
        .map(|counts| TypeIndex {
            n,
            dims: vec![k],
            counts,
        })
        .collect())
}

/// All joint `n`-types over `X x Y`, duplicate-free, in a fixed order.
pub fn enumerate_joint_types(n: usize, ax: usize, ay: usize, limit: u64) -> Result<Vec<TypeIndex>> {
    if n == 0 || ax == 0 || ay == 0 {
        return Err(Error::InvalidParameter("n and the alphabets must be positive".into()));
    }
    Ok(compositions(n, ax * ay, limit)?
        .into_iter()
        .map(|counts| TypeIndex {
            n,
            dims: vec![ax, ay],
            counts,
        })
        .collect())
}

/// Position of `t` in the [`enumerate_types`] / [`enumerate_joint_types`]
/// order, computed without enumerating.
pub fn type_rank(t: &TypeIndex) -> u64 {
    let cells = t.counts.len();
    let mut rank = 0f64;
    let mut left = t.n;
    for (pos, &c) in t.counts.iter().enumerate().take(cells - 1) {
        // Larger counts come first at each position.
        for bigger in (c + 1)..=left {
            rank += type_count(left - bigger, cells - pos - 1);
        }
        left -= c;
    }
    rank as u64
}

/// The set of sequences `x^n` whose joint type with a fixed conditioning
/// sequence `c^n` is prescribed.
///
/// `counts[s][a]` is how many of the positions where `c` equals `s` carry
/// the symbol `a`. Enumeration is lazy.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    cond: Sequence,
    alphabet: usize,
    counts: Vec<Vec<usize>>,
    positions: Vec<Vec<usize>>,
}

impl Shell {
    pub fn new(cond: &Sequence, alphabet: usize, counts: Vec<Vec<usize>>) -> Result<Self> {
        let mut positions: Vec<Vec<usize>> = vec![Vec::new(); counts.len()];
        for (i, &s) in cond.symbols().iter().enumerate() {
            let s = s as usize;
            if s >= counts.len() {
                return Err(Error::SymbolOutOfRange {
                    symbol: s,
                    alphabet: counts.len(),
                });
            }
            positions[s].push(i);
        }
        for (s, row) in counts.iter().enumerate() {
            if row.len() != alphabet {
                return Err(Error::AlphabetMismatch {
                    expected: alphabet,
                    found: row.len(),
                });
            }
            if row.iter().sum::<usize>() != positions[s].len() {
                return Err(Error::InconsistentType(format!(
                    "conditional counts for symbol {s} do not match its {} occurrences",
                    positions[s].len()
                )));
            }
        }
        Ok(Self {
            cond: cond.clone(),
            alphabet,
            counts,
            positions,
        })
    }

    /// The conditional shell of a joint type `(X, Y)` given `y^n`.
    /// Returns `None` when the type's `Y` marginal differs from that of `y`.
    pub fn of_joint_type(y: &Sequence, jt: &TypeIndex) -> Result<Option<Self>> {
        let ay = jt.dims().get(1).copied().ok_or_else(|| {
            Error::InconsistentType("not a joint type".into())
        })?;
        let ax = jt.dims()[0];
        if jt.n() != y.len() {
            return Ok(None);
        }
        let mut occ = vec![0usize; ay];
        for &s in y.symbols() {
            if s as usize >= ay {
                return Err(Error::SymbolOutOfRange {
                    symbol: s as usize,
                    alphabet: ay,
                });
            }
            occ[s as usize] += 1;
        }
        if occ != jt.col_counts()? {
            return Ok(None);
        }
        let counts = (0..ay)
            .map(|b| (0..ax).map(|a| jt.counts()[a * ay + b]).collect())
            .collect();
        Self::new(y, ax, counts).map(Some)
    }

    pub fn conditioning(&self) -> &Sequence {
        &self.cond
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Product over conditioning symbols of multinomial coefficients.
    pub fn size(&self) -> f64 {
        self.counts.iter().map(|row| multinomial(row)).product()
    }

    pub fn iter(&self) -> ShellIter<'_> {
        ShellIter::new(self)
    }
}

/// `T_V(z^n)`: all `x^n` with conditional type `V` given `z^n`.
///
/// `v` maps the symbols of `z` to the alphabet of the shell; `n_z V(x|z)`
/// must be an integer for every pair.
pub fn v_shell(z: &Sequence, v: &Channel) -> Result<Shell> {
    let mut occ = vec![0usize; v.input_size()];
    for &s in z.symbols() {
        if s as usize >= v.input_size() {
            return Err(Error::SymbolOutOfRange {
                symbol: s as usize,
                alphabet: v.input_size(),
            });
        }
        occ[s as usize] += 1;
    }
    let mut counts = Vec::with_capacity(v.input_size());
    for (s, &n_s) in occ.iter().enumerate() {
        let mut row = Vec::with_capacity(v.output_size());
        for a in 0..v.output_size() {
            let exact = n_s as f64 * v.prob(s, a);
            let c = round(exact);
            if abs(exact - c) > 1e-9 {
                return Err(Error::InconsistentType(format!(
                    "V({a}|{s}) = {} is not a multiple of 1/{n_s}",
                    v.prob(s, a)
                )));
            }
            row.push(c as usize);
        }
        counts.push(row);
    }
    Shell::new(z, v.output_size(), counts)
}

/// Lazy enumeration of a [`Shell`]: an odometer over per-symbol multiset
/// permutations, each advanced in lexicographic order.
#[derive(Debug, Clone)]
pub struct ShellIter<'a> {
    shell: &'a Shell,
    blocks: Vec<Vec<u8>>,
    done: bool,
}

impl<'a> ShellIter<'a> {
    fn new(shell: &'a Shell) -> Self {
        let blocks = shell
            .counts
            .iter()
            .map(|row| {
                let mut b = Vec::new();
                for (a, &c) in row.iter().enumerate() {
                    b.extend(core::iter::repeat_n(a as u8, c));
                }
                b
            })
            .collect();
        Self {
            shell,
            blocks,
            done: false,
        }
    }

    fn current(&self) -> Sequence {
        let mut out = vec![0u8; self.shell.cond.len()];
        for (block, pos) in self.blocks.iter().zip(&self.shell.positions) {
            for (&sym, &i) in block.iter().zip(pos) {
                out[i] = sym;
            }
        }
        Sequence::from_symbols(out)
    }
}

fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl Iterator for ShellIter<'_> {
    type Item = Sequence;

    fn next(&mut self) -> Option<Sequence> {
        if self.done {
            return None;
        }
        let out = self.current();
        // Advance the odometer; a block that wraps resets to its first
        // permutation and carries into the next.
        self.done = true;
        for block in self.blocks.iter_mut() {
            if next_permutation(block) {
                self.done = false;
                break;
            }
        }
        Some(out)
    }
}

/// Controls for [`covering_codebook`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverOptions {
    /// Extra rate, in bits per symbol, the greedy construction may spend
    /// above `r` before giving up.
    pub max_slack: f64,
    /// Upper bound on the shell size the construction will materialize.
    pub shell_limit: f64,
    pub ba: BaOptions,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self {
            max_slack: 1.0,
            shell_limit: (1u64 << 20) as f64,
            ba: BaOptions::default(),
        }
    }
}

/// A codebook covering one conditional type shell.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringCodebook {
    pub conditioning: Sequence,
    pub joint_type: TypeIndex,
    pub rate: f64,
    /// Per-letter distortion every covered shell member is within.
    pub target: f64,
    pub entries: Vec<Sequence>,
    /// `ceil(log2 |entries|) - n r`, floored at zero.
    pub slack_bits: f64,
    /// Every shell member is within `target` of some entry.
    pub covers: bool,
}

impl CoveringCodebook {
    /// Index bits needed to name an entry.
    pub fn index_bits(&self) -> f64 {
        if self.entries.len() <= 1 {
            0.0
        } else {
            ceil(log2(self.entries.len() as f64))
        }
    }

    /// Closest entry to `x` (smallest index on ties) with its distortion.
    pub fn nearest(&self, x: &Sequence, d: &DistortionMatrix) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, z) in self.entries.iter().enumerate() {
            let v = crate::prob::distortion_unchecked(x.symbols(), z.symbols(), d);
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
        best
    }
}

/// Greedy set-cover codebook for the shell `{x^n : T(x^n, y^n) = jt}`.
///
/// Candidates are reconstruction sequences over the support of the
/// `D(r, jt)`-optimal test channels; each covers the shell members within
/// per-letter distortion `D(r, jt) + tau`. Entries are added, most newly
/// covered members first, until the shell is covered or the budget
/// `ceil(2^{n (r + max_slack)})` is used up.
pub fn covering_codebook(
    y: &Sequence,
    jt: &TypeIndex,
    r: f64,
    tau: f64,
    d: &DistortionMatrix,
    opts: &CoverOptions,
) -> Result<CoveringCodebook> {
    if r < 0.0 || tau < 0.0 {
        return Err(Error::InvalidParameter("r and tau must be >= 0".into()));
    }
    if !jt.is_joint() || jt.dims()[0] != d.rows() {
        return Err(Error::AlphabetMismatch {
            expected: d.rows(),
            found: jt.dims()[0],
        });
    }
    let n = y.len();
    let base = || CoveringCodebook {
        conditioning: y.clone(),
        joint_type: jt.clone(),
        rate: r,
        target: 0.0,
        entries: Vec::new(),
        slack_bits: 0.0,
        covers: true,
    };
    let Some(shell) = Shell::of_joint_type(y, jt)? else {
        return Ok(base());
    };
    let point = side_info_point_at_rate(&jt.to_joint()?, d, r, &opts.ba)?;
    let target = point.distortion + tau;
    // Reconstruction symbols the optimal channels use for each y.
    let mut allowed = vec![vec![false; d.cols()]; jt.dims()[1]];
    for (b, ch) in point.per_y_channels.iter().enumerate() {
        for row in ch.rows() {
            for z in row.support() {
                allowed[b][z] = true;
            }
        }
        // Keep each source symbol's zero-distortion reconstructions available.
        for a in 0..d.rows() {
            for z in 0..d.cols() {
                if d.get(a, z) == 0.0 {
                    allowed[b][z] = true;
                }
            }
        }
    }
    let size = shell.size();
    if size > opts.shell_limit {
        return Err(Error::ResourceGuard {
            what: "covering shell",
            requested: size,
            limit: opts.shell_limit,
        });
    }
    let members: Vec<Sequence> = shell.iter().collect();
    let budget_total = n as f64 * target + 1e-9;

    // Map every reachable candidate to the members it covers.
    let mut cover: BTreeMap<Vec<u8>, Vec<u32>> = BTreeMap::new();
    let mut cur = vec![0u8; n];
    for (mi, x) in members.iter().enumerate() {
        ball(x.symbols(), y.symbols(), d, &allowed, budget_total, 0, 0.0, &mut cur, &mut |z| {
            cover.entry(z.to_vec()).or_default().push(mi as u32);
        });
    }
    let candidates: Vec<(Vec<u8>, Vec<u32>)> = cover.into_iter().collect();

    let budget = crate::math::index_count(n, r + opts.max_slack);
    let mut covered = vec![false; members.len()];
    let mut left = members.len();
    let mut entries = Vec::new();
    let mut gains: Vec<usize> = candidates.iter().map(|(_, m)| m.len()).collect();
    while left > 0 && (entries.len() as f64) < budget {
        // Lazy greedy: stale gains only overestimate, so recompute the best
        // until it is fresh.
        let mut best: Option<usize> = None;
        loop {
            let pick = (0..candidates.len())
                .filter(|&i| gains[i] > 0)
                .max_by(|&a, &b| gains[a].cmp(&gains[b]).then(b.cmp(&a)));
            let Some(i) = pick else { break };
            let fresh = candidates[i].1.iter().filter(|&&m| !covered[m as usize]).count();
            if fresh == gains[i] {
                best = Some(i);
                break;
            }
            gains[i] = fresh;
        }
        let Some(i) = best else { break };
        for &m in &candidates[i].1 {
            if !covered[m as usize] {
                covered[m as usize] = true;
                left -= 1;
            }
        }
        gains[i] = 0;
        entries.push(Sequence::from_symbols(candidates[i].0.clone()));
    }
    let mut out = base();
    out.target = target;
    out.entries = entries;
    out.covers = left == 0;
    out.slack_bits = (out.index_bits() - n as f64 * r).max(0.0);
    Ok(out)
}

/// Depth-first enumeration of reconstructions within total distortion
/// `budget` of `x`, restricted per position to the symbols allowed for `y_i`.
#[allow(clippy::too_many_arguments)]
fn ball<F: FnMut(&[u8])>(
    x: &[u8],
    y: &[u8],
    d: &DistortionMatrix,
    allowed: &[Vec<bool>],
    budget: f64,
    pos: usize,
    spent: f64,
    cur: &mut [u8],
    f: &mut F,
) {
    if pos == x.len() {
        f(cur);
        return;
    }
    let a = x[pos] as usize;
    for z in 0..d.cols() {
        if !allowed[y[pos] as usize][z] {
            continue;
        }
        let s = spent + d.get(a, z);
        if s <= budget {
            cur[pos] = z as u8;
            ball(x, y, d, allowed, budget, pos + 1, s, cur, f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn seq(v: &[u8]) -> Sequence {
        Sequence::from_symbols(v.to_vec())
    }

    #[test]
    fn joint_type_counts() {
        let t = enumerate_joint_types(2, 2, 2, DEFAULT_TYPE_LIMIT).unwrap();
        assert_eq!(t.len(), 10);
        let uniq: HashSet<_> = t.iter().cloned().collect();
        assert_eq!(uniq.len(), 10);
        assert_eq!(enumerate_joint_types(1, 2, 3, DEFAULT_TYPE_LIMIT).unwrap().len(), 6);
        for n in 1..6 {
            let c = enumerate_joint_types(n, 2, 2, DEFAULT_TYPE_LIMIT).unwrap().len();
            assert!(c as f64 <= ((n + 1) as f64).powi(4));
        }
    }

    #[test]
    fn guard_trips() {
        assert!(matches!(
            enumerate_joint_types(40, 3, 3, 1000),
            Err(Error::ResourceGuard { .. })
        ));
    }

    #[test]
    fn rank_matches_enumeration_order() {
        let all = enumerate_joint_types(4, 2, 3, DEFAULT_TYPE_LIMIT).unwrap();
        for (i, t) in all.iter().enumerate() {
            assert_eq!(type_rank(t), i as u64);
        }
    }

    #[test]
    fn types_round_trip_through_realizations() {
        for t in enumerate_joint_types(3, 2, 2, DEFAULT_TYPE_LIMIT).unwrap() {
            let (x, y) = t.realize();
            assert_eq!(TypeIndex::of_pair(&x, &y.unwrap(), 2, 2).unwrap(), t);
        }
    }

    #[test]
    fn identity_shell_is_singleton() {
        let z = seq(&[0, 1, 1, 0, 1]);
        let s = v_shell(&z, &Channel::identity(2).unwrap()).unwrap();
        let all: Vec<_> = s.iter().collect();
        assert_eq!(all, vec![z]);
        assert_eq!(s.size(), 1.0);
    }

    #[test]
    fn one_flip_shell() {
        let z = seq(&[0, 0, 1, 1]);
        let v = Channel::from_rows(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let s = v_shell(&z, &v).unwrap();
        let all: Vec<_> = s.iter().collect();
        assert_eq!(all.len(), 2);
        assert_eq!(s.size(), 2.0);
        assert!(all.contains(&seq(&[1, 0, 1, 1])));
        assert!(all.contains(&seq(&[0, 1, 1, 1])));
    }

    #[test]
    fn shell_size_formula_matches_enumeration() {
        let z = seq(&[0, 1, 2, 0, 1, 0]);
        // z has three 0s, two 1s, one 2.
        let v = Channel::from_rows(vec![
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let s = v_shell(&z, &v).unwrap();
        let all: HashSet<_> = s.iter().collect();
        assert_eq!(all.len() as f64, s.size());
        assert_eq!(s.size(), 6.0 * 2.0);
        let occ = [3.0, 2.0, 1.0];
        for x in &all {
            let jt = TypeIndex::of_pair(x, &z, 3, 3).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    let want = (occ[b] * v.prob(b, a)).round() as usize;
                    assert_eq!(jt.counts()[a * 3 + b], want);
                }
            }
        }
    }

    #[test]
    fn non_integral_v_is_rejected() {
        let z = seq(&[0, 0, 0]);
        let v = Channel::binary_symmetric(0.5).unwrap();
        assert!(matches!(v_shell(&z, &v), Err(Error::InconsistentType(_))));
    }

    #[test]
    fn type_class_size_bounds() {
        for t in enumerate_types(10, 3, DEFAULT_TYPE_LIMIT).unwrap() {
            let h = t.to_distribution().entropy();
            let size = t.class_size();
            let upper = (2f64).powf(10.0 * h);
            assert!(size <= upper * (1.0 + 1e-9));
            assert!(size >= upper / 11f64.powi(3) * (1.0 - 1e-9));
        }
    }

    #[test]
    fn mismatched_shell_gives_empty_codebook() {
        let y = seq(&[0, 0, 1, 1]);
        // Y marginal three 0s and one 1.
        let jt = TypeIndex::new(4, vec![2, 2], vec![3, 0, 0, 1]).unwrap();
        let d = DistortionMatrix::hamming(2).unwrap();
        let cb = covering_codebook(&y, &jt, 0.5, 0.05, &d, &CoverOptions::default()).unwrap();
        assert!(cb.entries.is_empty());
        assert!(cb.covers);
    }

    #[test]
    fn generous_rate_covers_exactly() {
        let y = seq(&[0, 1, 0, 1, 1, 0]);
        let jt = TypeIndex::of_pair(&seq(&[0, 1, 1, 1, 0, 0]), &y, 2, 2).unwrap();
        let d = DistortionMatrix::hamming(2).unwrap();
        let cb = covering_codebook(&y, &jt, 1.0, 0.0, &d, &CoverOptions::default()).unwrap();
        assert!(cb.covers);
        let shell = Shell::of_joint_type(&y, &jt).unwrap().unwrap();
        for x in shell.iter() {
            assert_eq!(cb.nearest(&x, &d).unwrap().1, 0.0);
        }
    }

    #[test]
    fn guarantee_holds_for_every_shell_member() {
        let d = DistortionMatrix::hamming(2).unwrap();
        let y = seq(&[0, 1, 1, 0, 1, 0, 0, 1, 1, 0]);
        for jt in enumerate_joint_types(10, 2, 2, DEFAULT_TYPE_LIMIT).unwrap() {
            let cb = covering_codebook(&y, &jt, 0.3, 0.05, &d, &CoverOptions::default()).unwrap();
            if !cb.covers {
                continue;
            }
            if let Some(shell) = Shell::of_joint_type(&y, &jt).unwrap() {
                for x in shell.iter() {
                    assert!(cb.nearest(&x, &d).unwrap().1 <= cb.target + 1e-9);
                }
            }
        }
    }
}
