//! Finite-alphabet probability primitives.
//!
//! All information measures are in bits. Constructors validate eagerly and
//! the resulting values are immutable.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, log2, plogp};

/// Tolerance on total mass for validated constructors.
pub const MASS_TOLERANCE: f64 = 1e-12;

fn check_mass(mass: &[f64]) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::InvalidDistribution("empty alphabet".into()));
    }
    for (i, &p) in mass.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "mass[{i}] = {p} is not a nonnegative number"
            )));
        }
    }
    let total: f64 = mass.iter().sum();
    if abs(total - 1.0) > MASS_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "total mass {total} differs from 1"
        )));
    }
    Ok(())
}

fn normalized(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidDistribution(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution("weights sum to zero".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// A probability mass function on `{0, .., alphabet_size - 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    mass: Vec<f64>,
}

impl Distribution {
    /// Validates nonnegativity and unit total mass (within `1e-12`).
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_mass(&mass)?;
        Ok(Self { mass })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Ok(Self {
            mass: normalized(weights)?,
        })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "Bernoulli parameter {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            mass: vec![1.0 - p, p],
        })
    }

    pub fn uniform(alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self {
            mass: vec![1.0 / alphabet as f64; alphabet],
        })
    }

    pub fn point(alphabet: usize, symbol: usize) -> Result<Self> {
        if symbol >= alphabet {
            return Err(Error::SymbolOutOfRange { symbol, alphabet });
        }
        let mut mass = vec![0.0; alphabet];
        mass[symbol] = 1.0;
        Ok(Self { mass })
    }

    pub fn alphabet_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.mass[symbol]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| i)
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

/// A joint pmf on a `rows x cols` product alphabet, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || mass.len() != rows * cols {
            return Err(Error::InvalidDistribution(format!(
                "joint of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                mass.len()
            )));
        }
        check_mass(&mass)?;
        Ok(Self { rows, cols, mass })
    }

    pub fn from_weights(rows: usize, cols: usize, weights: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 || weights.len() != rows * cols {
            return Err(Error::InvalidDistribution("joint shape mismatch".into()));
        }
        Ok(Self {
            rows,
            cols,
            mass: normalized(weights)?,
        })
    }

    /// `P(x, y) = P(x) W(y | x)`.
    pub fn from_marginal_channel(marginal: &Distribution, channel: &Channel) -> Result<Self> {
        if marginal.alphabet_size() != channel.input_size() {
            return Err(Error::AlphabetMismatch {
                expected: channel.input_size(),
                found: marginal.alphabet_size(),
            });
        }
        let rows = channel.input_size();
        let cols = channel.output_size();
        let mut mass = Vec::with_capacity(rows * cols);
        for x in 0..rows {
            for y in 0..cols {
                mass.push(marginal.get(x) * channel.prob(x, y));
            }
        }
        Ok(Self { rows, cols, mass })
    }

    /// Product of two marginals.
    pub fn product(row: &Distribution, col: &Distribution) -> Self {
        let mut mass = Vec::with_capacity(row.alphabet_size() * col.alphabet_size());
        for &p in row.mass() {
            for &q in col.mass() {
                mass.push(p * q);
            }
        }
        Self {
            rows: row.alphabet_size(),
            cols: col.alphabet_size(),
            mass,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.mass[row * self.cols + col]
    }

    pub fn row_marginal(&self) -> Distribution {
        let mass = (0..self.rows)
            .map(|r| self.mass[r * self.cols..(r + 1) * self.cols].iter().sum())
            .collect();
        Distribution { mass }
    }

    pub fn col_marginal(&self) -> Distribution {
        let mut mass = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (c, m) in mass.iter_mut().enumerate() {
                *m += self.get(r, c);
            }
        }
        Distribution { mass }
    }

    pub fn transpose(&self) -> Self {
        let mut mass = Vec::with_capacity(self.mass.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                mass.push(self.get(r, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            mass,
        }
    }

    /// `P(col | row)`; rows with zero mass get a uniform conditional.
    pub fn col_given_row(&self) -> Channel {
        let rows = (0..self.rows)
            .map(|r| {
                let slice = &self.mass[r * self.cols..(r + 1) * self.cols];
                Distribution::from_weights(slice)
                    .unwrap_or_else(|_| Distribution::uniform(self.cols).expect("cols > 0"))
            })
            .collect();
        Channel {
            inputs: self.rows,
            outputs: self.cols,
            rows,
        }
    }

    /// `P(row | col)` as a channel from the column alphabet.
    pub fn row_given_col(&self) -> Channel {
        self.transpose().col_given_row()
    }

    /// Conditional distribution of the row symbol given column `col`, or
    /// `None` when the column has zero mass.
    pub fn row_conditional(&self, col: usize) -> Option<Distribution> {
        let weights: Vec<f64> = (0..self.rows).map(|r| self.get(r, col)).collect();
        Distribution::from_weights(&weights).ok()
    }
}

/// A joint pmf on `X x Y x Z`, stored with `z` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution3 {
    dims: [usize; 3],
    mass: Vec<f64>,
}

impl JointDistribution3 {
    pub fn new(dims: [usize; 3], mass: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) || mass.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::InvalidDistribution("three-way joint shape mismatch".into()));
        }
        check_mass(&mass)?;
        Ok(Self { dims, mass })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.mass[(x * self.dims[1] + y) * self.dims[2] + z]
    }

    /// The `(X, Y)` joint with `Z` summed out.
    pub fn marginal_xy(&self) -> JointDistribution {
        let [dx, dy, dz] = self.dims;
        let mass = (0..dx * dy)
            .map(|xy| self.mass[xy * dz..(xy + 1) * dz].iter().sum())
            .collect();
        JointDistribution {
            rows: dx,
            cols: dy,
            mass,
        }
    }

    /// The `(X, Z)` joint with `Y` summed out.
    pub fn marginal_xz(&self) -> JointDistribution {
        let [dx, dy, dz] = self.dims;
        let mut mass = vec![0.0; dx * dz];
        for x in 0..dx {
            for y in 0..dy {
                for z in 0..dz {
                    mass[x * dz + z] += self.get(x, y, z);
                }
            }
        }
        JointDistribution {
            rows: dx,
            cols: dz,
            mass,
        }
    }
}

/// A stochastic matrix `W(y | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    rows: Vec<Distribution>,
}

impl Channel {
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        let outputs = rows.first().map(Distribution::alphabet_size).ok_or_else(|| {
            Error::InvalidDistribution("channel needs at least one input".into())
        })?;
        if let Some(bad) = rows.iter().find(|r| r.alphabet_size() != outputs) {
            return Err(Error::AlphabetMismatch {
                expected: outputs,
                found: bad.alphabet_size(),
            });
        }
        Ok(Self {
            inputs: rows.len(),
            outputs,
            rows,
        })
    }

    /// Builds from nested row vectors, validating each row.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(Distribution::new)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn identity(alphabet: usize) -> Result<Self> {
        Self::new(
            (0..alphabet)
                .map(|x| Distribution::point(alphabet, x))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        Self::from_rows(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]])
    }

    /// Every input mapped to the same output distribution.
    pub fn constant(inputs: usize, output: &Distribution) -> Self {
        Self {
            inputs,
            outputs: output.alphabet_size(),
            rows: vec![output.clone(); inputs],
        }
    }

    pub fn input_size(&self) -> usize {
        self.inputs
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x].get(y)
    }

    /// Output distribution for input distribution `p`.
    pub fn push(&self, p: &Distribution) -> Result<Distribution> {
        if p.alphabet_size() != self.inputs {
            return Err(Error::AlphabetMismatch {
                expected: self.inputs,
                found: p.alphabet_size(),
            });
        }
        let mut mass = vec![0.0; self.outputs];
        for (x, row) in self.rows.iter().enumerate() {
            for (y, m) in mass.iter_mut().enumerate() {
                *m += p.get(x) * row.get(y);
            }
        }
        Ok(Distribution { mass })
    }

    /// Cascade `self` then `next`.
    pub fn compose(&self, next: &Channel) -> Result<Channel> {
        if self.outputs != next.inputs {
            return Err(Error::AlphabetMismatch {
                expected: next.inputs,
                found: self.outputs,
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| next.push(r))
            .collect::<Result<Vec<_>>>()?;
        Channel::new(rows)
    }
}

/// Per-letter distortion `d(x, z)`; every row has at least one zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DistortionMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::InvalidDistortion(format!(
                "shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return Err(Error::InvalidDistortion(format!(
                "entry {bad} is not a nonnegative number"
            )));
        }
        for r in 0..rows {
            if !entries[r * cols..(r + 1) * cols].contains(&0.0) {
                return Err(Error::InvalidDistortion(format!(
                    "row {r} has no zero-distortion reconstruction"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidDistortion("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// `1{x != z}` on a `rows x cols` alphabet pair (`cols >= rows`).
    pub fn hamming_rect(rows: usize, cols: usize) -> Result<Self> {
        let entries = (0..rows)
            .flat_map(|x| (0..cols).map(move |z| if x == z { 0.0 } else { 1.0 }))
            .collect();
        Self::new(rows, cols, entries)
    }

    pub fn hamming(alphabet: usize) -> Result<Self> {
        Self::hamming_rect(alphabet, alphabet)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, x: usize, z: usize) -> f64 {
        self.entries[x * self.cols + z]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest positive entry, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.entries
            .iter()
            .copied()
            .filter(|&e| e > 0.0)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))))
    }

    /// `E_P d(X, z)` for a fixed reconstruction symbol.
    pub fn expected(&self, p: &Distribution, z: usize) -> f64 {
        (0..self.rows).map(|x| p.get(x) * self.get(x, z)).sum()
    }

    /// `min_z E_P d(X, z)` and the smallest minimizing `z`.
    pub fn best_constant(&self, p: &Distribution) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for z in 0..self.cols {
            let v = self.expected(p, z);
            if v < best.1 {
                best = (z, v);
            }
        }
        best
    }
}

/// A sequence of alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequence {
    symbols: Vec<u8>,
}

impl Sequence {
    /// Validates every symbol against `alphabet` (at most 256 symbols).
    pub fn new(symbols: Vec<u8>, alphabet: usize) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= alphabet) {
            return Err(Error::SymbolOutOfRange {
                symbol: s as usize,
                alphabet,
            });
        }
        Ok(Self { symbols })
    }

    /// Unvalidated constructor for symbols already known to be in range.
    pub fn from_symbols(symbols: Vec<u8>) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.symbols[i] as usize
    }
}

fn same_alphabet(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: p.alphabet_size(),
            found: q.alphabet_size(),
        });
    }
    Ok(())
}

/// Half the L1 distance between two mass vectors of equal length.
pub fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| abs(a - b)).sum::<f64>()
}

/// Total variation distance `(1/2) sum |P(x) - Q(x)|`.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_alphabet(p, q)?;
    Ok(tv_slices(p.mass(), q.mass()))
}

pub fn entropy(p: &Distribution) -> f64 {
    p.mass().iter().map(|&m| plogp(m)).sum()
}

fn entropy_slice(mass: &[f64]) -> f64 {
    mass.iter().map(|&m| plogp(m)).sum()
}

/// `H(rows) + H(cols) - H(joint)`, clamped at zero against rounding.
pub fn mutual_information(p: &JointDistribution) -> f64 {
    let mi = entropy(&p.row_marginal()) + entropy(&p.col_marginal()) - entropy_slice(p.mass());
    mi.max(0.0)
}

/// `I(X; Z | Y) = sum_y P(y) I(X; Z | Y = y)`.
pub fn conditional_mutual_information(p: &JointDistribution3) -> f64 {
    let [dx, dy, dz] = p.dims();
    let mut total = 0.0;
    for y in 0..dy {
        let mut slice = Vec::with_capacity(dx * dz);
        for x in 0..dx {
            for z in 0..dz {
                slice.push(p.get(x, y, z));
            }
        }
        let py: f64 = slice.iter().sum();
        if py <= 0.0 {
            continue;
        }
        let cond = JointDistribution {
            rows: dx,
            cols: dz,
            mass: slice.iter().map(|m| m / py).collect(),
        };
        total += py * mutual_information(&cond);
    }
    total.max(0.0)
}

/// `D(Q || P)` in bits; `+inf` when `Q` puts mass where `P` has none.
pub fn kl_divergence(q: &Distribution, p: &Distribution) -> Result<f64> {
    same_alphabet(q, p)?;
    let mut total = 0.0;
    for (&a, &b) in q.mass().iter().zip(p.mass()) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total += a * log2(a / b);
        }
    }
    Ok(total.max(0.0))
}

/// The empirical distribution (type) of `x` over `alphabet` symbols.
pub fn empirical_type(x: &Sequence, alphabet: usize) -> Result<Distribution> {
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0usize; alphabet];
    for &s in x.symbols() {
        let s = s as usize;
        if s >= alphabet {
            return Err(Error::SymbolOutOfRange { symbol: s, alphabet });
        }
        counts[s] += 1;
    }
    let n = x.len() as f64;
    Ok(Distribution {
        mass: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// Joint type of `(x, y)` as a `|X| x |Y|` joint distribution.
pub fn joint_type(x: &Sequence, y: &Sequence, ax: usize, ay: usize) -> Result<JointDistribution> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0usize; ax * ay];
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
    let n = x.len() as f64;
    Ok(JointDistribution {
        rows: ax,
        cols: ay,
        mass: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// Strong typicality: `TV(T_x, P) < delta`.
pub fn is_typical(x: &Sequence, p: &Distribution, delta: f64) -> Result<bool> {
    let t = empirical_type(x, p.alphabet_size())?;
    Ok(tv_slices(t.mass(), p.mass()) < delta)
}

/// `(1/n) sum_i d(x_i, z_i)`.
pub fn avg_distortion(x: &Sequence, z: &Sequence, d: &DistortionMatrix) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: z.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    for (&a, &b) in x.symbols().iter().zip(z.symbols()) {
        if a as usize >= d.rows() {
            return Err(Error::SymbolOutOfRange {
                symbol: a as usize,
                alphabet: d.rows(),
            });
        }
        if b as usize >= d.cols() {
            return Err(Error::SymbolOutOfRange {
                symbol: b as usize,
                alphabet: d.cols(),
            });
        }
    }
    Ok(distortion_unchecked(x.symbols(), z.symbols(), d))
}

#[inline]
pub(crate) fn distortion_unchecked(x: &[u8], z: &[u8], d: &DistortionMatrix) -> f64 {
    let total: f64 = x
        .iter()
        .zip(z)
        .map(|(&a, &b)| d.get(a as usize, b as usize))
        .sum();
    total / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::binary_entropy;

    fn dist(m: &[f64]) -> Distribution {
        Distribution::new(m.to_vec()).unwrap()
    }

    fn seq(s: &[u8]) -> Sequence {
        Sequence::from_symbols(s.to_vec())
    }

    #[test]
    fn construction_validates() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        assert!(DistortionMatrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 1.0]]).is_err());
        assert!(Sequence::new(vec![0, 2], 2).is_err());
        assert!(Channel::from_rows(vec![vec![1.0, 0.0], vec![0.5, 0.25, 0.25]]).is_err());
    }

    #[test]
    fn tv_examples() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        let a = Distribution::bernoulli(0.5).unwrap();
        let b = Distribution::bernoulli(0.75).unwrap();
        assert!((tv_distance(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let q = dist(&[0.5, 0.3, 0.2]);
        assert!((tv_distance(&p, &q).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            tv_distance(&p, &a),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&Distribution::bernoulli(0.5).unwrap()) - 1.0).abs() < 1e-15);
        assert_eq!(entropy(&Distribution::point(3, 1).unwrap()), 0.0);
        // h(0.3) = -0.3 log2 0.3 - 0.7 log2 0.7
        let h = entropy(&Distribution::bernoulli(0.3).unwrap());
        assert!((h - 0.881_290_899_230_693_4).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let prod = JointDistribution::product(&dist(&[0.3, 0.7]), &dist(&[0.6, 0.4]));
        assert!(mutual_information(&prod).abs() < 1e-12);
        let ident = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&ident) - 1.0).abs() < 1e-12);
        let j = JointDistribution::new(2, 2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        // direct double sum: 2 * 0.4 log2(0.4 / 0.25) + 2 * 0.1 log2(0.1 / 0.25)
        let direct = 0.8 * (0.4f64 / 0.25).log2() + 0.2 * (0.1f64 / 0.25).log2();
        assert!((mutual_information(&j) - direct).abs() < 1e-12);
        assert!((direct - 0.278_072).abs() < 1e-6);
    }

    #[test]
    fn conditional_mi_examples() {
        // Z independent of (X, Y)
        let pxy = [0.1, 0.2, 0.3, 0.4];
        let pz = [0.25, 0.75];
        let mut mass = std::vec::Vec::new();
        for &a in &pxy {
            for &b in &pz {
                mass.push(a * b);
            }
        }
        let j = JointDistribution3::new([2, 2, 2], mass).unwrap();
        assert!(conditional_mutual_information(&j).abs() < 1e-12);

        // Y constant: reduces to I(X; Z)
        let xz = [0.4, 0.1, 0.15, 0.35];
        let mut mass = std::vec::Vec::new();
        for x in 0..2 {
            for _y in 0..1 {
                for z in 0..2 {
                    mass.push(xz[x * 2 + z]);
                }
            }
        }
        let j = JointDistribution3::new([2, 1, 2], mass).unwrap();
        let direct = mutual_information(&JointDistribution::new(2, 2, xz.to_vec()).unwrap());
        assert!((conditional_mutual_information(&j) - direct).abs() < 1e-12);
    }

    #[test]
    fn kl_examples() {
        let p = dist(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let q = dist(&[1.0, 0.0]);
        let u = dist(&[0.5, 0.5]);
        assert!((kl_divergence(&q, &u).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(kl_divergence(&u, &q).unwrap(), f64::INFINITY);
    }

    #[test]
    fn type_examples() {
        assert_eq!(empirical_type(&seq(&[0, 1, 0, 1]), 2).unwrap().mass(), &[0.5, 0.5]);
        assert_eq!(empirical_type(&seq(&[0, 0, 0]), 2).unwrap().mass(), &[1.0, 0.0]);
        assert_eq!(
            empirical_type(&seq(&[0, 1, 1, 2]), 3).unwrap().mass(),
            &[0.25, 0.5, 0.25]
        );
        assert_eq!(empirical_type(&seq(&[]), 2), Err(Error::EmptySequence));
    }

    #[test]
    fn typicality_examples() {
        let p = Distribution::bernoulli(0.5).unwrap();
        assert!(is_typical(&seq(&[0, 1, 1, 0]), &p, 1e-9).unwrap());
        assert!(!is_typical(&seq(&[0; 10]), &p, 0.1).unwrap());
        let x = seq(&[1, 1, 1, 1, 0, 0, 0, 0, 0, 0]);
        assert!(is_typical(&x, &p, 0.15).unwrap());
    }

    #[test]
    fn distortion_examples() {
        let d = DistortionMatrix::hamming(2).unwrap();
        let x = seq(&[0, 1, 1, 0, 1]);
        assert_eq!(avg_distortion(&x, &x, &d).unwrap(), 0.0);
        let comp = seq(&[1, 0, 0, 1, 0]);
        assert_eq!(avg_distortion(&x, &comp, &d).unwrap(), 1.0);
        let v = avg_distortion(&seq(&[0, 1, 0]), &seq(&[0, 0, 0]), &d).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            avg_distortion(&seq(&[0]), &seq(&[0, 1]), &d),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn binary_entropy_matches_entropy() {
        for &p in &[0.0, 0.1, 0.25, 0.5, 0.9] {
            let d = Distribution::bernoulli(p).unwrap();
            assert!((binary_entropy(p) - entropy(&d)).abs() < 1e-14);
        }
    }
}
