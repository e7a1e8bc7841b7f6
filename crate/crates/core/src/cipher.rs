//! The Shannon cipher system at small blocklength: random codebooks indexed
//! by (message, key), the likelihood encoder, the decoder, and exact tables
//! of the induced and idealized joint distributions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::index_count;
use crate::prob::{distortion_unchecked, tv_slices, Channel, Distribution, DistortionMatrix, Sequence};
use crate::rng::{sample, stream, Purpose};
use crate::seq::{index_of, space_size, symbols_of};

/// Default cap on the total number of symbols a codebook may hold.
pub const DEFAULT_SYMBOL_BUDGET: u64 = 1 << 24;

/// Default cap on the cells of an exact `(x^n, m, k)` table.
pub const DEFAULT_TABLE_LIMIT: u64 = 1 << 22;

/// Codewords `x^n(m, k)` for `m < ceil(2^{nR})`, `k < ceil(2^{nR0})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    rate: f64,
    key_rate: f64,
    messages: usize,
    keys: usize,
    seed: u64,
    generator: Distribution,
    /// Row-major `(m, k, i)`.
    symbols: Vec<u8>,
}

impl Codebook {
    /// Draws every symbol i.i.d. from `generator` using the codebook stream
    /// of `seed`, in `(m, k, i)` order.
    pub fn build(seed: u64, n: usize, rate: f64, key_rate: f64, generator: &Distribution) -> Result<Self> {
        Self::build_with_budget(seed, n, rate, key_rate, generator, DEFAULT_SYMBOL_BUDGET)
    }

    pub fn build_with_budget(
        seed: u64,
        n: usize,
        rate: f64,
        key_rate: f64,
        generator: &Distribution,
        budget: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("blocklength must be positive".into()));
        }
        if !(rate >= 0.0 && key_rate >= 0.0) {
            return Err(Error::InvalidParameter("rates must be >= 0".into()));
        }
        let messages = index_count(n, rate);
        let keys = index_count(n, key_rate);
        let total = messages * keys * n as f64;
        if total > budget as f64 {
            return Err(Error::ResourceGuard {
                what: "codebook symbols",
                requested: total,
                limit: budget as f64,
            });
        }
        let mut rng = stream(Purpose::Codebook, seed, 0);
        let symbols = (0..total as usize).map(|_| sample(generator, &mut rng) as u8).collect();
        Ok(Self {
            n,
            rate,
            key_rate,
            messages: messages as usize,
            keys: keys as usize,
            seed,
            generator: generator.clone(),
            symbols,
        })
    }

    /// A codebook with explicit entries, listed message-major
    /// (`entries[m * keys + k]`). Rates are set to `log2(count) / n`.
    pub fn from_entries(
        messages: usize,
        keys: usize,
        entries: &[Sequence],
        generator: &Distribution,
    ) -> Result<Self> {
        if messages == 0 || keys == 0 || entries.len() != messages * keys {
            return Err(Error::InvalidParameter(format!(
                "{} entries for {messages} messages and {keys} keys",
                entries.len()
            )));
        }
        let n = entries[0].len();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let mut symbols = Vec::with_capacity(n * entries.len());
        for e in entries {
            if e.len() != n {
                return Err(Error::LengthMismatch { left: n, right: e.len() });
            }
            for &s in e.symbols() {
                if s as usize >= generator.alphabet_size() {
                    return Err(Error::SymbolOutOfRange {
                        symbol: s as usize,
                        alphabet: generator.alphabet_size(),
                    });
                }
            }
            symbols.extend_from_slice(e.symbols());
        }
        Ok(Self {
            n,
            rate: crate::math::log2(messages as f64) / n as f64,
            key_rate: crate::math::log2(keys as f64) / n as f64,
            messages,
            keys,
            seed: 0,
            generator: generator.clone(),
            symbols,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn key_rate(&self) -> f64 {
        self.key_rate
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn keys(&self) -> usize {
        self.keys
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> &Distribution {
        &self.generator
    }

    pub fn alphabet(&self) -> usize {
        self.generator.alphabet_size()
    }

    pub fn len(&self) -> usize {
        self.messages * self.keys
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symbols of `x^n(m, k)`; indices must be in range.
    pub fn entry(&self, m: usize, k: usize) -> &[u8] {
        let at = (m * self.keys + k) * self.n;
        &self.symbols[at..at + self.n]
    }

    pub fn get(&self, m: usize, k: usize) -> Result<Sequence> {
        if m >= self.messages {
            return Err(Error::IndexOutOfRange {
                index: m,
                bound: self.messages,
            });
        }
        if k >= self.keys {
            return Err(Error::IndexOutOfRange {
                index: k,
                bound: self.keys,
            });
        }
        Ok(Sequence::from_symbols(self.entry(m, k).to_vec()))
    }

    /// All codewords in `(m, k)` order.
    pub fn entries(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.symbols.chunks(self.n)
    }
}

/// How the encoder scores codewords against the source.
#[derive(Debug, Clone, PartialEq)]
pub enum CipherMode {
    /// Codewords live in the source alphabet; score is `1{x^n = x^n(m,k)}`.
    Lossless,
    /// Codewords are reconstructions `y^n(m, k)`; score is
    /// `prod_i P_{X|Y}(x_i | y_i)` with `backward` = `P_{X|Y}`.
    Lossy { backward: Channel },
}

/// Encoder/decoder pair built on one codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct CipherCode {
    codebook: Codebook,
    mode: CipherMode,
}

/// Result of one encoder call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoding {
    pub message: usize,
    /// No codeword had positive likelihood; the fixed index 0 was used.
    pub fallback: bool,
}

impl CipherCode {
    pub fn lossless(codebook: Codebook) -> Self {
        Self {
            codebook,
            mode: CipherMode::Lossless,
        }
    }

    pub fn lossy(codebook: Codebook, backward: Channel) -> Result<Self> {
        if backward.input_size() != codebook.alphabet() {
            return Err(Error::AlphabetMismatch {
                expected: codebook.alphabet(),
                found: backward.input_size(),
            });
        }
        Ok(Self {
            codebook,
            mode: CipherMode::Lossy { backward },
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn mode(&self) -> &CipherMode {
        &self.mode
    }

    pub fn n(&self) -> usize {
        self.codebook.n
    }

    pub fn messages(&self) -> usize {
        self.codebook.messages
    }

    pub fn keys(&self) -> usize {
        self.codebook.keys
    }

    /// Size of the source alphabet.
    pub fn source_alphabet(&self) -> usize {
        match &self.mode {
            CipherMode::Lossless => self.codebook.alphabet(),
            CipherMode::Lossy { backward } => backward.output_size(),
        }
    }

    /// Size of the decoder's output alphabet.
    pub fn output_alphabet(&self) -> usize {
        self.codebook.alphabet()
    }

    fn check_source(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::LengthMismatch {
                left: self.n(),
                right: x.len(),
            });
        }
        let a = self.source_alphabet();
        if let Some(&s) = x.iter().find(|&&s| s as usize >= a) {
            return Err(Error::SymbolOutOfRange {
                symbol: s as usize,
                alphabet: a,
            });
        }
        Ok(())
    }

    /// Unnormalized encoder score of `(m, k)` for source `x`.
    pub fn likelihood(&self, x: &[u8], m: usize, k: usize) -> f64 {
        let c = self.codebook.entry(m, k);
        match &self.mode {
            CipherMode::Lossless => {
                if c == x {
                    1.0
                } else {
                    0.0
                }
            }
            CipherMode::Lossy { backward } => c
                .iter()
                .zip(x)
                .map(|(&y, &a)| backward.prob(y as usize, a as usize))
                .product(),
        }
    }

    /// `P_{M | X^n = x, K = k}`; falls back to the point mass at 0 when
    /// every score is zero.
    pub fn encoder_distribution(&self, x: &Sequence, k: usize) -> Result<(Vec<f64>, bool)> {
        self.check_source(x.symbols())?;
        if k >= self.keys() {
            return Err(Error::IndexOutOfRange {
                index: k,
                bound: self.keys(),
            });
        }
        Ok(self.encoder_row(x.symbols(), k))
    }

    fn encoder_row(&self, x: &[u8], k: usize) -> (Vec<f64>, bool) {
        let mut w: Vec<f64> = (0..self.messages()).map(|m| self.likelihood(x, m, k)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            for v in w.iter_mut() {
                *v /= total;
            }
            (w, false)
        } else {
            w.iter_mut().for_each(|v| *v = 0.0);
            w[0] = 1.0;
            (w, true)
        }
    }

    /// Samples `m` with probability proportional to its likelihood.
    pub fn likelihood_encode<R: Rng + ?Sized>(&self, x: &Sequence, k: usize, rng: &mut R) -> Result<Encoding> {
        let (w, fallback) = self.encoder_distribution(x, k)?;
        let message = if fallback {
            0
        } else {
            crate::rng::sample_weights(&w, rng)
        };
        Ok(Encoding { message, fallback })
    }

    /// `x^n(m, k)` (lossless) or `y^n(m, k)` (lossy).
    pub fn decode(&self, m: usize, k: usize) -> Result<Sequence> {
        self.codebook.get(m, k)
    }

    /// `P[X̂^n != X^n]` under i.i.d. `source`, exactly. Lossless mode only.
    pub fn error_probability(&self, source: &Distribution, limit: u64) -> Result<f64> {
        if self.mode != CipherMode::Lossless {
            return Err(Error::InvalidParameter(
                "error probability is defined for lossless codes".into(),
            ));
        }
        let mut err = 0.0;
        self.for_each_source(source, limit, |x, px| {
            for k in 0..self.keys() {
                let hit = (0..self.messages()).any(|m| self.codebook.entry(m, k) == x);
                if !hit {
                    err += px / self.keys() as f64;
                }
            }
        })?;
        Ok(err)
    }

    /// `P[d(X^n, Y^n(M, K)) > level]` under i.i.d. `source`, exactly.
    pub fn excess_distortion_probability(
        &self,
        source: &Distribution,
        d: &DistortionMatrix,
        level: f64,
        limit: u64,
    ) -> Result<f64> {
        if d.rows() != self.source_alphabet() || d.cols() != self.output_alphabet() {
            return Err(Error::AlphabetMismatch {
                expected: self.source_alphabet(),
                found: d.rows(),
            });
        }
        let mut out = 0.0;
        self.for_each_source(source, limit, |x, px| {
            for k in 0..self.keys() {
                let (w, _) = self.encoder_row(x, k);
                for (m, pm) in w.iter().enumerate() {
                    if *pm > 0.0 && distortion_unchecked(x, self.codebook.entry(m, k), d) > level + 1e-12 {
                        out += px * pm / self.keys() as f64;
                    }
                }
            }
        })?;
        Ok(out)
    }

    fn for_each_source<F: FnMut(&[u8], f64)>(&self, source: &Distribution, limit: u64, mut f: F) -> Result<()> {
        let a = self.source_alphabet();
        if source.alphabet_size() != a {
            return Err(Error::AlphabetMismatch {
                expected: a,
                found: source.alphabet_size(),
            });
        }
        let count = space_size(a, self.n(), limit)?;
        for xi in 0..count {
            let x = symbols_of(xi, self.n(), a);
            let px = crate::seq::iid_prob(&x, source);
            if px > 0.0 {
                f(&x, px);
            }
        }
        Ok(())
    }

    fn table_shape(&self, limit: u64) -> Result<usize> {
        let xs = space_size(self.source_alphabet(), self.n(), u64::MAX)?;
        let cells = xs as f64 * self.messages() as f64 * self.keys() as f64;
        if cells > limit as f64 {
            return Err(Error::ResourceGuard {
                what: "exact joint table",
                requested: cells,
                limit: limit as f64,
            });
        }
        Ok(xs as usize)
    }

    /// Exact `P_{X^n M K} = P_{X^n} P_K P_{M | X^n K}` under i.i.d. `source`.
    pub fn induced_joint(&self, source: &Distribution, limit: u64) -> Result<InducedJoint> {
        if source.alphabet_size() != self.source_alphabet() {
            return Err(Error::AlphabetMismatch {
                expected: self.source_alphabet(),
                found: source.alphabet_size(),
            });
        }
        let xs = self.table_shape(limit)?;
        let (mm, kk, n, a) = (self.messages(), self.keys(), self.n(), self.source_alphabet());
        let mut mass = vec![0.0; xs * mm * kk];
        let mut fallbacks = 0.0;
        // Lossless codes index codewords so each (x, k) row only touches
        // its matches.
        let lookup: Option<Vec<BTreeMap<&[u8], Vec<usize>>>> = match self.mode {
            CipherMode::Lossless => Some(
                (0..kk)
                    .map(|k| {
                        let mut map: BTreeMap<&[u8], Vec<usize>> = BTreeMap::new();
                        for m in 0..mm {
                            map.entry(self.codebook.entry(m, k)).or_default().push(m);
                        }
                        map
                    })
                    .collect(),
            ),
            CipherMode::Lossy { .. } => None,
        };
        for xi in 0..xs {
            let x = symbols_of(xi as u64, n, a);
            let px = crate::seq::iid_prob(&x, source);
            if px == 0.0 {
                continue;
            }
            for k in 0..kk {
                let base = px / kk as f64;
                let row = &mut mass[(xi * mm) * kk..];
                match &lookup {
                    Some(maps) => match maps[k].get(x.as_slice()) {
                        Some(ms) => {
                            for &m in ms {
                                row[m * kk + k] += base / ms.len() as f64;
                            }
                        }
                        None => {
                            row[k] += base;
                            fallbacks += base;
                        }
                    },
                    None => {
                        let (w, fb) = self.encoder_row(&x, k);
                        if fb {
                            fallbacks += base;
                        }
                        for (m, pm) in w.iter().enumerate() {
                            row[m * kk + k] += base * pm;
                        }
                    }
                }
            }
        }
        Ok(InducedJoint {
            n,
            source_alphabet: a,
            messages: mm,
            keys: kk,
            mass,
            fallback_mass: fallbacks,
        })
    }

    /// Exact idealized `Q_{X^n M K}`: `(m, k)` uniform, then `x^n` drawn
    /// from the normalized likelihood of codeword `(m, k)`.
    pub fn ideal_joint(&self, limit: u64) -> Result<InducedJoint> {
        let xs = self.table_shape(limit)?;
        let (mm, kk, n, a) = (self.messages(), self.keys(), self.n(), self.source_alphabet());
        let mut mass = vec![0.0; xs * mm * kk];
        let uniform = 1.0 / (mm * kk) as f64;
        for m in 0..mm {
            for k in 0..kk {
                match &self.mode {
                    CipherMode::Lossless => {
                        let xi = index_of(self.codebook.entry(m, k), a) as usize;
                        mass[(xi * mm + m) * kk + k] = uniform;
                    }
                    CipherMode::Lossy { .. } => {
                        for xi in 0..xs {
                            let x = symbols_of(xi as u64, n, a);
                            mass[(xi * mm + m) * kk + k] = uniform * self.likelihood(&x, m, k);
                        }
                    }
                }
            }
        }
        Ok(InducedJoint {
            n,
            source_alphabet: a,
            messages: mm,
            keys: kk,
            mass,
            fallback_mass: 0.0,
        })
    }

    /// `Q_{X^n | M = m} = (1/K) sum_k` (normalized likelihood of `(m, k)`).
    pub fn conditional_given_message(&self, m: usize, limit: u64) -> Result<Vec<f64>> {
        if m >= self.messages() {
            return Err(Error::IndexOutOfRange {
                index: m,
                bound: self.messages(),
            });
        }
        let (n, a, kk) = (self.n(), self.source_alphabet(), self.keys());
        let xs = space_size(a, n, limit)? as usize;
        let mut out = vec![0.0; xs];
        for k in 0..kk {
            match &self.mode {
                CipherMode::Lossless => {
                    out[index_of(self.codebook.entry(m, k), a) as usize] += 1.0 / kk as f64;
                }
                CipherMode::Lossy { .. } => {
                    for (xi, v) in out.iter_mut().enumerate() {
                        let x = symbols_of(xi as u64, n, a);
                        *v += self.likelihood(&x, m, k) / kk as f64;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// An exact probability table over `(x^n, m, k)`, `x^n` indexed base
/// `|X|` with the first symbol most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedJoint {
    n: usize,
    source_alphabet: usize,
    messages: usize,
    keys: usize,
    mass: Vec<f64>,
    fallback_mass: f64,
}

impl InducedJoint {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source_alphabet(&self) -> usize {
        self.source_alphabet
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn keys(&self) -> usize {
        self.keys
    }

    pub fn sources(&self) -> usize {
        self.mass.len() / (self.messages * self.keys)
    }

    pub fn get(&self, x: usize, m: usize, k: usize) -> f64 {
        self.mass[(x * self.messages + m) * self.keys + k]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Probability that the encoder had to use the fallback index.
    pub fn fallback_mass(&self) -> f64 {
        self.fallback_mass
    }

    pub fn tv(&self, other: &InducedJoint) -> Result<f64> {
        if self.mass.len() != other.mass.len() || self.keys != other.keys {
            return Err(Error::AlphabetMismatch {
                expected: self.mass.len(),
                found: other.mass.len(),
            });
        }
        Ok(tv_slices(&self.mass, &other.mass))
    }

    pub fn source_marginal(&self) -> Vec<f64> {
        self.mass
            .chunks(self.messages * self.keys)
            .map(|c| c.iter().sum())
            .collect()
    }

    /// Marginal over `(m, k)`, row-major.
    pub fn index_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.messages * self.keys];
        for c in self.mass.chunks(self.messages * self.keys) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v;
            }
        }
        out
    }

    pub fn message_marginal(&self) -> Vec<f64> {
        self.index_marginal()
            .chunks(self.keys)
            .map(|c| c.iter().sum())
            .collect()
    }

    pub fn key_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.keys];
        for c in self.index_marginal().chunks(self.keys) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v;
            }
        }
        out
    }

    /// Joint of `(x^n, m)` with the key summed out, row-major.
    pub fn source_message(&self) -> Vec<f64> {
        self.mass.chunks(self.keys).map(|c| c.iter().sum()).collect()
    }

    /// Pushes `(x^n, m, k)` through the decoder to a table over
    /// `(x^n, decoded sequence index)`.
    pub fn decoded(&self, code: &CipherCode) -> Result<Vec<f64>> {
        let a = code.output_alphabet();
        let outs = space_size(a, self.n, u64::MAX)? as usize;
        let xs = self.sources();
        let mut out = vec![0.0; xs * outs];
        for x in 0..xs {
            for m in 0..self.messages {
                for k in 0..self.keys {
                    let v = self.get(x, m, k);
                    if v != 0.0 {
                        let yi = index_of(code.codebook().entry(m, k), a) as usize;
                        out[x * outs + yi] += v;
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::iid_table;

    fn bern(p: f64) -> Distribution {
        Distribution::bernoulli(p).unwrap()
    }

    fn seq(v: &[u8]) -> Sequence {
        Sequence::from_symbols(v.to_vec())
    }

    #[test]
    fn codebooks_are_reproducible() {
        let a = Codebook::build(7, 5, 0.6, 0.4, &bern(0.3)).unwrap();
        let b = Codebook::build(7, 5, 0.6, 0.4, &bern(0.3)).unwrap();
        let c = Codebook::build(8, 5, 0.6, 0.4, &bern(0.3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn index_counts_use_the_ceiling() {
        let c = Codebook::build(1, 4, 1.0, 0.5, &bern(0.5)).unwrap();
        assert_eq!((c.messages(), c.keys(), c.len()), (16, 4, 64));
        let c = Codebook::build(1, 3, 0.5, 0.0, &bern(0.5)).unwrap();
        assert_eq!((c.messages(), c.keys()), (3, 1));
    }

    #[test]
    fn symbol_budget_is_enforced() {
        let r = Codebook::build_with_budget(1, 10, 1.0, 1.0, &bern(0.5), 1000);
        assert!(matches!(r, Err(Error::ResourceGuard { .. })));
    }

    #[test]
    fn symbol_frequencies_concentrate() {
        let c = Codebook::build(3, 16, 0.75, 0.25, &bern(0.3)).unwrap();
        let total = (c.len() * c.n()) as f64;
        let ones = c.entries().flatten().filter(|&&s| s == 1).count() as f64;
        let sigma = (total * 0.3 * 0.7).sqrt();
        assert!((ones - 0.3 * total).abs() < 3.0 * sigma);
    }

    #[test]
    fn lossless_encoder_finds_the_unique_match() {
        let cb = Codebook::from_entries(
            2,
            2,
            &[seq(&[0, 0]), seq(&[0, 1]), seq(&[1, 0]), seq(&[1, 1])],
            &bern(0.5),
        )
        .unwrap();
        let code = CipherCode::lossless(cb);
        let mut rng = stream(Purpose::Encoder, 1, 0);
        let e = code.likelihood_encode(&seq(&[1, 0]), 0, &mut rng).unwrap();
        assert_eq!(e, Encoding { message: 1, fallback: false });
        assert_eq!(code.decode(1, 0).unwrap(), seq(&[1, 0]));
        // [1, 0] is not a key-1 codeword.
        let e = code.likelihood_encode(&seq(&[1, 0]), 1, &mut rng).unwrap();
        assert_eq!(e, Encoding { message: 0, fallback: true });
        assert!(code.decode(2, 0).is_err());
    }

    #[test]
    fn identity_backward_channel_behaves_like_lossless() {
        let cb = Codebook::build(11, 3, 0.7, 0.4, &bern(0.4)).unwrap();
        let lossless = CipherCode::lossless(cb.clone());
        let lossy = CipherCode::lossy(cb, Channel::identity(2).unwrap()).unwrap();
        let src = bern(0.4);
        let a = lossless.induced_joint(&src, DEFAULT_TABLE_LIMIT).unwrap();
        let b = lossy.induced_joint(&src, DEFAULT_TABLE_LIMIT).unwrap();
        assert!(a.tv(&b).unwrap() < 1e-12);
        let qa = lossless.ideal_joint(DEFAULT_TABLE_LIMIT).unwrap();
        let qb = lossy.ideal_joint(DEFAULT_TABLE_LIMIT).unwrap();
        assert!(qa.tv(&qb).unwrap() < 1e-12);
        for m in 0..lossless.messages() {
            let ca = lossless.conditional_given_message(m, 1 << 20).unwrap();
            let cbb = lossy.conditional_given_message(m, 1 << 20).unwrap();
            assert!(tv_slices(&ca, &cbb) < 1e-12);
        }
    }

    #[test]
    fn joint_tables_have_the_right_marginals() {
        let src = bern(0.3);
        let code = CipherCode::lossless(Codebook::build(5, 4, 1.2, 0.5, &src).unwrap());
        let p = code.induced_joint(&src, DEFAULT_TABLE_LIMIT).unwrap();
        let q = code.ideal_joint(DEFAULT_TABLE_LIMIT).unwrap();
        assert!((p.total() - 1.0).abs() < 1e-9);
        assert!((q.total() - 1.0).abs() < 1e-9);
        let iid = iid_table(&src, 4, 1 << 20).unwrap();
        assert!(tv_slices(&p.source_marginal(), &iid) < 1e-12);
        let u = 1.0 / (code.messages() * code.keys()) as f64;
        assert!(q.index_marginal().iter().all(|v| (v - u).abs() < 1e-15));
        // M and K are independent under Q.
        let (qm, qk) = (q.message_marginal(), q.key_marginal());
        for (i, v) in q.index_marginal().iter().enumerate() {
            let (m, k) = (i / code.keys(), i % code.keys());
            assert!((v - qm[m] * qk[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn decoding_never_increases_tv() {
        let src = bern(0.5);
        for seed in 0..5 {
            let code = CipherCode::lossless(Codebook::build(seed, 4, 0.75, 0.5, &src).unwrap());
            let p = code.induced_joint(&src, DEFAULT_TABLE_LIMIT).unwrap();
            let q = code.ideal_joint(DEFAULT_TABLE_LIMIT).unwrap();
            let before = p.tv(&q).unwrap();
            let after = tv_slices(&p.decoded(&code).unwrap(), &q.decoded(&code).unwrap());
            assert!(after <= before + 1e-12);
        }
    }

    #[test]
    fn conditional_counts_multiplicity() {
        let cb = Codebook::from_entries(
            1,
            4,
            &[seq(&[0, 1]), seq(&[1, 1]), seq(&[0, 1]), seq(&[1, 0])],
            &bern(0.5),
        )
        .unwrap();
        let code = CipherCode::lossless(cb);
        let c = code.conditional_given_message(0, 1 << 10).unwrap();
        assert_eq!(c, vec![0.0, 0.5, 0.25, 0.25]);
    }

    #[test]
    fn table_guard_is_enforced() {
        let code = CipherCode::lossless(Codebook::build(1, 10, 1.0, 0.5, &bern(0.5)).unwrap());
        assert!(matches!(
            code.ideal_joint(1 << 16),
            Err(Error::ResourceGuard { .. })
        ));
    }

    #[test]
    fn error_probability_matches_fallback_mass() {
        let src = bern(0.3);
        let code = CipherCode::lossless(Codebook::build(9, 5, 1.0, 0.4, &src).unwrap());
        let p = code.induced_joint(&src, DEFAULT_TABLE_LIMIT).unwrap();
        let e = code.error_probability(&src, 1 << 20).unwrap();
        // A fallback decodes correctly only when x^n(0, k) happens to be x^n,
        // which cannot happen for a fallback.
        assert!((e - p.fallback_mass()).abs() < 1e-12);
    }

    /// Averaging the idealized (x^n, y^n) joint over every codebook the
    /// generator can produce gives the i.i.d. product `P_XY`.
    #[test]
    fn averaged_ideal_joint_is_the_product() {
        let py = bern(0.4);
        let back = Channel::from_rows(vec![vec![0.9, 0.1], vec![0.25, 0.75]]).unwrap();
        for &(n, mm, kk) in &[(1usize, 2usize, 1usize), (1, 1, 2), (2, 1, 2), (2, 2, 1)] {
            let words = mm * kk;
            let ys = 1usize << n;
            let mut avg = vec![0.0; ys * ys];
            for choice in 0..ys.pow(words as u32) {
                let entries: Vec<Sequence> = (0..words)
                    .map(|w| {
                        let yi = (choice / ys.pow(w as u32)) % ys;
                        Sequence::from_symbols(symbols_of(yi as u64, n, 2))
                    })
                    .collect();
                let weight: f64 = entries.iter().map(|e| crate::seq::iid_prob(e.symbols(), &py)).product();
                let code =
                    CipherCode::lossy(Codebook::from_entries(mm, kk, &entries, &py).unwrap(), back.clone())
                        .unwrap();
                let q = code.ideal_joint(1 << 16).unwrap();
                let xy = q.decoded(&code).unwrap();
                for (a, v) in avg.iter_mut().zip(&xy) {
                    *a += weight * v;
                }
            }
            for xi in 0..ys {
                for yi in 0..ys {
                    let x = symbols_of(xi as u64, n, 2);
                    let y = symbols_of(yi as u64, n, 2);
                    let want: f64 = x
                        .iter()
                        .zip(&y)
                        .map(|(&a, &b)| py.get(b as usize) * back.prob(b as usize, a as usize))
                        .product();
                    assert!((avg[xi * ys + yi] - want).abs() < 1e-12);
                }
            }
        }
    }
}
