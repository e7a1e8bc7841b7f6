//! Enumeration helpers for `X^n` at small blocklength.
//!
//! A sequence is identified with its base-`|X|` index, first symbol most
//! significant, so index order is lexicographic order.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::powf;
use crate::prob::{Distribution, Sequence};

/// `alphabet^n` as a `u64`, or a guard error when it exceeds `limit`.
pub fn space_size(alphabet: usize, n: usize, limit: u64) -> Result<u64> {
    let mut size: u64 = 1;
    for _ in 0..n {
        size = size
            .checked_mul(alphabet as u64)
            .filter(|&s| s <= limit)
            .ok_or(Error::ResourceGuard {
                what: "sequence space",
                requested: powf(alphabet as f64, n as f64),
                limit: limit as f64,
            })?;
    }
    if size > limit {
        return Err(Error::ResourceGuard {
            what: "sequence space",
            requested: size as f64,
            limit: limit as f64,
        });
    }
    Ok(size)
}

pub fn index_of(symbols: &[u8], alphabet: usize) -> u64 {
    symbols
        .iter()
        .fold(0u64, |acc, &s| acc * alphabet as u64 + s as u64)
}

pub fn symbols_of(mut index: u64, n: usize, alphabet: usize) -> Vec<u8> {
    let mut out = vec![0u8; n];
    for slot in out.iter_mut().rev() {
        *slot = (index % alphabet as u64) as u8;
        index /= alphabet as u64;
    }
    out
}

pub fn sequence_of(index: u64, n: usize, alphabet: usize) -> Sequence {
    Sequence::from_symbols(symbols_of(index, n, alphabet))
}

/// `prod_i P(x_i)`.
pub fn iid_prob(symbols: &[u8], p: &Distribution) -> f64 {
    symbols.iter().map(|&s| p.get(s as usize)).product()
}

/// The i.i.d. product distribution over all of `X^n`, in index order.
pub fn iid_table(p: &Distribution, n: usize, limit: u64) -> Result<Vec<f64>> {
    let size = space_size(p.alphabet_size(), n, limit)?;
    let mut table = vec![1.0f64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(table.len() * p.alphabet_size());
        for &t in &table {
            for &m in p.mass() {
                next.push(t * m);
            }
        }
        table = next;
    }
    debug_assert_eq!(table.len() as u64, size);
    Ok(table)
}
