use alloc::vec;
use alloc::vec::Vec;

use super::{Constellation, ConstellationParams, Scheme, Symbol};
use crate::codes::BibdCode;
use crate::{Error, Result};

/// Largest constellation the enumerating builders and detectors accept.
pub const MAX_CONSTELLATION_SIZE: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeppmType {
    /// Each symbol sums `l` distinct codewords.
    I,
    /// Codewords may repeat; an extra zero-amplitude "empty" codeword pads
    /// the alphabet, giving `C(q + l, l)` symbols.
    II,
}

/// Disjoint per-user codeword index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub sets: Vec<Vec<usize>>,
}

impl Partition {
    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }
}

/// Contiguous allocation: user 0 gets `0..q_0`, user 1 the next `q_1`, ...
pub fn dmeppm_partition(bibd: &BibdCode, sizes: &[usize]) -> Result<Partition> {
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidParameter("every user needs at least one codeword".into()));
    }
    let requested: usize = sizes.iter().sum();
    if requested > bibd.q() {
        return Err(Error::Oversubscribed {
            requested,
            available: bibd.q(),
        });
    }
    let mut next = 0;
    let sets = sizes
        .iter()
        .map(|&s| {
            let set: Vec<usize> = (next..next + s).collect();
            next += s;
            set
        })
        .collect();
    Ok(Partition { sets })
}

/// Codeword multiplicities behind each MEPPM symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeppmLayout {
    /// BIBD codeword indices available to the user.
    pub indices: Vec<usize>,
    /// `multiplicities[m][i]`: copies of codeword `indices[i]` in symbol `m`.
    pub multiplicities: Vec<Vec<u8>>,
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Colex rank of a strictly increasing `k`-subset: `sum_i C(s_i, i + 1)`.
pub fn rank_subset(subset: &[usize]) -> u128 {
    subset
        .iter()
        .enumerate()
        .map(|(i, &s)| binomial(s as u64, i as u64 + 1))
        .sum()
}

/// Inverse of [`rank_subset`] for `k`-subsets of `0..n`.
pub fn unrank_subset(mut rank: u128, n: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    let mut upper = n;
    for i in (1..=k).rev() {
        let mut s = upper;
        while s > 0 && binomial(s as u64 - 1, i as u64) > rank {
            s -= 1;
        }
        let s = s - 1;
        out[i - 1] = s;
        rank -= binomial(s as u64, i as u64);
        upper = s;
    }
    out
}

/// Colex rank of a non-decreasing `k`-multiset, via `m_i + i` to a subset.
pub fn rank_multiset(multiset: &[usize]) -> u128 {
    let shifted: Vec<usize> = multiset.iter().enumerate().map(|(i, &m)| m + i).collect();
    rank_subset(&shifted)
}

/// Inverse of [`rank_multiset`] for `k`-multisets over `0..alphabet`.
pub fn unrank_multiset(rank: u128, alphabet: usize, k: usize) -> Vec<usize> {
    unrank_subset(rank, alphabet + k - 1, k)
        .into_iter()
        .enumerate()
        .map(|(i, s)| s - i)
        .collect()
}

fn check_indices(bibd: &BibdCode, indices: &[usize]) -> Result<()> {
    for (i, &idx) in indices.iter().enumerate() {
        if idx >= bibd.q() || indices[..i].contains(&idx) {
            return Err(Error::BadCodewordIndex {
                index: idx,
                len: bibd.q(),
            });
        }
    }
    Ok(())
}

fn symbol_from_multiplicities(bibd: &BibdCode, indices: &[usize], mult: &[u8]) -> Result<Symbol> {
    let q = bibd.q();
    let base = bibd.base().positions();
    let mut num = vec![0u32; q];
    for (&idx, &count) in indices.iter().zip(mult) {
        for &p in &base {
            num[(p + idx) % q] += count as u32;
        }
    }
    Symbol::new(num, q as u32)
}

/// MEPPM constellation over the codewords `indices` of `bibd`, with `branches`
/// codewords per symbol and amplitudes scaled by `1/Q`.
///
/// Type-I enumerates `branches`-subsets of `indices`; type-II enumerates
/// `branches`-multisets over `indices` plus one empty codeword (the last
/// alphabet entry). Both are in colex order, so symbol `m` is the rank-`m`
/// (multi)set.
pub fn meppm_constellation(
    bibd: &BibdCode,
    indices: &[usize],
    branches: usize,
    kind: MeppmType,
    n_users: usize,
    user: usize,
) -> Result<Constellation> {
    check_indices(bibd, indices)?;
    let q = indices.len();
    if q == 0 {
        return Err(Error::InvalidParameter("empty codeword set".into()));
    }
    let (size, scheme) = match kind {
        MeppmType::I => {
            if branches == 0 || branches >= q {
                return Err(Error::InvalidParameter(alloc::format!(
                    "type-I needs 1 <= branches < set size, got branches = {branches}, set size = {q}"
                )));
            }
            (binomial(q as u64, branches as u64), Scheme::DividedMeppmI)
        }
        MeppmType::II => {
            if branches == 0 {
                return Err(Error::InvalidParameter("type-II needs at least one branch".into()));
            }
            (binomial((q + branches) as u64, branches as u64), Scheme::DividedMeppmII)
        }
    };
    if size > MAX_CONSTELLATION_SIZE {
        return Err(Error::ConstellationTooLarge {
            size,
            cap: MAX_CONSTELLATION_SIZE,
        });
    }
    let mut symbols = Vec::with_capacity(size as usize);
    let mut multiplicities = Vec::with_capacity(size as usize);
    for rank in 0..size {
        let mut mult = vec![0u8; q];
        match kind {
            MeppmType::I => {
                for i in unrank_subset(rank, q, branches) {
                    mult[i] += 1;
                }
            }
            MeppmType::II => {
                for i in unrank_multiset(rank, q + 1, branches) {
                    // Index q is the empty codeword.
                    if i < q {
                        mult[i] += 1;
                    }
                }
            }
        }
        symbols.push(symbol_from_multiplicities(bibd, indices, &mult)?);
        multiplicities.push(mult);
    }
    Ok(Constellation {
        scheme,
        user,
        params: ConstellationParams {
            slots: bibd.q(),
            k: Some(bibd.k()),
            lambda: Some(bibd.lambda()),
            n_users,
            set_size: Some(q),
            branches: Some(branches),
            ..ConstellationParams::default()
        },
        symbols,
        layout: Some(MeppmLayout {
            indices: indices.to_vec(),
            multiplicities,
        }),
    })
}

/// Single-user EPPM: symbol `m` is BIBD codeword `m`.
pub fn eppm_constellation(bibd: &BibdCode) -> Result<Constellation> {
    let q = bibd.q();
    let indices: Vec<usize> = (0..q).collect();
    let mut symbols = Vec::with_capacity(q);
    let mut multiplicities = Vec::with_capacity(q);
    for m in 0..q {
        let mut mult = vec![0u8; q];
        mult[m] = 1;
        let num = bibd.codeword(m).to_bits().into_iter().map(u32::from).collect();
        symbols.push(Symbol::new(num, 1)?);
        multiplicities.push(mult);
    }
    Ok(Constellation {
        scheme: Scheme::Eppm,
        user: 0,
        params: ConstellationParams {
            slots: q,
            k: Some(bibd.k()),
            lambda: Some(bibd.lambda()),
            n_users: 1,
            set_size: Some(q),
            branches: Some(1),
            ..ConstellationParams::default()
        },
        symbols,
        layout: Some(MeppmLayout {
            indices,
            multiplicities,
        }),
    })
}
