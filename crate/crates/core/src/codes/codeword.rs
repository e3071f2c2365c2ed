use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Fixed-length binary word stored as packed 64-bit limbs.
///
/// Slot `i` is bit `i % 64` of limb `i / 64`; the textual form prints slot 0
/// first. The Hamming weight is cached at construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    limbs: Vec<u64>,
    len: usize,
    weight: usize,
}

impl Codeword {
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("codeword length must be positive".into()));
        }
        Ok(Self {
            limbs: alloc::vec![0; len.div_ceil(64)],
            len,
            weight: 0,
        })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut word = Self::zeros(bits.len())?;
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            word.limbs[i / 64] |= 1 << (i % 64);
        }
        word.weight = word.count_ones();
        Ok(word)
    }

    /// Builds a word with ones at `positions` (reduced modulo `len`).
    pub fn from_positions(len: usize, positions: &[usize]) -> Result<Self> {
        let mut word = Self::zeros(len)?;
        for &p in positions {
            let p = p % len;
            word.limbs[p / 64] |= 1 << (p % 64);
        }
        word.weight = word.count_ones();
        Ok(word)
    }

    /// Parses a `0`/`1` string, slot 0 first.
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(alloc::format!(
                    "unexpected character {other:?} in codeword"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Self::from_bits(&bits)
    }

    fn count_ones(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.weight == 0
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.limbs[i / 64] >> (i % 64) & 1 == 1
    }

    /// Indices of the one-slots in increasing order.
    pub fn positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Rightward rotation: slot `i` of the result is slot `(i - m) mod len`
    /// of `self`.
    pub fn cyclic_shift(&self, m: usize) -> Codeword {
        let shift = m % self.len;
        let positions: Vec<usize> = self.positions().into_iter().map(|p| p + shift).collect();
        // Positions are distinct modulo len, so the weight is preserved.
        Self::from_positions(self.len, &positions).expect("length is positive")
    }

    pub fn complement(&self) -> Codeword {
        let bits: Vec<bool> = self.to_bits().into_iter().map(|b| !b).collect();
        Self::from_bits(&bits).expect("length is positive")
    }

    /// Dot product `sum_i a_i b_i`.
    pub fn correlation(&self, other: &Codeword) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(self
            .limbs
            .iter()
            .zip(&other.limbs)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword({})", self.to_bit_string())
    }
}

/// Free-function form of [`Codeword::cyclic_shift`].
pub fn cyclic_shift(word: &Codeword, m: usize) -> Codeword {
    word.cyclic_shift(m)
}

/// Free-function form of [`Codeword::correlation`].
pub fn correlation(a: &Codeword, b: &Codeword) -> Result<usize> {
    a.correlation(b)
}
