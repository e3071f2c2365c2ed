//! Per-user constellations and their power properties.
//!
//! Amplitudes are exact: every symbol is a vector of integer numerators over
//! one shared denominator, expressed as a fraction of the LED array's peak
//! intensity. They become floating-point intensities only at the channel.

mod ccm;
mod cmeppm;
mod meppm;
mod papr;

use alloc::vec::Vec;

use num_rational::Ratio;

use crate::{Error, Result};

pub use ccm::ccm_constellation;
pub use cmeppm::cmeppm_constellation;
pub use meppm::{
    dmeppm_partition, eppm_constellation, meppm_constellation, rank_multiset, rank_subset,
    unrank_multiset, unrank_subset, MeppmLayout, MeppmType, Partition, MAX_CONSTELLATION_SIZE,
};
pub use papr::{ensemble_papr, papr, EnsemblePapr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    CodedMeppm,
    DividedMeppmI,
    DividedMeppmII,
    Ccm,
    Eppm,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::CodedMeppm => "c-meppm",
            Scheme::DividedMeppmI => "d-meppm-1",
            Scheme::DividedMeppmII => "d-meppm-2",
            Scheme::Ccm => "ccm",
            Scheme::Eppm => "eppm",
        }
    }
}

/// Nonnegative intensity vector `num[j] / den`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    num: Vec<u32>,
    den: u32,
}

impl Symbol {
    pub fn new(num: Vec<u32>, den: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("symbol denominator must be positive".into()));
        }
        if num.is_empty() {
            return Err(Error::InvalidParameter("symbol must have at least one slot".into()));
        }
        Ok(Self { num, den })
    }

    pub fn len(&self) -> usize {
        self.num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num.is_empty()
    }

    pub fn numerators(&self) -> &[u32] {
        &self.num
    }

    pub fn denominator(&self) -> u32 {
        self.den
    }

    pub fn amplitude(&self, slot: usize) -> Ratio<u64> {
        Ratio::new(self.num[slot] as u64, self.den as u64)
    }

    pub fn amplitudes(&self) -> Vec<Ratio<u64>> {
        (0..self.len()).map(|j| self.amplitude(j)).collect()
    }

    /// Sum of amplitudes over all slots.
    pub fn slot_sum(&self) -> Ratio<u64> {
        Ratio::new(self.num.iter().map(|&n| n as u64).sum(), self.den as u64)
    }

    pub fn peak(&self) -> Ratio<u64> {
        Ratio::new(self.num.iter().copied().max().unwrap_or(0) as u64, self.den as u64)
    }

    pub fn intensities(&self) -> Vec<f64> {
        let den = self.den as f64;
        self.num.iter().map(|&n| n as f64 / den).collect()
    }

    /// Rightward rotation, matching [`crate::codes::Codeword::cyclic_shift`].
    pub fn cyclic_shift(&self, m: usize) -> Symbol {
        let len = self.num.len();
        let shift = m % len;
        let num = (0..len).map(|i| self.num[(i + len - shift) % len]).collect();
        Symbol { num, den: self.den }
    }
}

/// Code and user parameters a constellation was built from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstellationParams {
    /// Slots per symbol (Q, or L for CCM).
    pub slots: usize,
    pub k: Option<usize>,
    pub lambda: Option<usize>,
    pub ooc_length: Option<usize>,
    pub ooc_weight: Option<usize>,
    pub n_users: usize,
    pub set_size: Option<usize>,
    pub branches: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constellation {
    pub scheme: Scheme,
    /// Zero-based user index the constellation belongs to.
    pub user: usize,
    pub params: ConstellationParams,
    pub symbols: Vec<Symbol>,
    /// Codeword multiplicities for MEPPM-family constellations.
    pub layout: Option<MeppmLayout>,
}

impl Constellation {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn slots(&self) -> usize {
        self.params.slots
    }

    pub fn bits_per_symbol(&self) -> u32 {
        bits_per_symbol(self.len())
    }
}

/// `floor(log2 M)`; zero for `M < 2`.
pub fn bits_per_symbol(size: usize) -> u32 {
    if size < 2 {
        0
    } else {
        usize::BITS - 1 - size.leading_zeros()
    }
}

/// `floor(log2 M) * symbol_rate` in bits per second.
pub fn achievable_bitrate(size: usize, symbol_rate: f64) -> Result<f64> {
    if size < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "constellation of size {size} carries no bits"
        )));
    }
    if !(symbol_rate > 0.0) {
        return Err(Error::InvalidParameter("symbol rate must be positive".into()));
    }
    Ok(bits_per_symbol(size) as f64 * symbol_rate)
}

/// Symbol rate needed to carry `bitrate` with an M-ary constellation.
pub fn symbol_rate_for(size: usize, bitrate: f64) -> Result<f64> {
    let bits = bits_per_symbol(size);
    if bits == 0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "constellation of size {size} carries no bits"
        )));
    }
    Ok(bitrate / bits as f64)
}
