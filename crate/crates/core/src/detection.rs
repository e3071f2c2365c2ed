//! Symbol decision rules: cascaded BIBD/OOC correlators, the single-user
//! log-likelihood detector, MEPPM nearest-symbol search and CCM.
//!
//! Every rule breaks ties towards the lowest symbol index. Scores within a
//! relative `1e-9` of the maximum count as ties, so rounding noise in
//! floating-point sums cannot reorder symbols that are exactly tied.

use alloc::vec;
use alloc::vec::Vec;

use crate::codes::{BibdCode, Codeword};
use crate::modulation::Constellation;
use crate::{Error, Result};

const TIE_TOLERANCE: f64 = 1e-9;

/// Lowest index whose score is within tolerance of the maximum.
pub fn argmax_lowest(scores: &[f64]) -> usize {
    let (max, scale) = scores.iter().fold((f64::NEG_INFINITY, 0.0f64), |(m, s), &x| {
        (m.max(x), s.max(x.abs()))
    });
    let slack = TIE_TOLERANCE * scale;
    scores.iter().position(|&x| x >= max - slack).unwrap_or(0)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

/// `out[m] = sum_p r[(p + m) mod n]` over positions `p`.
fn cyclic_sums(r: &[f64], positions: &[usize], out: &mut [f64]) {
    let n = r.len();
    for (m, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &p in positions {
            let i = p + m;
            acc += r[if i >= n { i - n } else { i }];
        }
        *o = acc;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelatorMode {
    /// `z_j = <r, c_j>`.
    Plain,
    /// `z_j = <r, c_j> - gamma <r, not c_j>` with `gamma = lambda / (K - lambda)`.
    Differential,
}

/// Correlates slot counts against every codeword of a BIBD code.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorBank {
    q: usize,
    positions: Vec<usize>,
    mode: CorrelatorMode,
    gamma: f64,
}

impl CorrelatorBank {
    pub fn new(bibd: &BibdCode, mode: CorrelatorMode) -> Self {
        Self {
            q: bibd.q(),
            positions: bibd.base().positions(),
            mode,
            gamma: bibd.gamma(),
        }
    }

    pub fn len(&self) -> usize {
        self.q
    }

    pub fn is_empty(&self) -> bool {
        self.q == 0
    }

    pub fn mode(&self) -> CorrelatorMode {
        self.mode
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn correlate(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len(self.q, r.len())?;
        let mut z = vec![0.0; self.q];
        self.correlate_into(r, &mut z);
        Ok(z)
    }

    /// Unchecked variant for the simulation loop; `r` and `out` have length Q.
    pub fn correlate_into(&self, r: &[f64], out: &mut [f64]) {
        cyclic_sums(r, &self.positions, out);
        if self.mode == CorrelatorMode::Differential {
            let total: f64 = r.iter().sum();
            let g = self.gamma;
            for z in out.iter_mut() {
                *z -= g * (total - *z);
            }
        }
    }
}

pub fn bibd_correlate(r: &[f64], bibd: &BibdCode, mode: CorrelatorMode) -> Result<Vec<f64>> {
    CorrelatorBank::new(bibd, mode).correlate(r)
}

/// `y_m = sum_l d_l z_{(l + m) mod L}`.
pub fn ooc_correlate(z: &[f64], word: &Codeword) -> Result<Vec<f64>> {
    check_len(word.len(), z.len())?;
    let mut y = vec![0.0; z.len()];
    cyclic_sums(z, &word.positions(), &mut y);
    Ok(y)
}

/// BIBD correlator cascaded with the user's OOC correlator.
#[derive(Debug, Clone, PartialEq)]
pub struct CmeppmCorrelator {
    bank: CorrelatorBank,
    word: Vec<usize>,
}

impl CmeppmCorrelator {
    pub fn new(bibd: &BibdCode, word: &Codeword, mode: CorrelatorMode) -> Result<Self> {
        check_len(bibd.q(), word.len())?;
        Ok(Self {
            bank: CorrelatorBank::new(bibd, mode),
            word: word.positions(),
        })
    }

    pub fn detect(&self, r: &[f64]) -> Result<usize> {
        check_len(self.bank.q, r.len())?;
        let mut scratch = vec![0.0; 2 * self.bank.q];
        Ok(self.detect_with(r, &mut scratch))
    }

    /// `scratch` must hold at least `2Q` values.
    pub fn detect_with(&self, r: &[f64], scratch: &mut [f64]) -> usize {
        let q = self.bank.q;
        let (z, y) = scratch[..2 * q].split_at_mut(q);
        self.bank.correlate_into(r, z);
        cyclic_sums(z, &self.word, y);
        argmax_lowest(y)
    }
}

pub fn detect_cmeppm_corr(r: &[f64], bibd: &BibdCode, word: &Codeword, mode: CorrelatorMode) -> Result<usize> {
    CmeppmCorrelator::new(bibd, word, mode)?.detect(r)
}

/// Log-likelihood slot weights of the single-user detector.
#[derive(Debug, Clone, PartialEq)]
pub struct SudWeights {
    pub v: Vec<f64>,
}

/// `v_j = ln((1/w) sum_l d_l c_l(j) + N Lb/L0 + (N-1) K/Q)`.
pub fn sud_weights(word: &Codeword, bibd: &BibdCode, n_users: usize, background_ratio: f64) -> Result<SudWeights> {
    let q = bibd.q();
    check_len(q, word.len())?;
    if n_users == 0 {
        return Err(Error::InvalidParameter("at least one active user is required".into()));
    }
    if !(background_ratio >= 0.0 && background_ratio.is_finite()) {
        return Err(Error::InvalidParameter("background ratio must be finite and nonnegative".into()));
    }
    if word.weight() == 0 {
        return Err(Error::InvalidParameter("OOC word has zero weight".into()));
    }
    let mut coverage = vec![0u32; q];
    for l in word.positions() {
        for p in bibd.base().positions() {
            coverage[(p + l) % q] += 1;
        }
    }
    let n = n_users as f64;
    let floor = n * background_ratio + (n - 1.0) * bibd.k() as f64 / q as f64;
    let w = word.weight() as f64;
    let v = coverage
        .iter()
        .enumerate()
        .map(|(slot, &c)| {
            let arg = c as f64 / w + floor;
            if arg > 0.0 {
                Ok(libm::log(arg))
            } else {
                Err(Error::NonPositiveLogArgument { slot })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SudWeights { v })
}

/// Correlates against the `Q` rotations of the SUD weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SudDetector {
    floor: f64,
    support: Vec<(usize, f64)>,
}

impl SudDetector {
    pub fn new(weights: &SudWeights) -> Result<Self> {
        if weights.v.is_empty() {
            return Err(Error::InvalidParameter("empty SUD weights".into()));
        }
        let floor = weights.v.iter().copied().fold(f64::INFINITY, f64::min);
        let support = weights
            .v
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v > floor)
            .map(|(i, &v)| (i, v - floor))
            .collect();
        Ok(Self { floor, support })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `scratch` must hold at least `Q` values.
    pub fn detect_with(&self, r: &[f64], scratch: &mut [f64]) -> usize {
        let q = r.len();
        let total: f64 = r.iter().sum();
        let scores = &mut scratch[..q];
        for (m, s) in scores.iter_mut().enumerate() {
            let mut acc = self.floor * total;
            for &(i, dv) in &self.support {
                let j = i + m;
                acc += dv * r[if j >= q { j - q } else { j }];
            }
            *s = acc;
        }
        argmax_lowest(scores)
    }
}

/// `argmax_m <r, v^(m)>` with `v^(m)` the weights rotated right by `m`.
pub fn detect_sud(r: &[f64], weights: &SudWeights) -> Result<usize> {
    check_len(weights.v.len(), r.len())?;
    let mut scratch = vec![0.0; r.len()];
    Ok(SudDetector::new(weights)?.detect_with(r, &mut scratch))
}

/// Nearest-symbol search for MEPPM-family constellations.
///
/// The differential correlator output for the user's codeword `i` has mean
/// `s a_i + beta`, where `a_i` is the codeword's multiplicity in the sent
/// symbol, `s = L0 K / Q` and `beta = Lb (K - gamma (Q - K))`; other users'
/// codewords cancel. The decision maximizes `<z - beta, a_m> - s |a_m|^2 / 2`.
/// When every symbol has the same energy the penalty is constant and the
/// rule is plain maximum correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeppmDetector {
    bank: CorrelatorBank,
    indices: Vec<usize>,
    multiplicities: Vec<Vec<u8>>,
    energies: Vec<f64>,
    equal_energy: bool,
    signal_scale: f64,
    offset: f64,
}

impl MeppmDetector {
    /// `signal` and `background` are the per-slot means the symbols were sent with.
    pub fn new(constellation: &Constellation, bibd: &BibdCode, signal: f64, background: f64) -> Result<Self> {
        let layout = constellation.layout.as_ref().ok_or(Error::IncompatibleDetector {
            detector: "meppm",
            scheme: constellation.scheme.name(),
        })?;
        if layout.multiplicities.is_empty() {
            return Err(Error::InvalidParameter("empty constellation".into()));
        }
        if constellation.slots() != bibd.q() {
            return Err(Error::LengthMismatch {
                expected: bibd.q(),
                found: constellation.slots(),
            });
        }
        let energies: Vec<f64> = layout
            .multiplicities
            .iter()
            .map(|a| a.iter().map(|&x| (x as f64) * (x as f64)).sum())
            .collect();
        let sums: Vec<u32> = layout
            .multiplicities
            .iter()
            .map(|a| a.iter().map(|&x| x as u32).sum())
            .collect();
        let equal_energy = energies.iter().all(|&e| e == energies[0]) && sums.iter().all(|&s| s == sums[0]);
        let (q, k) = (bibd.q() as f64, bibd.k() as f64);
        let gamma = bibd.gamma();
        Ok(Self {
            bank: CorrelatorBank::new(bibd, CorrelatorMode::Differential),
            indices: layout.indices.clone(),
            multiplicities: layout.multiplicities.clone(),
            energies,
            equal_energy,
            signal_scale: signal * k / q,
            offset: background * (k - gamma * (q - k)),
        })
    }

    pub fn len(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicities.is_empty()
    }

    pub fn detect(&self, r: &[f64]) -> Result<usize> {
        check_len(self.bank.q, r.len())?;
        let mut scratch = vec![0.0; self.scratch_len()];
        Ok(self.detect_with(r, &mut scratch))
    }

    pub fn scratch_len(&self) -> usize {
        self.bank.q + self.indices.len() + self.multiplicities.len()
    }

    /// `scratch` must hold at least [`Self::scratch_len`] values.
    pub fn detect_with(&self, r: &[f64], scratch: &mut [f64]) -> usize {
        let q = self.bank.q;
        let (z, rest) = scratch.split_at_mut(q);
        let (zu, scores) = rest.split_at_mut(self.indices.len());
        let scores = &mut scores[..self.multiplicities.len()];
        self.bank.correlate_into(r, z);
        for (o, &idx) in zu.iter_mut().zip(&self.indices) {
            *o = if self.equal_energy { z[idx] } else { z[idx] - self.offset };
        }
        for ((s, a), &e) in scores.iter_mut().zip(&self.multiplicities).zip(&self.energies) {
            let corr: f64 = a
                .iter()
                .zip(zu.iter())
                .filter(|(&x, _)| x != 0)
                .map(|(&x, &v)| x as f64 * v)
                .sum();
            *s = if self.equal_energy {
                corr
            } else {
                corr - 0.5 * self.signal_scale * e
            };
        }
        argmax_lowest(scores)
    }
}

pub fn detect_meppm(
    r: &[f64],
    constellation: &Constellation,
    bibd: &BibdCode,
    signal: f64,
    background: f64,
) -> Result<usize> {
    MeppmDetector::new(constellation, bibd, signal, background)?.detect(r)
}

/// CCM receiver: correlation against every cyclic shift of the OOC word.
#[derive(Debug, Clone, PartialEq)]
pub struct CcmDetector {
    len: usize,
    positions: Vec<usize>,
}

impl CcmDetector {
    pub fn new(word: &Codeword) -> Self {
        Self {
            len: word.len(),
            positions: word.positions(),
        }
    }

    /// `scratch` must hold at least `L` values.
    pub fn detect_with(&self, r: &[f64], scratch: &mut [f64]) -> usize {
        let y = &mut scratch[..self.len];
        cyclic_sums(r, &self.positions, y);
        argmax_lowest(y)
    }
}

/// `argmax_m <r, d^(m)>`.
pub fn detect_ccm(r: &[f64], word: &Codeword) -> Result<usize> {
    check_len(word.len(), r.len())?;
    let mut scratch = vec![0.0; r.len()];
    Ok(CcmDetector::new(word).detect_with(r, &mut scratch))
}

/// A detector bound to one user, ready for repeated decisions.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    Correlation(CmeppmCorrelator),
    Sud(SudDetector),
    Meppm(MeppmDetector),
    Ccm(CcmDetector),
}

impl Detector {
    pub fn scratch_len(&self, slots: usize) -> usize {
        match self {
            Detector::Correlation(_) => 2 * slots,
            Detector::Sud(_) | Detector::Ccm(_) => slots,
            Detector::Meppm(d) => d.scratch_len(),
        }
    }

    pub fn detect_with(&self, r: &[f64], scratch: &mut [f64]) -> usize {
        match self {
            Detector::Correlation(d) => d.detect_with(r, scratch),
            Detector::Sud(d) => d.detect_with(r, scratch),
            Detector::Meppm(d) => d.detect_with(r, scratch),
            Detector::Ccm(d) => d.detect_with(r, scratch),
        }
    }

    pub fn detect(&self, r: &[f64]) -> usize {
        let mut scratch = vec![0.0; self.scratch_len(r.len())];
        self.detect_with(r, &mut scratch)
    }
}
