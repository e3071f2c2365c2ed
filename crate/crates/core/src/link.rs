//! A complete multiuser downlink: every user's constellation, the channel
//! statistics and the desired user's detector, evaluated one symbol epoch
//! at a time.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::channel::{photon_budget, ChannelParams, LevelSampler, PhotonBudget, Statistics};
use crate::codes::{BibdCode, OocCode};
use crate::detection::{
    sud_weights, CcmDetector, CmeppmCorrelator, CorrelatorMode, Detector, MeppmDetector, SudDetector,
};
use crate::modulation::{
    bits_per_symbol, ccm_constellation, cmeppm_constellation, dmeppm_partition, eppm_constellation,
    meppm_constellation, Constellation, MeppmType, Scheme,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeSpec {
    /// User `n` uses OOC word `n`.
    CodedMeppm { bibd: BibdCode, ooc: OocCode },
    /// Every user gets `set_size` contiguous codewords and `branches` per symbol.
    DividedMeppm {
        bibd: BibdCode,
        set_size: usize,
        branches: usize,
        kind: MeppmType,
    },
    /// User `n` cycles OOC word `n` through its `L` shifts.
    Ccm { ooc: OocCode },
    /// Single-user EPPM over the whole BIBD code.
    Eppm { bibd: BibdCode },
}

impl SchemeSpec {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeSpec::CodedMeppm { .. } => Scheme::CodedMeppm,
            SchemeSpec::DividedMeppm { kind: MeppmType::I, .. } => Scheme::DividedMeppmI,
            SchemeSpec::DividedMeppm { kind: MeppmType::II, .. } => Scheme::DividedMeppmII,
            SchemeSpec::Ccm { .. } => Scheme::Ccm,
            SchemeSpec::Eppm { .. } => Scheme::Eppm,
        }
    }

    pub fn bibd(&self) -> Option<&BibdCode> {
        match self {
            SchemeSpec::CodedMeppm { bibd, .. }
            | SchemeSpec::DividedMeppm { bibd, .. }
            | SchemeSpec::Eppm { bibd } => Some(bibd),
            SchemeSpec::Ccm { .. } => None,
        }
    }

    pub fn ooc(&self) -> Option<&OocCode> {
        match self {
            SchemeSpec::CodedMeppm { ooc, .. } | SchemeSpec::Ccm { ooc } => Some(ooc),
            _ => None,
        }
    }

    /// Builds all `n_users` constellations.
    pub fn constellations(&self, n_users: usize) -> Result<Vec<Constellation>> {
        if n_users == 0 {
            return Err(Error::InvalidParameter("at least one active user is required".into()));
        }
        let need_words = |ooc: &OocCode| {
            if n_users > ooc.len() {
                Err(Error::Oversubscribed {
                    requested: n_users,
                    available: ooc.len(),
                })
            } else {
                Ok(())
            }
        };
        match self {
            SchemeSpec::CodedMeppm { bibd, ooc } => {
                need_words(ooc)?;
                (0..n_users)
                    .map(|n| cmeppm_constellation(bibd, &ooc.words()[n], n_users, n))
                    .collect()
            }
            SchemeSpec::DividedMeppm {
                bibd,
                set_size,
                branches,
                kind,
            } => {
                let partition = dmeppm_partition(bibd, &vec![*set_size; n_users])?;
                partition
                    .sets
                    .iter()
                    .enumerate()
                    .map(|(n, set)| meppm_constellation(bibd, set, *branches, *kind, n_users, n))
                    .collect()
            }
            SchemeSpec::Ccm { ooc } => {
                need_words(ooc)?;
                (0..n_users)
                    .map(|n| ccm_constellation(&ooc.words()[n], n_users, n))
                    .collect()
            }
            SchemeSpec::Eppm { bibd } => {
                if n_users != 1 {
                    return Err(Error::InvalidParameter("EPPM carries a single user".into()));
                }
                Ok(vec![eppm_constellation(bibd)?])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Correlation,
    CorrelationDifferential,
    Sud,
    Meppm,
    Ccm,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Correlation => "correlation",
            DetectorKind::CorrelationDifferential => "correlation-differential",
            DetectorKind::Sud => "sud",
            DetectorKind::Meppm => "meppm",
            DetectorKind::Ccm => "ccm",
        }
    }

    /// The detector used when none is requested.
    pub fn default_for(scheme: Scheme) -> Self {
        match scheme {
            Scheme::CodedMeppm => DetectorKind::Correlation,
            Scheme::DividedMeppmI | Scheme::DividedMeppmII | Scheme::Eppm => DetectorKind::Meppm,
            Scheme::Ccm => DetectorKind::Ccm,
        }
    }

    pub fn supports(self, scheme: Scheme) -> bool {
        match self {
            DetectorKind::Correlation | DetectorKind::CorrelationDifferential | DetectorKind::Sud => {
                scheme == Scheme::CodedMeppm
            }
            DetectorKind::Meppm => matches!(
                scheme,
                Scheme::DividedMeppmI | Scheme::DividedMeppmII | Scheme::Eppm
            ),
            DetectorKind::Ccm => scheme == Scheme::Ccm,
        }
    }
}

/// Where the per-slot photon means come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonSource {
    /// Derived from received powers; slots and constellation size come from the link.
    Physical {
        p0_w: f64,
        pb_w: f64,
        eta: f64,
        wavelength_m: f64,
        bitrate_bps: f64,
    },
    /// Counts per slot given directly.
    Direct { signal: f64, background: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub scheme: SchemeSpec,
    pub n_users: usize,
    /// Zero-based index of the user being detected.
    pub desired: usize,
    pub detector: DetectorKind,
    pub photons: PhotonSource,
    pub stats: Statistics,
}

/// Result of one symbol epoch for the desired user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub sent: usize,
    pub decided: usize,
    pub bit_errors: u32,
}

impl TrialOutcome {
    pub fn symbol_error(&self) -> bool {
        self.sent != self.decided
    }
}

/// Per-thread buffers for [`Link::run_trial_with`].
#[derive(Debug, Clone)]
pub struct TrialScratch {
    levels: Vec<u32>,
    counts: Vec<f64>,
    detector: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Link {
    spec: LinkSpec,
    users: Vec<Constellation>,
    detector: Detector,
    budget: PhotonBudget,
    sampler: LevelSampler,
    bits: u32,
}

impl Link {
    pub fn new(spec: LinkSpec) -> Result<Self> {
        let scheme = spec.scheme.scheme();
        if !spec.detector.supports(scheme) {
            return Err(Error::IncompatibleDetector {
                detector: spec.detector.name(),
                scheme: scheme.name(),
            });
        }
        if spec.desired >= spec.n_users {
            return Err(Error::InvalidParameter(alloc::format!(
                "desired user {} is not among the {} active users",
                spec.desired + 1,
                spec.n_users
            )));
        }
        let users = spec.scheme.constellations(spec.n_users)?;
        let mine = &users[spec.desired];
        let slots = mine.slots();
        let bits = bits_per_symbol(mine.len());
        if bits == 0 {
            return Err(Error::InvalidParameter("the desired user's constellation carries no bits".into()));
        }
        let den = mine.symbols[0].denominator();
        if users.iter().flat_map(|u| &u.symbols).any(|s| s.denominator() != den) {
            return Err(Error::InvalidParameter("users must share an amplitude denominator".into()));
        }

        let budget = match spec.photons {
            PhotonSource::Physical {
                p0_w,
                pb_w,
                eta,
                wavelength_m,
                bitrate_bps,
            } => photon_budget(&ChannelParams {
                p0_w,
                pb_w,
                eta,
                wavelength_m,
                bitrate_bps,
                slots,
                constellation_size: mine.len(),
            })?,
            PhotonSource::Direct { signal, background } => {
                if !(signal >= 0.0 && background >= 0.0 && signal.is_finite() && background.is_finite()) {
                    return Err(Error::InvalidParameter("photon means must be finite and nonnegative".into()));
                }
                PhotonBudget {
                    signal,
                    background,
                    symbol_time: 0.0,
                }
            }
        };

        let max_level: u32 = users
            .iter()
            .map(|u| {
                u.symbols
                    .iter()
                    .flat_map(|s| s.numerators().iter().copied())
                    .max()
                    .unwrap_or(0)
            })
            .sum();
        let sampler = LevelSampler::new(spec.stats, max_level, den, budget.signal, budget.background)?;

        let detector = match (&spec.scheme, spec.detector) {
            (SchemeSpec::CodedMeppm { bibd, ooc }, DetectorKind::Correlation) => Detector::Correlation(
                CmeppmCorrelator::new(bibd, &ooc.words()[spec.desired], CorrelatorMode::Plain)?,
            ),
            (SchemeSpec::CodedMeppm { bibd, ooc }, DetectorKind::CorrelationDifferential) => {
                Detector::Correlation(CmeppmCorrelator::new(
                    bibd,
                    &ooc.words()[spec.desired],
                    CorrelatorMode::Differential,
                )?)
            }
            (SchemeSpec::CodedMeppm { bibd, ooc }, DetectorKind::Sud) => {
                if budget.signal <= 0.0 {
                    return Err(Error::InvalidParameter("the SUD needs a positive signal".into()));
                }
                let weights = sud_weights(
                    &ooc.words()[spec.desired],
                    bibd,
                    spec.n_users,
                    budget.background / budget.signal,
                )?;
                Detector::Sud(SudDetector::new(&weights)?)
            }
            (SchemeSpec::DividedMeppm { bibd, .. } | SchemeSpec::Eppm { bibd }, DetectorKind::Meppm) => {
                Detector::Meppm(MeppmDetector::new(mine, bibd, budget.signal, budget.background)?)
            }
            (SchemeSpec::Ccm { ooc }, DetectorKind::Ccm) => {
                Detector::Ccm(CcmDetector::new(&ooc.words()[spec.desired]))
            }
            _ => unreachable!("compatibility checked above"),
        };

        Ok(Self {
            spec,
            users,
            detector,
            budget,
            sampler,
            bits,
        })
    }

    pub fn spec(&self) -> &LinkSpec {
        &self.spec
    }

    pub fn users(&self) -> &[Constellation] {
        &self.users
    }

    pub fn desired(&self) -> &Constellation {
        &self.users[self.spec.desired]
    }

    pub fn budget(&self) -> PhotonBudget {
        self.budget
    }

    pub fn slots(&self) -> usize {
        self.desired().slots()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    /// Number of desired-user symbols that carry bit labels (`2^b`).
    pub fn labeled_symbols(&self) -> usize {
        1usize << self.bits
    }

    pub fn scratch(&self) -> TrialScratch {
        let slots = self.slots();
        TrialScratch {
            levels: vec![0; slots],
            counts: vec![0.0; slots],
            detector: vec![0.0; self.detector.scratch_len(slots)],
        }
    }

    /// Bit errors between labels; decisions outside the labeled range count
    /// as `ceil(b / 2)` errors.
    pub fn bit_errors(&self, sent: usize, decided: usize) -> u32 {
        if decided >= self.labeled_symbols() {
            self.bits.div_ceil(2)
        } else {
            ((sent ^ decided) as u64).count_ones()
        }
    }

    /// One symbol epoch: the desired user sends one of its `2^b` labeled
    /// symbols, every other user any of its symbols, all uniformly.
    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        let mut scratch = self.scratch();
        self.run_trial_with(rng, &mut scratch)
    }

    pub fn run_trial_with<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut TrialScratch) -> TrialOutcome {
        scratch.levels.iter_mut().for_each(|l| *l = 0);
        let mut sent = 0;
        for (n, user) in self.users.iter().enumerate() {
            let pick = if n == self.spec.desired {
                sent = rng.random_range(0..self.labeled_symbols());
                sent
            } else {
                rng.random_range(0..user.len())
            };
            for (l, &x) in scratch.levels.iter_mut().zip(user.symbols[pick].numerators()) {
                *l += x;
            }
        }
        self.sampler.sample_into(&scratch.levels, rng, &mut scratch.counts);
        let decided = self.detector.detect_with(&scratch.counts, &mut scratch.detector);
        TrialOutcome {
            sent,
            decided,
            bit_errors: if decided == sent { 0 } else { self.bit_errors(sent, decided) },
        }
    }
}
