//! Photon budget and per-slot photoelectron count sampling.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::modulation::{bits_per_symbol, Symbol};
use crate::{Error, Result};

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Physical downlink parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Peak received optical power, W.
    pub p0_w: f64,
    /// Background optical power, W.
    pub pb_w: f64,
    /// Photodetector quantum efficiency.
    pub eta: f64,
    /// Central wavelength, m.
    pub wavelength_m: f64,
    /// Target bit rate, bit/s.
    pub bitrate_bps: f64,
    /// Slots per symbol.
    pub slots: usize,
    /// Constellation size.
    pub constellation_size: usize,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.p0_w) {
            return Err(Error::InvalidParameter("peak power must be positive".into()));
        }
        if !(self.pb_w.is_finite() && self.pb_w >= 0.0) {
            return Err(Error::InvalidParameter("background power must be nonnegative".into()));
        }
        if !positive(self.eta) || self.eta > 1.0 {
            return Err(Error::InvalidParameter("detector efficiency must be in (0, 1]".into()));
        }
        if !positive(self.wavelength_m) || !positive(self.bitrate_bps) {
            return Err(Error::InvalidParameter("wavelength and bit rate must be positive".into()));
        }
        if self.slots == 0 {
            return Err(Error::InvalidParameter("slots per symbol must be positive".into()));
        }
        if self.constellation_size < 2 {
            return Err(Error::InvalidParameter("constellation must have at least two symbols".into()));
        }
        Ok(())
    }
}

/// Mean photoelectron counts per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBudget {
    /// Counts per slot at peak intensity (Lambda_0).
    pub signal: f64,
    /// Background counts per slot (Lambda_b).
    pub background: f64,
    /// Symbol duration, s.
    pub symbol_time: f64,
}

/// Detected photons per second per watt of received power.
pub fn photon_rate_per_watt(eta: f64, wavelength_m: f64) -> f64 {
    eta * wavelength_m / (PLANCK * SPEED_OF_LIGHT)
}

/// `Lambda = eta * P / (h nu) * T_s / Q` with `T_s = floor(log2 M) / bitrate`.
pub fn photon_budget(params: &ChannelParams) -> Result<PhotonBudget> {
    params.validate()?;
    let symbol_time = bits_per_symbol(params.constellation_size) as f64 / params.bitrate_bps;
    let per_watt = photon_rate_per_watt(params.eta, params.wavelength_m) * symbol_time / params.slots as f64;
    Ok(PhotonBudget {
        signal: per_watt * params.p0_w,
        background: per_watt * params.pb_w,
        symbol_time,
    })
}

/// Slot-wise sum of the users' symbols, kept exact.
pub fn superpose(symbols: &[&Symbol]) -> Result<Symbol> {
    let first = symbols
        .first()
        .ok_or_else(|| Error::InvalidParameter("nothing to superpose".into()))?;
    let len = first.len();
    let mut den: u64 = 1;
    for s in symbols {
        if s.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: s.len(),
            });
        }
        den = lcm(den, s.denominator() as u64);
    }
    let mut num = vec![0u64; len];
    for s in symbols {
        let scale = den / s.denominator() as u64;
        for (acc, &n) in num.iter_mut().zip(s.numerators()) {
            *acc += n as u64 * scale;
        }
    }
    let g = num.iter().fold(den, |g, &n| gcd(g, n));
    let to_u32 = |v: u64| {
        u32::try_from(v).map_err(|_| Error::InvalidParameter("aggregate amplitude overflows".into()))
    };
    Symbol::new(
        num.into_iter().map(|n| to_u32(n / g)).collect::<Result<Vec<_>>>()?,
        to_u32(den / g)?,
    )
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Per-slot received photoelectron counts (real-valued so Gaussian samples fit).
#[derive(Debug, Clone, PartialEq)]
pub struct SlotCounts {
    pub counts: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Poisson,
    /// Normal with variance equal to its mean.
    Gaussian,
    /// Exact means, no shot noise.
    Noiseless,
}

impl Statistics {
    pub fn name(self) -> &'static str {
        match self {
            Statistics::Poisson => "poisson",
            Statistics::Gaussian => "gaussian",
            Statistics::Noiseless => "noiseless",
        }
    }
}

fn slot_means(intensity: &[f64], signal: f64, background: f64) -> Result<Vec<f64>> {
    if !(signal >= 0.0 && background >= 0.0 && signal.is_finite() && background.is_finite()) {
        return Err(Error::InvalidParameter("photon means must be finite and nonnegative".into()));
    }
    intensity
        .iter()
        .enumerate()
        .map(|(slot, &x)| {
            if x < 0.0 || !x.is_finite() {
                Err(Error::NegativeIntensity { slot, value: x })
            } else {
                Ok(signal * x + background)
            }
        })
        .collect()
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        0.0
    } else {
        Poisson::new(mean).expect("finite positive mean").sample(rng)
    }
}

/// Independent `Poisson(signal * x_j + background)` counts.
pub fn sample_poisson<R: Rng + ?Sized>(
    intensity: &[f64],
    signal: f64,
    background: f64,
    rng: &mut R,
) -> Result<SlotCounts> {
    let means = slot_means(intensity, signal, background)?;
    Ok(SlotCounts {
        counts: means.into_iter().map(|m| poisson_draw(m, rng)).collect(),
    })
}

/// Moment-matched normal counts; negatives are kept.
pub fn sample_gaussian<R: Rng + ?Sized>(
    intensity: &[f64],
    signal: f64,
    background: f64,
    rng: &mut R,
) -> Result<SlotCounts> {
    let means = slot_means(intensity, signal, background)?;
    Ok(SlotCounts {
        counts: means
            .into_iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                m + libm::sqrt(m) * z
            })
            .collect(),
    })
}

/// Precomputed samplers for every aggregate amplitude level `n / den`,
/// used on the simulation hot path.
#[derive(Debug, Clone)]
pub struct LevelSampler {
    stats: Statistics,
    means: Vec<f64>,
    sds: Vec<f64>,
    poisson: Vec<Option<Poisson<f64>>>,
}

impl LevelSampler {
    pub fn new(stats: Statistics, max_level: u32, den: u32, signal: f64, background: f64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("denominator must be positive".into()));
        }
        let levels: Vec<f64> = (0..=max_level).map(|n| n as f64 / den as f64).collect();
        let means = slot_means(&levels, signal, background)?;
        let sds = means.iter().map(|&m| libm::sqrt(m)).collect();
        let poisson = means
            .iter()
            .map(|&m| if m > 0.0 { Poisson::new(m).ok() } else { None })
            .collect();
        Ok(Self {
            stats,
            means,
            sds,
            poisson,
        })
    }

    pub fn max_level(&self) -> u32 {
        self.means.len() as u32 - 1
    }

    pub fn mean(&self, level: u32) -> f64 {
        self.means[level as usize]
    }

    /// Fills `out[j]` with a count for aggregate level `levels[j]`.
    pub fn sample_into<R: Rng + ?Sized>(&self, levels: &[u32], rng: &mut R, out: &mut [f64]) {
        for (o, &l) in out.iter_mut().zip(levels) {
            let l = l as usize;
            *o = match self.stats {
                Statistics::Noiseless => self.means[l],
                Statistics::Poisson => self.poisson[l].as_ref().map_or(0.0, |p| p.sample(rng)),
                Statistics::Gaussian => {
                    let z: f64 = StandardNormal.sample(rng);
                    self.means[l] + self.sds[l] * z
                }
            };
        }
    }
}
