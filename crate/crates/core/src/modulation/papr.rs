use alloc::vec;

use num_rational::Ratio;

use super::Constellation;
use crate::{Error, Result};

/// Peak amplitude over time-average amplitude of a trace.
pub fn papr(trace: &[Ratio<u64>]) -> Result<Ratio<u64>> {
    if trace.is_empty() {
        return Err(Error::ZeroAverage);
    }
    let sum: Ratio<u64> = trace.iter().copied().sum();
    if *sum.numer() == 0 {
        return Err(Error::ZeroAverage);
    }
    let peak = trace.iter().copied().max().expect("non-empty");
    let mean = sum / trace.len() as u64;
    Ok(peak / mean)
}

/// Power figures of the aggregate signal when every user sends
/// equiprobable symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsemblePapr {
    /// Largest aggregate amplitude any slot can reach.
    pub peak: Ratio<u64>,
    /// Expected aggregate amplitude per slot.
    pub mean: Ratio<u64>,
    pub papr: Ratio<u64>,
}

/// Exact peak and mean of the superposed users.
///
/// Users pick symbols independently, so the worst slot collects each user's
/// largest amplitude at that slot.
pub fn ensemble_papr(users: &[Constellation]) -> Result<EnsemblePapr> {
    let slots = users.first().ok_or(Error::ZeroAverage)?.slots();
    let mut per_slot_peak = vec![Ratio::<u64>::from_integer(0); slots];
    let mut mean = Ratio::<u64>::from_integer(0);
    for user in users {
        if user.slots() != slots {
            return Err(Error::LengthMismatch {
                expected: slots,
                found: user.slots(),
            });
        }
        if user.is_empty() {
            return Err(Error::ZeroAverage);
        }
        let mut user_peak = vec![Ratio::<u64>::from_integer(0); slots];
        let mut total = Ratio::<u64>::from_integer(0);
        for symbol in &user.symbols {
            for (j, peak) in user_peak.iter_mut().enumerate() {
                *peak = (*peak).max(symbol.amplitude(j));
            }
            total += symbol.slot_sum();
        }
        for (acc, p) in per_slot_peak.iter_mut().zip(user_peak) {
            *acc += p;
        }
        mean += total / (user.len() as u64 * slots as u64);
    }
    if *mean.numer() == 0 {
        return Err(Error::ZeroAverage);
    }
    let peak = per_slot_peak.into_iter().max().expect("slots > 0");
    Ok(EnsemblePapr {
        peak,
        mean,
        papr: peak / mean,
    })
}
