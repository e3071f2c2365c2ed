//! Closed-form error-rate approximations and an enumerated union bound.

use alloc::vec::Vec;

use crate::codes::{BibdCode, OocCode};
use crate::modulation::{cmeppm_constellation, MeppmType, Symbol};
use crate::{Error, Result};

/// Largest interferer-combination count the union bound will enumerate.
pub const UNION_BOUND_LIMIT: u128 = 10_000_000;

/// A bound or approximation as computed, and clamped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub raw: f64,
    pub clamped: f64,
}

impl BoundValue {
    pub fn new(raw: f64) -> Self {
        Self {
            raw,
            clamped: raw.clamp(0.0, 1.0),
        }
    }
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Parameters of a coded-MEPPM link with the correlation receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmeppmAnalysisParams {
    pub q: usize,
    pub k: usize,
    pub lambda: usize,
    pub length: usize,
    pub weight: usize,
    pub alpha: usize,
    pub n_users: usize,
    /// Peak counts per slot.
    pub signal: f64,
    /// Background counts per slot.
    pub background: f64,
}

impl CmeppmAnalysisParams {
    pub fn validate(&self) -> Result<()> {
        if self.length != self.q {
            return Err(Error::InvalidParameter("OOC length must equal the BIBD length".into()));
        }
        if self.n_users == 0 || self.weight == 0 || self.k == 0 {
            return Err(Error::InvalidParameter("users, OOC weight and BIBD weight must be positive".into()));
        }
        if !(self.signal >= 0.0 && self.background >= 0.0) {
            return Err(Error::InvalidParameter("photon counts must be nonnegative".into()));
        }
        Ok(())
    }

    /// Worst-case mean of `y_{m1} - y_{m'}`: `(L0 K / (N w)) (w - alpha N)`.
    pub fn min_mean(&self) -> f64 {
        let (w, n) = (self.weight as f64, self.n_users as f64);
        self.signal * self.k as f64 / (n * w) * (w - self.alpha as f64 * n)
    }

    /// Largest variance of `y_{m1} - y_{m'}`: `2 L0 lambda w (w - 1) + mu`.
    pub fn max_variance(&self) -> f64 {
        let w = self.weight as f64;
        2.0 * self.signal * self.lambda as f64 * w * (w - 1.0) + self.min_mean()
    }
}

/// Shot-noise-limited upper bound `(w^2 / (2 alpha)) erfc(mu / (sqrt(2) sigma))`.
///
/// Only meaningful while `alpha N < w`; otherwise the worst-case mean is not
/// positive and [`Error::RegimeViolation`] points callers at
/// [`cmeppm_mai_ser`].
pub fn cmeppm_highsnr_bound(params: &CmeppmAnalysisParams) -> Result<BoundValue> {
    params.validate()?;
    if params.alpha == 0 {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let alpha_n = params.alpha * params.n_users;
    if alpha_n >= params.weight {
        return Err(Error::RegimeViolation {
            alpha_n,
            w: params.weight,
        });
    }
    let mu = params.min_mean();
    let sigma = libm::sqrt(params.max_variance());
    let w = params.weight as f64;
    let multiplicity = w * w / (2.0 * params.alpha as f64);
    let tail = if sigma > 0.0 {
        erfc(mu / (core::f64::consts::SQRT_2 * sigma))
    } else {
        0.0
    };
    Ok(BoundValue::new(multiplicity * tail))
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that an interfering pulse lands on a competing symbol only:
/// `w (w - alpha) / L`.
pub fn interference_probability(weight: usize, alpha: usize, length: usize) -> Result<f64> {
    if length == 0 || alpha > weight {
        return Err(Error::InvalidParameter("need L > 0 and alpha <= w".into()));
    }
    let p = (weight * (weight - alpha)) as f64 / length as f64;
    if p >= 1.0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "interference probability {p} is not below one"
        )));
    }
    Ok(p)
}

/// Noise-free MAI approximation `w^2 C(N-1, w-1) p^(w-1) (1-p)^(N-w)`.
pub fn cmeppm_mai_ser(n_users: usize, weight: usize, alpha: usize, length: usize) -> Result<BoundValue> {
    if n_users == 0 || weight == 0 {
        return Err(Error::InvalidParameter("users and OOC weight must be positive".into()));
    }
    let p = interference_probability(weight, alpha, length)?;
    if n_users < weight {
        return Ok(BoundValue::new(0.0));
    }
    let w = weight as f64;
    let raw = w
        * w
        * binomial_f64(n_users - 1, weight - 1)
        * libm::pow(p, (weight - 1) as f64)
        * libm::pow(1.0 - p, (n_users - weight) as f64);
    Ok(BoundValue::new(raw))
}

/// Pairwise error probability before the small-`p` simplification:
/// `sum_{j=0}^{N-w} B(j) sum_{i=w-1+j}^{N-1} B(i)`, `B(i) = C(N-1,i) p^i (1-p)^(N-1-i)`.
pub fn cmeppm_mai_pairwise(n_users: usize, weight: usize, alpha: usize, length: usize) -> Result<f64> {
    if n_users == 0 || weight == 0 {
        return Err(Error::InvalidParameter("users and OOC weight must be positive".into()));
    }
    let p = interference_probability(weight, alpha, length)?;
    if n_users < weight {
        return Ok(0.0);
    }
    let trials = n_users - 1;
    let pmf = |i: usize| {
        binomial_f64(trials, i) * libm::pow(p, i as f64) * libm::pow(1.0 - p, (trials - i) as f64)
    };
    let total = (0..=n_users - weight)
        .map(|j| pmf(j) * (weight - 1 + j..=trials).map(pmf).sum::<f64>())
        .sum();
    Ok(total)
}

/// Gaussian tail `P(X < 0)` for `X ~ N(mean, var)`; degenerate variance gives 0, 1/2 or 1.
fn gaussian_below_zero(mean: f64, var: f64) -> f64 {
    if var > 0.0 {
        0.5 * erfc(mean / libm::sqrt(2.0 * var))
    } else if mean > 0.0 {
        0.0
    } else if mean == 0.0 {
        0.5
    } else {
        1.0
    }
}

/// Union bound on the correlation receiver's symbol error rate, averaged
/// exactly over every combination of interfering symbols.
///
/// The desired user sends with OOC word 0, interferers with words `1..N`.
/// Each pairwise term uses the Gaussian approximation of `y_{m1} - y_{m'}`
/// with its exact conditional mean and variance (background included).
/// The bound is invariant under a common rotation of all users, so the
/// desired symbol is fixed at index 0.
pub fn cmeppm_exact_union_bound(
    bibd: &BibdCode,
    ooc: &OocCode,
    n_users: usize,
    signal: f64,
    background: f64,
) -> Result<BoundValue> {
    if n_users == 0 || n_users > ooc.len() {
        return Err(Error::Oversubscribed {
            requested: n_users,
            available: ooc.len(),
        });
    }
    if !(signal >= 0.0 && background >= 0.0) {
        return Err(Error::InvalidParameter("photon counts must be nonnegative".into()));
    }
    let q = bibd.q();
    let combos = (q as u128).checked_pow(n_users as u32 - 1).unwrap_or(u128::MAX);
    if combos > UNION_BOUND_LIMIT {
        return Err(Error::EnumerationLimit {
            terms: combos,
            limit: UNION_BOUND_LIMIT,
        });
    }
    let users: Vec<Vec<Symbol>> = (0..n_users)
        .map(|n| cmeppm_constellation(bibd, &ooc.words()[n], n_users, n).map(|c| c.symbols))
        .collect::<Result<_>>()?;
    let den = users[0][0].denominator() as f64;
    let sent = users[0][0].numerators();
    let diffs: Vec<Vec<f64>> = (1..q)
        .map(|m| {
            let other = users[0][m].numerators();
            sent.iter().zip(other).map(|(&a, &b)| a as f64 - b as f64).collect()
        })
        .collect();

    let mut digits = alloc::vec![0usize; n_users - 1];
    let mut aggregate = alloc::vec![0u32; q];
    let mut means = alloc::vec![0.0; q];
    let mut total = 0.0;
    loop {
        aggregate.copy_from_slice(sent);
        for (n, &m) in digits.iter().enumerate() {
            for (a, &x) in aggregate.iter_mut().zip(users[n + 1][m].numerators()) {
                *a += x;
            }
        }
        for (e, &a) in means.iter_mut().zip(&aggregate) {
            *e = signal * a as f64 / den + background;
        }
        for g in &diffs {
            let (mut mean, mut var) = (0.0, 0.0);
            for (&e, &gj) in means.iter().zip(g) {
                mean += e * gj;
                var += e * gj * gj;
            }
            total += gaussian_below_zero(mean, var);
        }
        // Next interferer combination, odometer style.
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(BoundValue::new(total / combos as f64));
            }
            digits[pos] += 1;
            if digits[pos] < q {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Parameters of a divided-MEPPM link.
#[derive(Debug, Clone, PartialEq)]
pub struct DmeppmAnalysisParams {
    pub q: usize,
    pub k: usize,
    pub lambda: usize,
    /// Branches of every active user; the desired user is first.
    pub branches: Vec<usize>,
    /// Codewords assigned to the desired user.
    pub set_size: usize,
    pub kind: MeppmType,
    /// Peak counts per slot.
    pub signal: f64,
}

/// Error multiplicity `M'` for the desired user's constellation.
pub fn dmeppm_multiplicity(kind: MeppmType, branches: usize, set_size: usize) -> Result<f64> {
    let (l, q) = (branches as f64, set_size as f64);
    match kind {
        MeppmType::I => {
            if branches > set_size {
                return Err(Error::InvalidParameter("type-I needs branches <= set size".into()));
            }
            Ok(l * (q - l) / 8.0)
        }
        MeppmType::II => {
            if set_size + branches <= 2 {
                return Err(Error::InvalidParameter(
                    "type-II multiplicity needs set size + branches > 2".into(),
                ));
            }
            Ok(l * q * q * (q - 1.0) * (q - 1.0) / (8.0 * (q + l) * (q + l - 1.0) * (q + l - 2.0)))
        }
    }
}

/// `P_b ~ M' erfc(sqrt((K - lambda)^2 (L0 / Q) / (sum(l) lambda K + (K - 2 lambda) K)))`.
pub fn dmeppm_ber(params: &DmeppmAnalysisParams) -> Result<BoundValue> {
    let first = *params
        .branches
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one user is required".into()))?;
    if params.q == 0 || params.lambda >= params.k {
        return Err(Error::InvalidParameter("need Q > 0 and lambda < K".into()));
    }
    if !(params.signal >= 0.0) {
        return Err(Error::InvalidParameter("photon counts must be nonnegative".into()));
    }
    let multiplicity = dmeppm_multiplicity(params.kind, first, params.set_size)?;
    if multiplicity == 0.0 {
        return Err(Error::InvalidParameter(
            "degenerate constellation: every branch is always on".into(),
        ));
    }
    let (k, lambda) = (params.k as f64, params.lambda as f64);
    let total_branches: usize = params.branches.iter().sum();
    let variance = total_branches as f64 * lambda * k + (k - 2.0 * lambda) * k;
    if variance <= 0.0 {
        return Err(Error::InvalidParameter("nonpositive variance term".into()));
    }
    let arg = libm::sqrt((k - lambda) * (k - lambda) * (params.signal / params.q as f64) / variance);
    Ok(BoundValue::new(multiplicity * erfc(arg)))
}

/// Symbol to bit error rate under uniformly spread symbol errors:
/// `ser 2^(b-1) / (2^b - 1)` with `b = floor(log2 M)`.
pub fn ser_to_ber(ser: f64, size: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&ser) {
        return Err(Error::InvalidParameter(alloc::format!("symbol error rate {ser} outside [0, 1]")));
    }
    let b = crate::modulation::bits_per_symbol(size);
    if b == 0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "constellation of size {size} carries no bits"
        )));
    }
    let half = libm::pow(2.0, (b - 1) as f64);
    Ok(ser * half / (2.0 * half - 1.0))
}
