//! Seeded, parallel symbol-error simulation.
//!
//! Trial `t` draws from its own ChaCha8 stream (`stream = t`) under the
//! master seed, and outcomes are folded in trial order, so counts depend
//! only on the seed and the configuration, never on the worker count.

use std::time::{Duration, Instant};

use meppm_core::link::{Link, TrialOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Config, SchemeName};
use crate::error::AppError;

const BATCH: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Trial budget.
    pub trials: u64,
    /// Stop once this many symbol errors are seen; zero never stops early.
    pub target_errors: u64,
    pub seed: u64,
    /// Zero uses every available core.
    pub workers: usize,
}

impl RunOptions {
    pub fn from_config(config: &Config) -> Self {
        Self {
            trials: config.trials,
            target_errors: config.target_errors,
            seed: config.seed,
            workers: config.workers,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerResult {
    pub trials: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub ser: f64,
    pub ber: f64,
    /// Half-width of the normal-approximation 95% interval on `ber`,
    /// from the spread of per-trial bit-error fractions.
    pub ci95: f64,
    pub wall_time: Duration,
}

impl BerResult {
    /// Same counts, ignoring wall time.
    pub fn same_counts(&self, other: &BerResult) -> bool {
        (self.trials, self.symbol_errors, self.bit_errors) == (other.trials, other.symbol_errors, other.bit_errors)
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs trials until the budget or the error target is reached.
pub fn run_point(link: &Link, options: &RunOptions) -> Result<BerResult, AppError> {
    if options.trials == 0 {
        return Err(AppError::Config("run.trials: must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| AppError::Runtime(format!("thread pool: {e}")))?;
    let bits = link.bits_per_symbol() as f64;
    let started = Instant::now();

    let (mut trials, mut symbol_errors, mut bit_errors, mut sq) = (0u64, 0u64, 0u64, 0f64);
    let mut next = 0u64;
    'outer: while next < options.trials {
        let end = (next + BATCH).min(options.trials);
        let outcomes: Vec<TrialOutcome> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map_init(
                    || link.scratch(),
                    |scratch, t| link.run_trial_with(&mut trial_rng(options.seed, t), scratch),
                )
                .collect()
        });
        for outcome in outcomes {
            trials += 1;
            if outcome.symbol_error() {
                assert!(outcome.bit_errors >= 1, "a symbol error must flip at least one bit");
                symbol_errors += 1;
                bit_errors += outcome.bit_errors as u64;
                let f = outcome.bit_errors as f64 / bits;
                sq += f * f;
            }
            if options.target_errors > 0 && symbol_errors >= options.target_errors {
                break 'outer;
            }
        }
        next = end;
    }

    let n = trials as f64;
    let ser = symbol_errors as f64 / n;
    let ber = bit_errors as f64 / (n * bits);
    let ci95 = if trials > 1 {
        let var = ((sq - n * ber * ber) / (n - 1.0)).max(0.0);
        1.96 * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(BerResult {
        trials,
        symbol_errors,
        bit_errors,
        ser,
        ber,
        ci95,
        wall_time: started.elapsed(),
    })
}

/// Seed for sweep point `index`; point 0 keeps the master seed.
pub fn derive_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Users,
    PeakPower,
    SignalPhotons,
    Scheme,
}

impl SweepVariable {
    pub fn parse(name: &str) -> Result<Self, AppError> {
        match name {
            "users" | "users.count" | "n" => Ok(SweepVariable::Users),
            "p0" | "p0_w" | "channel.p0_w" => Ok(SweepVariable::PeakPower),
            "lambda0" | "signal_photons" | "channel.signal_photons" => Ok(SweepVariable::SignalPhotons),
            "scheme" | "scheme.type" => Ok(SweepVariable::Scheme),
            _ => Err(AppError::Config(format!(
                "unknown sweep variable {name:?}; use users, p0_w, signal_photons or scheme"
            ))),
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            SweepVariable::Users => "users.count",
            SweepVariable::PeakPower => "channel.p0_w",
            SweepVariable::SignalPhotons => "channel.signal_photons",
            SweepVariable::Scheme => "scheme.type",
        }
    }

    /// The configuration for one sweep value.
    pub fn apply(self, config: &Config, value: &str) -> Result<Config, AppError> {
        let mut overrides = vec![format!("{}={value}", self.key())];
        if self == SweepVariable::Scheme {
            // Detector choices rarely carry across schemes.
            overrides.push("detector.type=null".into());
        }
        let mut out = config.with_overrides(&overrides)?;
        if self == SweepVariable::Users && out.desired > out.n_users {
            out.desired = 1;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub config: Config,
    pub result: BerResult,
}

/// One simulation per value, in input order, with seeds from [`derive_seed`].
pub fn sweep(config: &Config, variable: SweepVariable, values: &[String]) -> Result<Vec<SweepPoint>, AppError> {
    if values.is_empty() {
        return Err(AppError::Config("sweep needs at least one value".into()));
    }
    sweep_configs(config, variable, values)?
        .into_iter()
        .map(|config| {
            let link = Link::new(config.link_spec()?)?;
            let result = run_point(&link, &RunOptions::from_config(&config))?;
            Ok(SweepPoint { config, result })
        })
        .collect()
}

/// The per-value configurations a sweep runs, seeds already derived.
pub fn sweep_configs(config: &Config, variable: SweepVariable, values: &[String]) -> Result<Vec<Config>, AppError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut c = variable.apply(config, v)?;
            c.seed = derive_seed(config.seed, i);
            if variable == SweepVariable::Scheme && c.scheme == SchemeName::Eppm {
                c.n_users = 1;
                c.desired = 1;
            }
            Ok(c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Config {
        Config::default()
            .with_overrides(&[
                "bibd.source=catalog:13_4_1",
                "ooc.source=catalog:13_3_1",
                "users.count=2",
                "channel.signal_photons=3",
                "channel.background_photons=0.5",
                "run.trials=5000",
                "run.target_errors=0",
            ])
            .unwrap()
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let config = toy();
        let link = Link::new(config.link_spec().unwrap()).unwrap();
        let mut opts = RunOptions::from_config(&config);
        opts.workers = 1;
        let serial = run_point(&link, &opts).unwrap();
        opts.workers = 4;
        let parallel = run_point(&link, &opts).unwrap();
        assert!(serial.same_counts(&parallel));
        assert!(serial.symbol_errors > 0);
        assert_eq!(serial.ci95, parallel.ci95);
    }

    #[test]
    fn stops_at_target() {
        let config = toy().with_overrides(&["run.target_errors=25"]).unwrap();
        let link = Link::new(config.link_spec().unwrap()).unwrap();
        let r = run_point(&link, &RunOptions::from_config(&config)).unwrap();
        assert_eq!(r.symbol_errors, 25);
        assert!(r.trials < 5000);
        assert!(r.ser >= r.ber);
    }

    #[test]
    fn single_value_sweep_is_run_point() {
        let config = toy();
        let swept = sweep(&config, SweepVariable::Users, &["2".into()]).unwrap();
        let link = Link::new(config.link_spec().unwrap()).unwrap();
        let direct = run_point(&link, &RunOptions::from_config(&config)).unwrap();
        assert!(swept[0].result.same_counts(&direct));
        assert!(sweep(&config, SweepVariable::Users, &[]).is_err());
    }

    #[test]
    fn seeds_differ_per_point() {
        assert_eq!(derive_seed(9, 0), 9);
        assert_ne!(derive_seed(9, 1), derive_seed(9, 2));
    }
}
