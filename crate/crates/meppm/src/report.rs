//! Result tables, run manifests and constellation dumps.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use meppm_core::analysis::{
    cmeppm_exact_union_bound, cmeppm_highsnr_bound, cmeppm_mai_ser, dmeppm_ber, ser_to_ber, BoundValue,
    CmeppmAnalysisParams, DmeppmAnalysisParams,
};
use meppm_core::link::{Link, LinkSpec, SchemeSpec};
use meppm_core::modulation::Constellation;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::AppError;
use crate::montecarlo::BerResult;

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub lambda: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub w: Option<usize>,
    pub alpha: Option<usize>,
    pub n_users: usize,
    pub detector: String,
    pub stats_mode: String,
    pub p0_w: f64,
    pub pb_w: f64,
    pub eta: f64,
    pub wavelength_nm: f64,
    pub bitrate_bps: f64,
    pub trials: u64,
    pub symbol_errors: Option<u64>,
    pub bit_errors: Option<u64>,
    pub ser: Option<f64>,
    pub ber: f64,
    pub ci95: Option<f64>,
    pub seed: u64,
    pub source: String,
    pub signal_photons: f64,
    pub background_photons: f64,
}

struct CodeColumns {
    q: Option<usize>,
    k: Option<usize>,
    lambda: Option<usize>,
    l: Option<usize>,
    w: Option<usize>,
    alpha: Option<usize>,
}

fn code_columns(spec: &LinkSpec) -> CodeColumns {
    let bibd = spec.scheme.bibd();
    let ooc = spec.scheme.ooc();
    CodeColumns {
        q: bibd.map(|b| b.q()),
        k: bibd.map(|b| b.k()),
        lambda: bibd.map(|b| b.lambda()),
        l: ooc.map(|o| o.length()),
        w: ooc.map(|o| o.weight()),
        alpha: ooc.map(|o| o.alpha()),
    }
}

fn base_row(config: &Config, link: &Link) -> ResultRow {
    let spec = link.spec();
    let codes = code_columns(spec);
    let budget = link.budget();
    ResultRow {
        scheme: link.desired().scheme.name().to_string(),
        q: codes.q,
        k: codes.k,
        lambda: codes.lambda,
        l: codes.l,
        w: codes.w,
        alpha: codes.alpha,
        n_users: spec.n_users,
        detector: spec.detector.name().to_string(),
        stats_mode: spec.stats.name().to_string(),
        p0_w: config.p0_w,
        pb_w: config.pb_w,
        eta: config.eta,
        wavelength_nm: config.wavelength_nm,
        bitrate_bps: config.bitrate_bps,
        trials: 0,
        symbol_errors: None,
        bit_errors: None,
        ser: None,
        ber: 0.0,
        ci95: None,
        seed: config.seed,
        source: String::new(),
        signal_photons: budget.signal,
        background_photons: budget.background,
    }
}

pub fn simulation_row(config: &Config, link: &Link, result: &BerResult) -> ResultRow {
    ResultRow {
        trials: result.trials,
        symbol_errors: Some(result.symbol_errors),
        bit_errors: Some(result.bit_errors),
        ser: Some(result.ser),
        ber: result.ber,
        ci95: Some(result.ci95),
        source: "simulation".into(),
        ..base_row(config, link)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    /// Noise-free multiple-access interference approximation.
    Mai,
    /// Shot-noise-limited union bound for small `alpha N`.
    HighSnr,
    /// Union bound enumerated over interferer symbols.
    Union,
    /// Divided-MEPPM bit error approximation.
    Dmeppm,
}

impl Formula {
    pub fn parse(name: &str) -> Result<Self, AppError> {
        match name {
            "mai" => Ok(Formula::Mai),
            "high-snr" => Ok(Formula::HighSnr),
            "union" => Ok(Formula::Union),
            "dmeppm" => Ok(Formula::Dmeppm),
            _ => Err(AppError::Config(format!(
                "unknown formula {name:?}; use mai, high-snr, union or dmeppm"
            ))),
        }
    }

    pub fn default_for(spec: &LinkSpec) -> Result<Self, AppError> {
        match spec.scheme {
            SchemeSpec::CodedMeppm { .. } => Ok(Formula::Mai),
            SchemeSpec::DividedMeppm { .. } => Ok(Formula::Dmeppm),
            _ => Err(AppError::Config("no closed-form analysis for this scheme".into())),
        }
    }
}

/// Evaluates `formula` for the configured link; `ser` is blank when the
/// formula yields a bit error rate directly.
pub fn analytic_row(config: &Config, link: &Link, formula: Formula) -> Result<ResultRow, AppError> {
    let spec = link.spec();
    let budget = link.budget();
    let size = link.desired().len();
    let (ser, ber): (Option<BoundValue>, f64) = match (&spec.scheme, formula) {
        (SchemeSpec::CodedMeppm { bibd, ooc }, _) if formula != Formula::Dmeppm => {
            let value = match formula {
                Formula::Mai => cmeppm_mai_ser(spec.n_users, ooc.weight(), ooc.alpha(), ooc.length())?,
                Formula::HighSnr => cmeppm_highsnr_bound(&CmeppmAnalysisParams {
                    q: bibd.q(),
                    k: bibd.k(),
                    lambda: bibd.lambda(),
                    length: ooc.length(),
                    weight: ooc.weight(),
                    alpha: ooc.alpha(),
                    n_users: spec.n_users,
                    signal: budget.signal,
                    background: budget.background,
                })?,
                Formula::Union => {
                    cmeppm_exact_union_bound(bibd, ooc, spec.n_users, budget.signal, budget.background)?
                }
                Formula::Dmeppm => unreachable!(),
            };
            (Some(value), ser_to_ber(value.clamped, size)?)
        }
        (
            SchemeSpec::DividedMeppm {
                bibd,
                set_size,
                branches,
                kind,
            },
            Formula::Dmeppm,
        ) => {
            let value = dmeppm_ber(&DmeppmAnalysisParams {
                q: bibd.q(),
                k: bibd.k(),
                lambda: bibd.lambda(),
                branches: vec![*branches; spec.n_users],
                set_size: *set_size,
                kind: *kind,
                signal: budget.signal,
            })?;
            (None, value.clamped)
        }
        _ => {
            return Err(AppError::Config(format!(
                "formula {formula:?} does not apply to {}",
                link.desired().scheme.name()
            )))
        }
    };
    Ok(ResultRow {
        ser: ser.map(|v| v.clamped),
        ber,
        source: "analytic".into(),
        ..base_row(config, link)
    })
}

pub fn write_rows(rows: &[ResultRow]) -> Result<String, AppError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| AppError::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::Runtime(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn read_rows(text: &str) -> Result<Vec<ResultRow>, AppError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<ResultRow>, _>>()
        .map_err(|e| AppError::Runtime(format!("results table: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Run,
    Sweep,
    Analyze,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: String,
    pub values: Vec<String>,
}

/// Everything needed to regenerate a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: Config,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub results: PathBuf,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(command: Command, config: &Config, results: &Path) -> Self {
        let now = unix_now();
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            config: config.clone(),
            seed: config.seed,
            sweep: None,
            formula: None,
            started_unix: now,
            finished_unix: now,
            results: results.to_path_buf(),
            notes: Vec::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished_unix = unix_now();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AppError> {
        serde_json::from_str(text).map_err(|e| AppError::Config(format!("manifest: {e}")))
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// `results.csv` -> `results.manifest.json`.
pub fn manifest_path(results: &Path) -> PathBuf {
    results.with_extension("manifest.json")
}

/// `symbol_index,slot_index,amplitude_num,amplitude_den`, one row per slot,
/// amplitudes in lowest terms.
pub fn constellation_csv(constellation: &Constellation) -> String {
    let mut out = String::from("symbol_index,slot_index,amplitude_num,amplitude_den\n");
    for (m, symbol) in constellation.symbols.iter().enumerate() {
        for j in 0..symbol.len() {
            let a = symbol.amplitude(j);
            out.push_str(&format!("{m},{j},{},{}\n", a.numer(), a.denom()));
        }
    }
    out
}
