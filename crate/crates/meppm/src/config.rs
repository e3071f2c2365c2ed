//! Flat, dotted-key JSON configuration.
//!
//! ```json
//! { "scheme.type": "c-meppm", "bibd.source": "catalog:341_85_21",
//!   "ooc.source": "catalog:341_5_1", "users.count": 6 }
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::path::Path;

use meppm_core::channel::Statistics;
use meppm_core::codes::{
    cyclotomic_ooc, msequence_difference_set, paley_difference_set, search_ooc, BibdCode, OocCode,
    SearchOptions,
};
use meppm_core::link::{DetectorKind, LinkSpec, PhotonSource, SchemeSpec};
use meppm_core::modulation::MeppmType;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::catalog::{self, CodeFile};
use crate::error::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    CMeppm,
    DMeppm,
    Ccm,
    Eppm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeppmKind {
    I,
    II,
}

impl From<MeppmKind> for MeppmType {
    fn from(k: MeppmKind) -> Self {
        match k {
            MeppmKind::I => MeppmType::I,
            MeppmKind::II => MeppmType::II,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsName {
    Poisson,
    Gaussian,
    Noiseless,
}

impl From<StatsName> for Statistics {
    fn from(s: StatsName) -> Self {
        match s {
            StatsName::Poisson => Statistics::Poisson,
            StatsName::Gaussian => Statistics::Gaussian,
            StatsName::Noiseless => Statistics::Noiseless,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorName {
    Correlation,
    CorrelationDifferential,
    Sud,
    Meppm,
    Ccm,
}

impl From<DetectorName> for DetectorKind {
    fn from(d: DetectorName) -> Self {
        match d {
            DetectorName::Correlation => DetectorKind::Correlation,
            DetectorName::CorrelationDifferential => DetectorKind::CorrelationDifferential,
            DetectorName::Sud => DetectorKind::Sud,
            DetectorName::Meppm => DetectorKind::Meppm,
            DetectorName::Ccm => DetectorKind::Ccm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    #[serde(rename = "scheme.type")]
    pub scheme: SchemeName,
    #[serde(rename = "scheme.meppm_type")]
    pub meppm_type: MeppmKind,
    /// Codewords per user for divided MEPPM.
    #[serde(rename = "scheme.set_size")]
    pub set_size: usize,
    /// Codewords summed per divided-MEPPM symbol.
    #[serde(rename = "scheme.branches")]
    pub branches: usize,
    /// `paley:Q`, `mseq:M`, `catalog:NAME` or `file:PATH`.
    #[serde(rename = "bibd.source")]
    pub bibd: String,
    /// `catalog:NAME`, `file:PATH`, `search:L,W,ALPHA` or `cyclotomic:P,ORDER[,zero]`.
    #[serde(rename = "ooc.source")]
    pub ooc: String,
    #[serde(rename = "ooc.search_seed")]
    pub ooc_search_seed: u64,
    #[serde(rename = "users.count")]
    pub n_users: usize,
    /// One-based.
    #[serde(rename = "users.desired")]
    pub desired: usize,
    #[serde(rename = "channel.p0_w")]
    pub p0_w: f64,
    #[serde(rename = "channel.pb_w")]
    pub pb_w: f64,
    #[serde(rename = "channel.eta")]
    pub eta: f64,
    #[serde(rename = "channel.wavelength_nm")]
    pub wavelength_nm: f64,
    #[serde(rename = "channel.bitrate_bps")]
    pub bitrate_bps: f64,
    /// Overrides the power-derived signal counts per slot.
    #[serde(rename = "channel.signal_photons", skip_serializing_if = "Option::is_none")]
    pub signal_photons: Option<f64>,
    #[serde(rename = "channel.background_photons", skip_serializing_if = "Option::is_none")]
    pub background_photons: Option<f64>,
    #[serde(rename = "channel.stats")]
    pub stats: StatsName,
    #[serde(rename = "detector.type", skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorName>,
    #[serde(rename = "run.trials")]
    pub trials: u64,
    #[serde(rename = "run.target_errors")]
    pub target_errors: u64,
    #[serde(rename = "run.seed")]
    pub seed: u64,
    /// Zero uses every available core.
    #[serde(rename = "run.workers")]
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scheme: SchemeName::CMeppm,
            meppm_type: MeppmKind::II,
            set_size: 4,
            branches: 4,
            bibd: "catalog:341_85_21".into(),
            ooc: "catalog:341_5_1".into(),
            ooc_search_seed: 0,
            n_users: 1,
            desired: 1,
            p0_w: 1e-7,
            pb_w: 1e-7,
            eta: 0.8,
            wavelength_nm: 650.0,
            bitrate_bps: 200e6,
            signal_photons: None,
            background_photons: None,
            stats: StatsName::Poisson,
            detector: None,
            trials: 1_000_000,
            target_errors: 100,
            seed: 1,
            workers: 0,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, AppError> {
        let config: Config = serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key=value` overrides; values are read as JSON, or as plain
    /// strings when they are not valid JSON.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self, AppError> {
        let mut map = match serde_json::to_value(self).expect("config serializes") {
            Value::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| AppError::Config(format!("override {item:?} is not key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            map.insert(key.trim().to_string(), value);
        }
        Self::from_map(map)
    }

    fn from_map(map: Map<String, Value>) -> Result<Self, AppError> {
        let config: Config =
            serde_json::from_value(Value::Object(map)).map_err(|e| AppError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |key: &str, why: &str| Err(AppError::Config(format!("{key}: {why}")));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.n_users == 0 {
            return bad("users.count", "must be at least 1");
        }
        if self.desired == 0 || self.desired > self.n_users {
            return bad("users.desired", "must be between 1 and users.count");
        }
        if !positive(self.p0_w) {
            return bad("channel.p0_w", "must be positive");
        }
        if !(self.pb_w.is_finite() && self.pb_w >= 0.0) {
            return bad("channel.pb_w", "must be nonnegative");
        }
        if !positive(self.eta) || self.eta > 1.0 {
            return bad("channel.eta", "must be in (0, 1]");
        }
        if !positive(self.wavelength_nm) {
            return bad("channel.wavelength_nm", "must be positive");
        }
        if !positive(self.bitrate_bps) {
            return bad("channel.bitrate_bps", "must be positive");
        }
        if let Some(s) = self.signal_photons {
            if !(s.is_finite() && s >= 0.0) {
                return bad("channel.signal_photons", "must be nonnegative");
            }
        }
        if let Some(b) = self.background_photons {
            if !(b.is_finite() && b >= 0.0) {
                return bad("channel.background_photons", "must be nonnegative");
            }
        }
        if self.background_photons.is_some() && self.signal_photons.is_none() {
            return bad("channel.background_photons", "needs channel.signal_photons as well");
        }
        if self.trials == 0 {
            return bad("run.trials", "must be at least 1");
        }
        if self.scheme == SchemeName::DMeppm && (self.set_size == 0 || self.branches == 0) {
            return bad("scheme.set_size", "set size and branches must be positive");
        }
        if let Some(d) = self.detector {
            let kind: DetectorKind = d.into();
            if !kind.supports(self.scheme_kind()) {
                return bad("detector.type", "detector does not apply to scheme.type");
            }
        }
        Ok(())
    }

    fn scheme_kind(&self) -> meppm_core::modulation::Scheme {
        use meppm_core::modulation::Scheme;
        match (self.scheme, self.meppm_type) {
            (SchemeName::CMeppm, _) => Scheme::CodedMeppm,
            (SchemeName::DMeppm, MeppmKind::I) => Scheme::DividedMeppmI,
            (SchemeName::DMeppm, MeppmKind::II) => Scheme::DividedMeppmII,
            (SchemeName::Ccm, _) => Scheme::Ccm,
            (SchemeName::Eppm, _) => Scheme::Eppm,
        }
    }

    pub fn detector_kind(&self) -> DetectorKind {
        self.detector
            .map(Into::into)
            .unwrap_or_else(|| DetectorKind::default_for(self.scheme_kind()))
    }

    pub fn photon_source(&self) -> PhotonSource {
        match self.signal_photons {
            Some(signal) => PhotonSource::Direct {
                signal,
                background: self.background_photons.unwrap_or(0.0),
            },
            None => PhotonSource::Physical {
                p0_w: self.p0_w,
                pb_w: self.pb_w,
                eta: self.eta,
                wavelength_m: self.wavelength_nm * 1e-9,
                bitrate_bps: self.bitrate_bps,
            },
        }
    }

    pub fn load_bibd(&self) -> Result<BibdCode, AppError> {
        let (kind, arg) = split_source("bibd.source", &self.bibd)?;
        let number = |what: &str| {
            arg.parse::<u32>()
                .map_err(|_| AppError::Config(format!("bibd.source: {what} expects an integer, got {arg:?}")))
        };
        match kind {
            "paley" => Ok(paley_difference_set(number("paley")?)?),
            "mseq" => Ok(msequence_difference_set(number("mseq")?)?),
            "catalog" => catalog::bundled_bibd(arg),
            "file" => match catalog::load_code(Path::new(arg))? {
                CodeFile::Bibd(c) => Ok(c),
                CodeFile::Ooc(_) => Err(AppError::Config(format!("bibd.source: {arg} holds an OOC"))),
            },
            _ => Err(AppError::Config(format!("bibd.source: unknown source kind {kind:?}"))),
        }
    }

    pub fn load_ooc(&self) -> Result<OocCode, AppError> {
        let (kind, arg) = split_source("ooc.source", &self.ooc)?;
        let numbers = || {
            arg.split(',')
                .filter(|s| *s != "zero")
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| AppError::Config(format!("ooc.source: bad parameter list {arg:?}")))
        };
        match kind {
            "catalog" => catalog::bundled_ooc(arg),
            "file" => match catalog::load_code(Path::new(arg))? {
                CodeFile::Ooc(c) => Ok(c),
                CodeFile::Bibd(_) => Err(AppError::Config(format!("ooc.source: {arg} holds a BIBD"))),
            },
            "search" => match numbers()?.as_slice() {
                &[l, w, alpha] => Ok(search_ooc(
                    l,
                    w,
                    alpha,
                    self.n_users,
                    SearchOptions {
                        seed: self.ooc_search_seed,
                        local_steps: 100_000,
                        ..SearchOptions::default()
                    },
                )?),
                _ => Err(AppError::Config("ooc.source: search needs L,W,ALPHA".into())),
            },
            "cyclotomic" => match numbers()?.as_slice() {
                &[p, order] => Ok(cyclotomic_ooc(p, order, arg.ends_with(",zero"))?),
                _ => Err(AppError::Config("ooc.source: cyclotomic needs P,ORDER[,zero]".into())),
            },
            _ => Err(AppError::Config(format!("ooc.source: unknown source kind {kind:?}"))),
        }
    }

    /// Loads the codes the scheme needs and assembles the link description.
    pub fn link_spec(&self) -> Result<LinkSpec, AppError> {
        self.validate()?;
        let scheme = match self.scheme {
            SchemeName::CMeppm => SchemeSpec::CodedMeppm {
                bibd: self.load_bibd()?,
                ooc: self.load_ooc()?,
            },
            SchemeName::DMeppm => SchemeSpec::DividedMeppm {
                bibd: self.load_bibd()?,
                set_size: self.set_size,
                branches: self.branches,
                kind: self.meppm_type.into(),
            },
            SchemeName::Ccm => SchemeSpec::Ccm { ooc: self.load_ooc()? },
            SchemeName::Eppm => SchemeSpec::Eppm { bibd: self.load_bibd()? },
        };
        Ok(LinkSpec {
            scheme,
            n_users: self.n_users,
            desired: self.desired - 1,
            detector: self.detector_kind(),
            photons: self.photon_source(),
            stats: self.stats.into(),
        })
    }
}

fn split_source<'a>(key: &str, source: &'a str) -> Result<(&'a str, &'a str), AppError> {
    source
        .split_once(':')
        .ok_or_else(|| AppError::Config(format!("{key}: expected KIND:ARGUMENT, got {source:?}")))
}
