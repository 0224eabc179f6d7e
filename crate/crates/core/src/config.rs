//! JSON configuration files and scheme CSVs.
//!
//! Every config struct rejects unknown keys and fills absent ones from its
//! documented defaults; `--print-defaults` prints those defaults verbatim.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grade::CreditGrade;
use crate::pricing::{LossMode, PutInputs};
use crate::scheme::{MembershipMix, Scheme, Sponsor};
use crate::sim::SimulationConfig;
use crate::stress::{InsurerBalanceSheet, StressParams};

/// Input for the `stress` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressConfig {
    pub balance_sheet: InsurerBalanceSheet,
    #[serde(default)]
    pub params: StressParams,
}

impl StressConfig {
    pub fn validate(&self) -> Result<()> {
        self.balance_sheet.validate()?;
        crate::validate::non_negative("params.rcm_floor", self.params.rcm_floor)?;
        crate::validate::non_negative("params.lticr_rate", self.params.lticr_rate)?;
        crate::validate::non_negative("params.minimum_capital_eur", self.params.minimum_capital_eur)?;
        crate::validate::positive("params.eur_fx", self.params.eur_fx)
    }
}

/// Input for the `price-put` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PutConfig {
    pub put: PutInputs,
    #[serde(default)]
    pub pd: f64,
    #[serde(default)]
    pub mode: LossMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    1_000_000
}

impl Default for PutConfig {
    fn default() -> Self {
        PutConfig {
            put: PutInputs {
                assets: 80.0,
                strike_liability: 100.0,
                asset_vol: 0.2,
                risk_free_rate: 0.045,
                horizon: 1.0,
            },
            pd: 0.02,
            mode: LossMode::Independent,
            samples: default_samples(),
            seed: 0,
        }
    }
}

impl PutConfig {
    pub fn validate(&self) -> Result<()> {
        self.put.validate("put.")?;
        crate::validate::unit_interval("pd", self.pd)?;
        crate::validate::at_least_one("samples", self.samples as u64)
    }
}

fn parse_json<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parse and validate a simulation config from JSON text.
pub fn parse_simulation_config(text: &str) -> Result<SimulationConfig> {
    let cfg: SimulationConfig = parse_json(text, Path::new("<inline>"))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Load a simulation config. A relative `population.file` is resolved
/// against the config file's directory.
pub fn load_simulation_config(path: &Path) -> Result<SimulationConfig> {
    let mut cfg: SimulationConfig = parse_json(&read(path)?, path)?;
    if let Some(f) = &cfg.population.file {
        if f.is_relative() {
            let dir = path.parent().unwrap_or(Path::new("."));
            cfg.population.file = Some(dir.join(f));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_stress_config(text: &str) -> Result<StressConfig> {
    let cfg: StressConfig = parse_json(text, Path::new("<inline>"))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_stress_config(path: &Path) -> Result<StressConfig> {
    let cfg: StressConfig = parse_json(&read(path)?, path)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_put_config(text: &str) -> Result<PutConfig> {
    let cfg: PutConfig = parse_json(text, Path::new("<inline>"))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_put_config(path: &Path) -> Result<PutConfig> {
    let cfg: PutConfig = parse_json(&read(path)?, path)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("config types serialise")
}

/// SHA-256 of the compact JSON serialisation, hex encoded.
pub fn checksum<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config types serialise");
    hex::encode(Sha256::digest(&bytes))
}

/// One row of a scheme CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeRecord {
    id: String,
    sponsor_id: String,
    grade: CreditGrade,
    base_pd: f64,
    net_worth: f64,
    full_liability: f64,
    assets: f64,
    equity_share: f64,
    liability_duration: f64,
    share_pensioner: f64,
    share_deferred: f64,
    share_active: f64,
    amortisation_years: u32,
    members: Option<f64>,
}

impl From<SchemeRecord> for Scheme {
    fn from(r: SchemeRecord) -> Self {
        Scheme {
            id: r.id,
            sponsor: Sponsor {
                id: r.sponsor_id,
                grade: r.grade,
                base_pd: r.base_pd,
                net_worth: r.net_worth,
            },
            full_liability: r.full_liability,
            assets: r.assets,
            equity_share: r.equity_share,
            liability_duration: r.liability_duration,
            mix: MembershipMix {
                share_pensioner: r.share_pensioner,
                share_deferred: r.share_deferred,
                share_active: r.share_active,
            },
            amortisation_years: r.amortisation_years,
            members: r.members,
        }
    }
}

impl From<&Scheme> for SchemeRecord {
    fn from(s: &Scheme) -> Self {
        SchemeRecord {
            id: s.id.clone(),
            sponsor_id: s.sponsor.id.clone(),
            grade: s.sponsor.grade,
            base_pd: s.sponsor.base_pd,
            net_worth: s.sponsor.net_worth,
            full_liability: s.full_liability,
            assets: s.assets,
            equity_share: s.equity_share,
            liability_duration: s.liability_duration,
            share_pensioner: s.mix.share_pensioner,
            share_deferred: s.mix.share_deferred,
            share_active: s.mix.share_active,
            amortisation_years: s.amortisation_years,
            members: s.members,
        }
    }
}

/// Read schemes from a CSV with a header row naming the record fields.
pub fn load_schemes_csv(path: &Path) -> Result<Vec<Scheme>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    rdr.deserialize::<SchemeRecord>()
        .map(|r| r.map(Scheme::from).map_err(|e| csv_error(path, e)))
        .collect()
}

pub fn write_schemes_csv(path: &Path, schemes: &[Scheme]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for s in schemes {
        w.serialize(SchemeRecord::from(s)).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse {
            path: PathBuf::from(path),
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_defaults() {
        assert_eq!(parse_simulation_config("{}").unwrap(), SimulationConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_simulation_config(r#"{"horizn": 3}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
        assert!(e.to_string().contains("horizn"));
    }

    #[test]
    fn invariant_violation_names_key() {
        let e = parse_simulation_config(r#"{"population": {"equity_share": 1.3}}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("equity_share") && msg.contains("[0,1]"), "{msg}");
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn round_trip() {
        let cfg = SimulationConfig::default();
        let back = parse_simulation_config(&to_json_pretty(&cfg)).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(checksum(&cfg), checksum(&back));
        let put = PutConfig::default();
        assert_eq!(parse_put_config(&to_json_pretty(&put)).unwrap(), put);
    }

    #[test]
    fn scheme_csv_round_trip() {
        let mut cfg = SimulationConfig::default();
        cfg.population.count = 5;
        let schemes = crate::sim::build_population(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_schemes_csv(&p, &schemes).unwrap();
        assert_eq!(load_schemes_csv(&p).unwrap(), schemes);
    }
}
