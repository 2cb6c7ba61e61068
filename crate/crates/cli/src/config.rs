use std::path::PathBuf;

use qkd_pon_core::SystemParams;
use serde::Deserialize;

use crate::args::{CommonArgs, Format};

/// Config-file schema: every key mirrors a flag name with dashes turned into
/// underscores. Unknown keys are rejected so typos fail loudly.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub users: Option<u32>,
    pub n1: Option<u32>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub mu: Option<f64>,
    pub eta: Option<f64>,
    pub dark: Option<f64>,
    pub visibility: Option<f64>,
    pub alpha_db_per_km: Option<f64>,
    pub pulse_rate: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub pulses: Option<u64>,
    pub partitions: Option<u32>,
}

/// Fully resolved run inputs: command line over config file over defaults.
#[derive(Debug)]
pub struct Resolved {
    pub params: SystemParams,
    pub n_users: u32,
    pub n1: Option<u32>,
    pub l1_km: f64,
    pub l2_km: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub pulses: Option<u64>,
    pub partitions: u32,
}

impl Resolved {
    pub fn from_args(common: &CommonArgs, n1_flag: Option<u32>) -> Result<Resolved, String> {
        let file = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|err| format!("cannot read config {}: {err}", path.display()))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|err| format!("invalid config {}: {err}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let defaults = SystemParams::default();
        Ok(Resolved {
            params: SystemParams {
                mu: common.mu.or(file.mu).unwrap_or(defaults.mu),
                eta: common.eta.or(file.eta).unwrap_or(defaults.eta),
                dark_rate: common.dark.or(file.dark).unwrap_or(defaults.dark_rate),
                visibility: common
                    .visibility
                    .or(file.visibility)
                    .unwrap_or(defaults.visibility),
                alpha_db_per_km: common
                    .alpha_db_per_km
                    .or(file.alpha_db_per_km)
                    .unwrap_or(defaults.alpha_db_per_km),
                pulse_rate: common
                    .pulse_rate
                    .or(file.pulse_rate)
                    .unwrap_or(defaults.pulse_rate),
            },
            n_users: common.users.or(file.users).unwrap_or(64),
            n1: n1_flag.or(file.n1),
            l1_km: common.l1.or(file.l1).unwrap_or(15.0),
            l2_km: common.l2.or(file.l2).unwrap_or(5.0),
            format: common.format.or(file.format).unwrap_or(Format::Json),
            out: common.out.clone().or(file.out),
            seed: file.seed.unwrap_or(0),
            pulses: file.pulses,
            partitions: file.partitions.unwrap_or(1),
        })
    }

    /// The split ratio, which evaluate and simulate cannot do without.
    pub fn require_n1(&self, subcommand: &str) -> Result<u32, String> {
        self.n1.ok_or_else(|| {
            format!("{subcommand} needs a split ratio: pass --n1 or set n1 in the config")
        })
    }
}
