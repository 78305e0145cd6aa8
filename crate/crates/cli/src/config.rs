//! Declarative TOML run configuration. All physical quantities carry their
//! unit in the key name; dBm powers are converted to watts here, at the
//! boundary, so the engine only ever sees SI units.

use std::path::Path;

use serde::Deserialize;

use dronesense::channel::{dbm_to_watts, DEFAULT_NOISE_FLOOR};
use dronesense::{EnvironmentProfile, NetworkConfig, RhoMode};

use crate::AppError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
    pub network: NetworkSection,
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub mc: McSection,
    pub roc: Option<RocSection>,
    pub sweep: Option<SweepSection>,
    pub optimize: Option<OptimizeSection>,
    pub validate: Option<ValidateSection>,
    pub xi_table: Option<XiTableSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub density_per_m2: f64,
    pub ue_power_dbm: f64,
    pub drone_power_dbm: f64,
    pub carrier_freq_ghz: f64,
    /// One-sided noise density in watts; omitted means the negligible floor.
    pub noise_density_w: Option<f64>,
    pub altitude_m: f64,
    /// Probe correlation to the drone signal, default 1.
    pub probe_correlation: Option<f64>,
    /// "fixed-one" (default) or "uniform".
    pub interferer_correlation: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    /// "suburban", "urban", or a custom label; custom labels must override
    /// every sigmoid and excess-loss constant.
    pub label: String,
    pub los_a: Option<f64>,
    pub los_b: Option<f64>,
    pub excess_loss_los_db: Option<f64>,
    pub excess_loss_nlos_db: Option<f64>,
    /// Interference power path-loss exponent gamma_I, default 4.
    pub path_loss_exponent: Option<f64>,
    pub shadowing_sigma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    /// V-sample count for the Monte Carlo evaluation route.
    pub v_samples: Option<usize>,
}

impl McSection {
    pub fn samples(&self) -> usize {
        self.v_samples.unwrap_or(200_000)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RocSection {
    /// "single" (default) or "average".
    pub mode: Option<String>,
    /// Drone ground distance for single-sensor mode.
    pub r0_m: Option<f64>,
    /// Strictly increasing false-alarm targets.
    pub p_fa: Vec<f64>,
    /// Densities to sweep; default is the network density alone.
    pub densities: Option<Vec<f64>>,
    /// Environment labels to sweep ("suburban"/"urban"); default is the
    /// configured environment alone.
    pub environments: Option<Vec<String>>,
    /// Also measure each curve with the signal-level simulator.
    pub with_empirical: Option<bool>,
    pub trials: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub alpha_fa: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
    pub environments: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub alpha_fa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Relative width of the returned density bracket, default 0.01.
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub r0_m: f64,
    /// False-alarm targets whose solved thresholds form the comparison grid.
    pub p_fa: Vec<f64>,
    pub trials: Option<usize>,
    pub tolerance: Option<f64>,
    /// Also write every trial's paired null/alternative RSS.
    pub dump_rss: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiTableSection {
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
    pub points: Option<usize>,
}

pub fn load(path: &Path) -> Result<FileConfig, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        AppError::Usage(format!("cannot read config {}: {e}", path.display()))
    })?;
    toml::from_str(&text)
        .map_err(|e| AppError::Usage(format!("config {}: {e}", path.display())))
}

impl NetworkSection {
    pub fn to_core(&self) -> Result<NetworkConfig, AppError> {
        let rho_mode = match self.interferer_correlation.as_deref() {
            None | Some("fixed-one") => RhoMode::FixedOne,
            Some("uniform") => RhoMode::Uniform,
            Some(other) => {
                return Err(AppError::Usage(format!(
                    "interferer_correlation must be \"fixed-one\" or \"uniform\", got \"{other}\""
                )))
            }
        };
        let cfg = NetworkConfig {
            lambda: self.density_per_m2,
            p_u: dbm_to_watts(self.ue_power_dbm),
            p_d: dbm_to_watts(self.drone_power_dbm),
            f_c: self.carrier_freq_ghz * 1e9,
            n0: self.noise_density_w.unwrap_or(DEFAULT_NOISE_FLOOR),
            h: self.altitude_m,
            rho: self.probe_correlation.unwrap_or(1.0),
            rho_mode,
        };
        cfg.validate()
            .map_err(|e| AppError::Usage(format!("[network] {e}")))?;
        Ok(cfg)
    }
}

impl EnvironmentSection {
    /// Resolve the configured environment. Built-in labels start from the
    /// standard constants; any explicit field overrides them. Custom labels
    /// must spell out all four propagation constants.
    pub fn to_core(&self) -> Result<EnvironmentProfile, AppError> {
        self.resolve(&self.label)
    }

    /// Resolve a (possibly different) label under this section's overrides
    /// for the label-independent knobs (path-loss exponent, shadowing).
    pub fn resolve(&self, label: &str) -> Result<EnvironmentProfile, AppError> {
        let mut env = match label {
            "suburban" => EnvironmentProfile::suburban(),
            "urban" => EnvironmentProfile::urban(),
            custom if custom == self.label => {
                let (Some(a), Some(b), Some(los_db), Some(nlos_db)) = (
                    self.los_a,
                    self.los_b,
                    self.excess_loss_los_db,
                    self.excess_loss_nlos_db,
                ) else {
                    return Err(AppError::Usage(format!(
                        "custom environment \"{custom}\" must set los_a, los_b, \
                         excess_loss_los_db and excess_loss_nlos_db"
                    )));
                };
                EnvironmentProfile {
                    label: custom.to_string(),
                    a,
                    b,
                    eta_los: 10f64.powf(los_db / 10.0),
                    eta_nlos: 10f64.powf(nlos_db / 10.0),
                    gamma_i: 4.0,
                    sigma_s: 0.0,
                }
            }
            other => {
                return Err(AppError::Usage(format!(
                    "unknown environment label \"{other}\" (expected \"suburban\", \
                     \"urban\", or the configured custom label)"
                )))
            }
        };
        // Explicit overrides win over the base profile for built-in labels.
        if label == self.label || matches!(label, "suburban" | "urban") {
            if label == self.label {
                if let Some(a) = self.los_a {
                    env.a = a;
                }
                if let Some(b) = self.los_b {
                    env.b = b;
                }
                if let Some(db) = self.excess_loss_los_db {
                    env.eta_los = 10f64.powf(db / 10.0);
                }
                if let Some(db) = self.excess_loss_nlos_db {
                    env.eta_nlos = 10f64.powf(db / 10.0);
                }
            }
            if let Some(g) = self.path_loss_exponent {
                env.gamma_i = g;
            }
            if let Some(s) = self.shadowing_sigma {
                env.sigma_s = s;
            }
        }
        env.validate()
            .map_err(|e| AppError::Usage(format!("[environment] {e}")))?;
        Ok(env)
    }
}
