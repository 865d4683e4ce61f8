use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::oracles::{EnthalpyConfig, OneDConfig};
use crate::physics::{Geometry, MaterialProps, ScalingMap};
use crate::sampling::{Domain, SamplingConfig};
use crate::training::{LossFlags, TrainingConfig};

/// Preset sizes. `full` follows the reference schedule; `fast` shrinks networks, clouds and
/// epoch counts for smoke runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Fast,
    #[default]
    Full,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Fast => "fast",
            Profile::Full => "full",
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fast" => Ok(Profile::Fast),
            "full" => Ok(Profile::Full),
            other => Err(format!("unknown profile `{other}`, expected `fast` or `full`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Hidden widths shared by the three networks.
    pub hidden: Vec<usize>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { hidden: vec![64, 64, 64, 64] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    pub liquid_constraint: bool,
    pub flux_continuity: bool,
    pub hard_ic_interface: bool,
    pub invert_weight_exponent: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { liquid_constraint: true, flux_continuity: false, hard_ic_interface: false, invert_weight_exponent: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    pub one_d: OneDConfig,
    pub two_d: EnthalpyConfig,
    /// Aspect ratios whose 1D solutions feed pre-training.
    pub pretrain_p: Vec<f64>,
    /// Output positions per snapshot in `oracle1d.csv`.
    pub table_points: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            one_d: OneDConfig::default(),
            two_d: EnthalpyConfig::default(),
            pretrain_p: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            table_points: 101,
        }
    }
}

/// Everything a run needs, read from one TOML document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub profile: Profile,
    pub t_star_max: f64,
    pub materials: MaterialProps,
    pub geometry: Geometry,
    pub network: NetworkConfig,
    pub sampling: SamplingConfig,
    pub training: TrainingConfig,
    pub flags: Flags,
    pub oracle: OracleSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            profile: Profile::Full,
            t_star_max: 4.0,
            materials: MaterialProps::default(),
            geometry: Geometry::default(),
            network: NetworkConfig::default(),
            sampling: SamplingConfig::default(),
            training: TrainingConfig::default(),
            flags: Flags::default(),
            oracle: OracleSettings::default(),
        }
    }
}

impl RunConfig {
    /// Defaults of a profile.
    pub fn for_profile(profile: Profile) -> Self {
        let full = RunConfig::default();
        match profile {
            Profile::Full => full,
            Profile::Fast => RunConfig {
                profile,
                network: NetworkConfig { hidden: vec![32, 32, 32] },
                sampling: SamplingConfig {
                    pcm_points: 1024,
                    fin_points: 512,
                    bc_points: 128,
                    ic_points: 256,
                    interface_points: 256,
                    ..full.sampling
                },
                training: TrainingConfig {
                    n_pre: 1000,
                    pretrain_points: 512,
                    n_adam: 2000,
                    n_cycles: 2,
                    n_lbfgs: 100,
                    ..full.training
                },
                oracle: OracleSettings {
                    one_d: OneDConfig { grid_n: 400, dt: 0.5, ..full.oracle.one_d },
                    two_d: EnthalpyConfig { nx: 64, ny: 32, ..full.oracle.two_d },
                    ..full.oracle
                },
                ..full
            },
        }
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let field = |f: &str, e: &dyn std::fmt::Display| IoError::Config(format!("{f}: {e}"));
        self.materials.validate().map_err(|e| field("materials", &e))?;
        self.geometry.validate().map_err(|e| field("geometry", &e))?;
        self.sampling.validate().map_err(|e| field("sampling", &e))?;
        self.training.validate().map_err(|e| field("training", &e))?;
        self.oracle.one_d.validate().map_err(|e| field("oracle.one_d", &e))?;
        if !(self.t_star_max > 0.0 && self.t_star_max.is_finite()) {
            return Err(field("t_star_max", &format!("must be positive, got {}", self.t_star_max)));
        }
        if self.network.hidden.is_empty() || self.network.hidden.contains(&0) {
            return Err(field("network.hidden", &"needs at least one layer, all widths positive"));
        }
        for &p in &self.oracle.pretrain_p {
            if !(p >= self.geometry.p_min && p <= self.geometry.p_max) {
                return Err(field("oracle.pretrain_p", &format!("{p} outside [{}, {}]", self.geometry.p_min, self.geometry.p_max)));
            }
        }
        if self.oracle.table_points < 2 {
            return Err(field("oracle.table_points", &"must be at least 2"));
        }
        Ok(())
    }

    pub fn scaling(&self) -> Result<ScalingMap, IoError> {
        ScalingMap::new(self.materials.clone(), self.geometry.clone()).map_err(|e| IoError::Config(e.to_string()))
    }

    pub fn domain(&self) -> Result<Domain, IoError> {
        let scaling = self.scaling()?;
        Ok(Domain {
            p_min: self.geometry.p_min,
            p_max: self.geometry.p_max,
            delta_star: scaling.groups().delta_star,
            t_max: self.t_star_max,
        })
    }

    pub fn loss_flags(&self) -> LossFlags {
        LossFlags { liquid_constraint: self.flags.liquid_constraint, flux_continuity: self.flags.flux_continuity }
    }

    /// Training settings with the flag section applied.
    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            invert_weight_exponent: self.training.invert_weight_exponent || self.flags.invert_weight_exponent,
            ..self.training.clone()
        }
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parse a TOML document. Keys absent from the document take the defaults of the selected
/// profile; `profile` overrides the document's own `profile` key when given.
pub fn parse_config_str(text: &str, profile: Option<Profile>) -> Result<RunConfig, IoError> {
    // First pass against the plain defaults reports unknown keys and bad types with positions.
    let direct: RunConfig = toml::from_str(text).map_err(|e| IoError::Config(e.to_string()))?;
    let raw: toml::Value = toml::from_str(text).map_err(|e| IoError::Config(e.to_string()))?;
    let chosen = profile.unwrap_or(direct.profile);
    let mut base = toml::Value::try_from(RunConfig::for_profile(chosen)).map_err(|e| IoError::Config(e.to_string()))?;
    merge(&mut base, raw);
    let mut cfg: RunConfig = base.try_into().map_err(|e: toml::de::Error| IoError::Config(e.to_string()))?;
    cfg.profile = chosen;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path, profile: Option<Profile>) -> Result<RunConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text, profile).map_err(|e| match e {
        IoError::Config(m) => IoError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
