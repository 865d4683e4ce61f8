//! Background Latin-hypercube clouds, curvature-weighted refinement near the predicted
//! interface, and phase classification of collocation points.

mod adaptive;
mod cloud;
mod lhs;

pub use adaptive::{adaptive_sample, classify, interface_geometry, interface_geometry_at, phase_of, InterfaceGeometry, Phase};
pub use cloud::{write_cloud_csv, CloudFactory, PointCloud};
pub use lhs::lhs_generate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::networks::NetworkError;
use crate::physics::BoundaryKind;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("invalid sampling configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("cloud dump: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Solid,
    Liquid,
    Fin,
    IcSolid,
    IcFin,
    IcInterface,
    Bc(BoundaryKind),
    Interface,
    /// Not yet classified.
    Pending,
}

impl Label {
    pub fn name(self) -> String {
        match self {
            Label::Solid => "solid".into(),
            Label::Liquid => "liquid".into(),
            Label::Fin => "fin".into(),
            Label::IcSolid => "ic_solid".into(),
            Label::IcFin => "ic_fin".into(),
            Label::IcInterface => "ic_interface".into(),
            Label::Bc(k) => format!("bc_{}", k.name()),
            Label::Interface => "interface".into(),
            Label::Pending => "pending".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Background,
    Adaptive,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Background => "background",
            Origin::Adaptive => "adaptive",
        }
    }
}

/// A point in `(x*, y*, t*, P*)`. Interface points store the predicted `S*` in `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollocationPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub p_star: f64,
    pub label: Label,
    pub origin: Origin,
}

impl CollocationPoint {
    pub fn new(x: f64, y: f64, t: f64, p_star: f64, label: Label, origin: Origin) -> Self {
        CollocationPoint { x, y, t, p_star, label, origin }
    }
}

/// The dimensionless box the points live in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub p_min: f64,
    pub p_max: f64,
    pub delta_star: f64,
    pub t_max: f64,
}

impl Domain {
    pub fn p(&self, p_star: f64) -> f64 {
        self.p_min + p_star * (self.p_max - self.p_min)
    }

    /// `x*_max = P/2`.
    pub fn x_max(&self, p_star: f64) -> f64 {
        0.5 * self.p(p_star)
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if !(self.p_min > 0.0 && self.p_max > self.p_min) {
            return Err(SamplingError::Config(format!("bad aspect-ratio range [{}, {}]", self.p_min, self.p_max)));
        }
        if !(self.delta_star > 0.0 && self.delta_star < 1.0) {
            return Err(SamplingError::Config(format!("delta* must lie in (0, 1), got {}", self.delta_star)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(SamplingError::Config(format!("t*_max must be positive, got {}", self.t_max)));
        }
        Ok(())
    }
}

/// Point counts and refinement parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Background points over the PCM region `y* ∈ [δ*, 1]`.
    pub pcm_points: usize,
    /// Background points inside the fin `y* ∈ [0, δ*]`.
    pub fin_points: usize,
    /// Points per boundary family.
    pub bc_points: usize,
    /// Points per initial-condition family.
    pub ic_points: usize,
    /// `(x*, t*, P*)` points for the interface conditions.
    pub interface_points: usize,
    pub n_extra: usize,
    pub sigma: f64,
    pub eps_kappa: f64,
    /// Half-width of the band around the interface excluded from the phase sets.
    pub band: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            pcm_points: 8192,
            fin_points: 4096,
            bc_points: 1024,
            ic_points: 2048,
            interface_points: 2048,
            n_extra: 500,
            sigma: 0.05,
            eps_kappa: 1e-3,
            band: 0.001,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<(), SamplingError> {
        let counts = [
            ("pcm_points", self.pcm_points),
            ("fin_points", self.fin_points),
            ("bc_points", self.bc_points),
            ("ic_points", self.ic_points),
            ("interface_points", self.interface_points),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(SamplingError::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(SamplingError::Config(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if !(self.eps_kappa >= 0.0) || !(self.band >= 0.0) {
            return Err(SamplingError::Config("eps_kappa and band must be non-negative".into()));
        }
        Ok(())
    }
}
