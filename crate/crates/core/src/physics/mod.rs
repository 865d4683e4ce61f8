//! Material data, scaling, dimensionless groups, residual families and derived observables.

mod observables;
mod props;
mod residuals;

pub use observables::{fin_temp_extrema, fin_temp_extrema_of, solid_fraction, solid_fraction_of};
pub use props::{compute_groups, nondim_time, normalize_p, DimensionlessGroups, Geometry, MaterialProps, ScalingMap, P_MAX, P_MIN};
pub use residuals::{
    residual_bc, residual_fin_pde, residual_flux_continuity, residual_ic, residual_interface, residual_liquid,
    residual_solid_pde, BoundaryKind, BoundaryNodes, FieldDerivs,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("misuse: {0}")]
    Misuse(String),
    #[error(transparent)]
    Network(#[from] crate::networks::NetworkError),
}
