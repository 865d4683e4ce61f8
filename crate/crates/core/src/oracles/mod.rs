//! Classical reference solvers: a two-region 1D front-tracking model, the one-phase Neumann
//! solution and a 2D fixed-grid enthalpy method.

mod enthalpy;
mod neumann;
mod one_d;
mod targets;
mod tridiag;

pub use enthalpy::{solve_2d_enthalpy, CellPhase, EnthalpyConfig, EnthalpySeries, EnthalpySnapshot};
pub use neumann::{neumann_analytic, neumann_lambda, neumann_residual};
pub use one_d::{solve_1d, OneDConfig, OneDSeries, OneDSnapshot, WallCondition};
pub use targets::{
    generate_pretrain_targets, oracle1d_rows, pretrain_target_at, read_oracle1d_csv, targets_from_rows,
    write_oracle1d_csv, write_oracle2d_csv, OneDRow,
};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unstable step at t = {t} s with dt = {dt} s; try dt ≤ {suggested} s")]
    StepSize { t: f64, dt: f64, suggested: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Physics(#[from] crate::physics::PhysicsError),
    #[error(transparent)]
    Sampling(#[from] crate::sampling::SamplingError),
}

#[cfg(test)]
mod tests;
