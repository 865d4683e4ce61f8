use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{EnthalpySnapshot, OneDSeries, OracleError};
use crate::physics::ScalingMap;
use crate::sampling::lhs_generate;
use crate::training::PretrainTarget;

/// One row of `oracle1d.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneDRow {
    pub t_star: f64,
    pub x_star: f64,
    pub s_star: f64,
    #[serde(rename = "Tf_star")]
    pub tf_star: f64,
}

fn check_length(series: &OneDSeries, scaling: &ScalingMap, p: f64) -> Result<(), OracleError> {
    let l_f = series.fin_x.last().copied().unwrap_or(0.0);
    let expected = p * scaling.geom.l_c;
    if (l_f - expected).abs() > 1e-9 * expected {
        return Err(OracleError::Config(format!("series was run for a fin of {l_f} m, not P = {p}")));
    }
    Ok(())
}

/// Interface height and fin temperature, both dimensionless, from the 1D series at `(x*, t*)`.
pub fn pretrain_target_at(series: &OneDSeries, scaling: &ScalingMap, x_star: f64, t_star: f64) -> (f64, f64) {
    let delta_star = scaling.length_star(scaling.geom.delta);
    let (y, tf) = series.fin_at(scaling.length(x_star), scaling.time(t_star));
    ((delta_star + scaling.length_star(y)).min(1.0), scaling.temperature_star(tf))
}

/// Latin-hypercube targets over `x* ∈ [0, P/2]`, `t* ∈ [0, t*_end]` at aspect ratio `p`.
/// The fin temperature is attached to the fin mid-plane `y* = δ*/2`.
pub fn generate_pretrain_targets(
    series: &OneDSeries,
    scaling: &ScalingMap,
    n_points: usize,
    p: f64,
    seed: u64,
) -> Result<Vec<PretrainTarget>, OracleError> {
    if n_points == 0 {
        return Ok(Vec::new());
    }
    check_length(series, scaling, p)?;
    let p_star = scaling.p_star(p)?;
    let t_end = scaling.time_star(series.t_end())?;
    let delta_star = scaling.length_star(scaling.geom.delta);
    let pts = lhs_generate(n_points, &[(0.0, 0.5 * p), (0.0, t_end)], seed)?;
    Ok(pts
        .into_iter()
        .map(|v| {
            let (s, tf) = pretrain_target_at(series, scaling, v[0], v[1]);
            PretrainTarget { x: v[0], y: 0.5 * delta_star, t: v[1], p_star, s, tf }
        })
        .collect())
}

/// Table of the 1D solution on `nx` equally spaced positions over `[0, P/2]` at every snapshot.
pub fn oracle1d_rows(series: &OneDSeries, scaling: &ScalingMap, p: f64, nx: usize) -> Result<Vec<OneDRow>, OracleError> {
    check_length(series, scaling, p)?;
    if nx < 2 {
        return Err(OracleError::Config("need at least two output positions".into()));
    }
    let mut rows = Vec::with_capacity(series.snapshots.len() * nx);
    for snap in &series.snapshots {
        let t_star = scaling.time_star(snap.t)?;
        for i in 0..nx {
            let x_star = 0.5 * p * i as f64 / (nx - 1) as f64;
            let (s_star, tf_star) = pretrain_target_at(series, scaling, x_star, t_star);
            rows.push(OneDRow { t_star, x_star, s_star, tf_star });
        }
    }
    Ok(rows)
}

pub fn write_oracle1d_csv<W: Write>(out: W, rows: &[OneDRow]) -> Result<(), OracleError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| OracleError::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_oracle1d_csv<R: Read>(input: R) -> Result<Vec<OneDRow>, OracleError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(|e: csv::Error| OracleError::Io(e.into()))).collect()
}

/// Pre-training targets read back from an `oracle1d.csv` table.
pub fn targets_from_rows(rows: &[OneDRow], p_star: f64, delta_star: f64) -> Vec<PretrainTarget> {
    rows.iter()
        .map(|r| PretrainTarget { x: r.x_star, y: 0.5 * delta_star, t: r.t_star, p_star, s: r.s_star, tf: r.tf_star })
        .collect()
}

/// Write `oracle2d.csv` rows `t_star,x_star,y_star,T_star,phase` for each snapshot.
pub fn write_oracle2d_csv<W: Write>(
    out: W,
    x: &[f64],
    y: &[f64],
    snapshots: &[&EnthalpySnapshot],
    scaling: &ScalingMap,
) -> Result<(), OracleError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| OracleError::Io(e.into());
    w.write_record(["t_star", "x_star", "y_star", "T_star", "phase"]).map_err(io)?;
    let nx = x.len();
    for snap in snapshots {
        let t_star = scaling.time_star(snap.t)?;
        for (k, (&temp, phase)) in snap.temperature.iter().zip(&snap.phase).enumerate() {
            w.write_record([
                t_star.to_string(),
                scaling.length_star(x[k % nx]).to_string(),
                scaling.length_star(y[k / nx]).to_string(),
                scaling.temperature_star(temp).to_string(),
                phase.name().to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
