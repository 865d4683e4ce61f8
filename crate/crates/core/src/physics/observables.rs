use super::{PhysicsError, ScalingMap};
use crate::networks::{NetworkError, NetworkRole, NetworkTriplet};

/// Solidified share of the PCM region from an interface profile `s(x*)` over `[0, P/2]`:
/// the trapezoid average of `clamp(s − δ*, 0, 1 − δ*) / (1 − δ*)` on `panels` panels.
pub fn solid_fraction_of<F>(interface: F, p: f64, delta_star: f64, panels: usize) -> f64
where
    F: FnOnce(&[f64]) -> Vec<f64>,
{
    let panels = panels.max(1);
    let half = 0.5 * p;
    let xs: Vec<f64> = (0..=panels).map(|i| half * i as f64 / panels as f64).collect();
    let s = interface(&xs);
    let depth = 1.0 - delta_star;
    let f: Vec<f64> = s.iter().map(|&v| (v - delta_star).clamp(0.0, depth) / depth).collect();
    let inner: f64 = f[1..panels].iter().sum();
    (0.5 * (f[0] + f[panels]) + inner) / panels as f64
}

/// Solid fraction predicted by the interface network at `t*` for aspect ratio `p`.
pub fn solid_fraction(
    triplet: &NetworkTriplet,
    scaling: &ScalingMap,
    t_star: f64,
    p: f64,
    panels: usize,
) -> Result<f64, PhysicsError> {
    if !(t_star >= 0.0) {
        return Err(PhysicsError::Domain(format!("t* must be non-negative, got {t_star}")));
    }
    let p_star = scaling.p_star(p)?;
    let delta_star = scaling.groups().delta_star;
    let mut err: Option<NetworkError> = None;
    let f = solid_fraction_of(
        |xs| {
            let pts: Vec<[f64; 3]> = xs.iter().map(|&x| [x, t_star, p_star]).collect();
            triplet.eval_interface(&pts).unwrap_or_else(|e| {
                err = Some(e);
                vec![0.0; xs.len()]
            })
        },
        p,
        delta_star,
        panels.max(64),
    );
    match err {
        Some(e) => Err(e.into()),
        None => Ok(f),
    }
}

/// Minimum and maximum of a fin temperature field sampled on an `n × n` grid over
/// `[0, P/2] × [0, δ*]`.
pub fn fin_temp_extrema_of<F>(field: F, p: f64, delta_star: f64, n: usize) -> (f64, f64)
where
    F: FnOnce(&[(f64, f64)]) -> Vec<f64>,
{
    let n = n.max(2);
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = 0.5 * p * i as f64 / (n - 1) as f64;
            let y = delta_star * j as f64 / (n - 1) as f64;
            pts.push((x, y));
        }
    }
    field(&pts).into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Fin temperature extrema predicted by the fin network at `t*` for aspect ratio `p`.
pub fn fin_temp_extrema(
    triplet: &NetworkTriplet,
    scaling: &ScalingMap,
    t_star: f64,
    p: f64,
    n: usize,
) -> Result<(f64, f64), PhysicsError> {
    let p_star = scaling.p_star(p)?;
    let delta_star = scaling.groups().delta_star;
    let mut err: Option<NetworkError> = None;
    let out = fin_temp_extrema_of(
        |xy| {
            let pts: Vec<[f64; 4]> = xy.iter().map(|&(x, y)| [x, y, t_star, p_star]).collect();
            match triplet.eval_field(NetworkRole::Fin, &pts) {
                Ok(v) => v.into_iter().map(|r| r[0]).collect(),
                Err(e) => {
                    err = Some(e);
                    vec![f64::NAN]
                }
            }
        },
        p,
        delta_star,
        n,
    );
    match err {
        Some(e) => Err(e.into()),
        None => Ok(out),
    }
}
