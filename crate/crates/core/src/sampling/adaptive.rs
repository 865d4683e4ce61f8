use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CollocationPoint, Domain, Label, Origin, SamplingError};
use crate::networks::NetworkTriplet;

/// Interface samples sorted by `x*`, with slopes, unit normals and curvature.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceGeometry {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub p_star: Vec<f64>,
    pub s: Vec<f64>,
    pub s_x: Vec<f64>,
    pub s_xx: Vec<f64>,
    pub normals: Vec<(f64, f64)>,
    pub kappa: Vec<f64>,
}

impl InterfaceGeometry {
    /// Build from known values at `(x*, t*, P*)` samples; `n = (−s_x, 1)/√(1+s_x²)` and
    /// `κ = |s_xx|/(1+s_x²)^{3/2}`.
    pub fn from_values(points: &[[f64; 3]], s: &[f64], s_x: &[f64], s_xx: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
        let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let col = |k: usize| order.iter().map(|&i| points[i][k]).collect::<Vec<_>>();
        let s_x = pick(s_x);
        let s_xx = pick(s_xx);
        let normals = s_x
            .iter()
            .map(|&d| {
                let norm = (1.0 + d * d).sqrt();
                (-d / norm, 1.0 / norm)
            })
            .collect();
        let kappa = s_x.iter().zip(&s_xx).map(|(&d, &dd)| dd.abs() / (1.0 + d * d).powf(1.5)).collect();
        InterfaceGeometry { x: col(0), t: col(1), p_star: col(2), s: pick(s), s_x, s_xx, normals, kappa }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Interface geometry of the network along `x*` samples at one `(t*, P*)` slice.
pub fn interface_geometry(
    triplet: &NetworkTriplet,
    xs: &[f64],
    t_star: f64,
    p_star: f64,
) -> Result<InterfaceGeometry, SamplingError> {
    if xs.len() < 3 {
        return Err(SamplingError::Config(format!("interface geometry needs at least 3 samples, got {}", xs.len())));
    }
    let pts: Vec<[f64; 3]> = xs.iter().map(|&x| [x, t_star, p_star]).collect();
    interface_geometry_at(triplet, &pts)
}

/// Interface geometry at arbitrary `(x*, t*, P*)` samples, slopes taken by differentiating the
/// network with respect to `x*`.
pub fn interface_geometry_at(triplet: &NetworkTriplet, pts: &[[f64; 3]]) -> Result<InterfaceGeometry, SamplingError> {
    let (s, slopes) = triplet.eval_interface_slopes(pts, true)?;
    let s_x: Vec<f64> = slopes.iter().map(|p| p.0).collect();
    let s_xx: Vec<f64> = slopes.iter().map(|p| p.1).collect();
    Ok(InterfaceGeometry::from_values(pts, &s, &s_x, &s_xx))
}

/// Draw `n_extra` points near the interface: base samples chosen with probability
/// proportional to `κ + eps_kappa`, then displaced by `σ·ξ` along the normal and clamped
/// into the domain box.
pub fn adaptive_sample(
    geom: &InterfaceGeometry,
    sigma: f64,
    n_extra: usize,
    eps_kappa: f64,
    domain: &Domain,
    seed: u64,
) -> Vec<CollocationPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    adaptive_sample_with(geom, sigma, n_extra, eps_kappa, domain, &mut rng)
}

pub(crate) fn adaptive_sample_with<R: Rng>(
    geom: &InterfaceGeometry,
    sigma: f64,
    n_extra: usize,
    eps_kappa: f64,
    domain: &Domain,
    rng: &mut R,
) -> Vec<CollocationPoint> {
    if geom.is_empty() || n_extra == 0 {
        return Vec::new();
    }
    let weights: Vec<f64> = geom.kappa.iter().map(|k| if k.is_finite() { k + eps_kappa } else { eps_kappa }).collect();
    // All-zero weights only happen with eps_kappa = 0 on a flat interface; fall back to uniform.
    let pick = WeightedIndex::new(&weights).or_else(|_| WeightedIndex::new(vec![1.0; weights.len()])).expect("non-empty");
    (0..n_extra)
        .map(|_| {
            let i = pick.sample(rng);
            let xi: f64 = rng.sample(StandardNormal);
            let (nx, ny) = geom.normals[i];
            let x = (geom.x[i] + sigma * xi * nx).clamp(0.0, domain.x_max(geom.p_star[i]));
            let y = (geom.s[i] + sigma * xi * ny).clamp(0.0, 1.0);
            CollocationPoint::new(x, y, geom.t[i], geom.p_star[i], Label::Pending, Origin::Adaptive)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Fin,
    Solid,
    Liquid,
    /// Inside the exclusion band around the interface.
    Band,
}

/// Fin below `δ*`, solid up to `s − band`, liquid from `s + band`.
pub fn phase_of(y: f64, s: f64, delta_star: f64, band: f64) -> Phase {
    if y <= delta_star {
        Phase::Fin
    } else if y <= s - band {
        Phase::Solid
    } else if y >= s + band {
        Phase::Liquid
    } else {
        Phase::Band
    }
}

/// Label every point as fin, solid or liquid against the current interface prediction.
/// Points inside the band are dropped; their count is returned alongside.
pub fn classify(
    points: &[CollocationPoint],
    triplet: &NetworkTriplet,
    delta_star: f64,
    band: f64,
) -> Result<(Vec<CollocationPoint>, usize), SamplingError> {
    let q: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.t, p.p_star]).collect();
    let s = triplet.eval_interface(&q)?;
    let mut out = Vec::with_capacity(points.len());
    let mut dropped = 0;
    for (p, &si) in points.iter().zip(&s) {
        let label = match phase_of(p.y, si, delta_star, band) {
            Phase::Fin => Label::Fin,
            Phase::Solid => Label::Solid,
            Phase::Liquid => Label::Liquid,
            Phase::Band => {
                dropped += 1;
                continue;
            }
        };
        out.push(CollocationPoint { label, ..*p });
    }
    Ok((out, dropped))
}
