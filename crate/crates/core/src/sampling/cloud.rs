use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adaptive::{adaptive_sample_with, classify, interface_geometry_at, phase_of, Phase};
use super::lhs::lhs_with;
use super::{CollocationPoint, Domain, Label, Origin, SamplingConfig, SamplingError};
use crate::networks::NetworkTriplet;
use crate::physics::BoundaryKind;

/// Labeled collocation sets for one refresh.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub solid: Vec<CollocationPoint>,
    pub liquid: Vec<CollocationPoint>,
    pub fin: Vec<CollocationPoint>,
    pub ic_solid: Vec<CollocationPoint>,
    pub ic_fin: Vec<CollocationPoint>,
    pub ic_interface: Vec<CollocationPoint>,
    /// One set per boundary family in [`BoundaryKind::ALL`] order.
    pub boundary: Vec<(BoundaryKind, Vec<CollocationPoint>)>,
    pub interface: Vec<CollocationPoint>,
    /// Points dropped because they fell inside the band around the interface.
    pub discarded: usize,
}

impl PointCloud {
    pub fn boundary(&self, kind: BoundaryKind) -> &[CollocationPoint] {
        self.boundary.iter().find(|(k, _)| *k == kind).map(|(_, v)| v.as_slice()).unwrap_or(&[])
    }

    pub fn sets(&self) -> Vec<(String, &[CollocationPoint])> {
        let mut v: Vec<(String, &[CollocationPoint])> = vec![
            ("solid".into(), &self.solid),
            ("liquid".into(), &self.liquid),
            ("fin".into(), &self.fin),
            ("ic_solid".into(), &self.ic_solid),
            ("ic_fin".into(), &self.ic_fin),
            ("ic_interface".into(), &self.ic_interface),
        ];
        for (k, pts) in &self.boundary {
            v.push((Label::Bc(*k).name(), pts));
        }
        v.push(("interface".into(), &self.interface));
        v
    }

    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut m: BTreeMap<String, usize> = self.sets().into_iter().map(|(k, v)| (k, v.len())).collect();
        m.insert("discarded".into(), self.discarded);
        m.insert(
            "adaptive".into(),
            self.sets().iter().flat_map(|(_, v)| v.iter()).filter(|p| p.origin == Origin::Adaptive).count(),
        );
        m
    }

    pub fn len(&self) -> usize {
        self.sets().iter().map(|(_, v)| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Holds the fixed background design and produces a freshly classified cloud, enriched with
/// adaptive points, for the current interface prediction.
#[derive(Clone, Debug)]
pub struct CloudFactory {
    pub domain: Domain,
    pub config: SamplingConfig,
    seed: u64,
    pcm: Vec<CollocationPoint>,
    fin: Vec<CollocationPoint>,
    ic_solid: Vec<CollocationPoint>,
    ic_fin: Vec<CollocationPoint>,
    ic_interface: Vec<CollocationPoint>,
    boundary: Vec<(BoundaryKind, Vec<CollocationPoint>)>,
    interface: Vec<CollocationPoint>,
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

impl CloudFactory {
    pub fn new(domain: Domain, config: SamplingConfig, seed: u64) -> Result<Self, SamplingError> {
        domain.validate()?;
        config.validate()?;
        let d = domain.delta_star;
        let tm = domain.t_max;
        let unit = (0.0, 1.0);

        // x* is drawn on [0, 1] and stretched to [0, P/2] of each point's own P*.
        let region = |n: usize, y_lo: f64, y_hi: f64, k: u64, label: Label| -> Result<Vec<CollocationPoint>, SamplingError> {
            let pts = lhs_with(n, &[unit, (y_lo, y_hi), (0.0, tm), unit], &mut stream(seed, k))?;
            Ok(pts
                .into_iter()
                .map(|p| CollocationPoint::new(p[0] * domain.x_max(p[3]), p[1], p[2], p[3], label, Origin::Background))
                .collect())
        };
        let pcm = region(config.pcm_points, d, 1.0, 1, Label::Pending)?;
        let fin = region(config.fin_points, 0.0, d, 2, Label::Pending)?;

        let at_zero = |n: usize, y_lo: f64, y_hi: f64, k: u64, label: Label| -> Result<Vec<CollocationPoint>, SamplingError> {
            let pts = lhs_with(n, &[unit, (y_lo, y_hi), unit], &mut stream(seed, k))?;
            Ok(pts
                .into_iter()
                .map(|p| CollocationPoint::new(p[0] * domain.x_max(p[2]), p[1], 0.0, p[2], label, Origin::Background))
                .collect())
        };
        let ic_solid = at_zero(config.ic_points, d, 1.0, 3, Label::IcSolid)?;
        let ic_fin = at_zero(config.ic_points, 0.0, d, 4, Label::IcFin)?;
        let ic_interface = at_zero(config.ic_points, 0.0, 0.0, 5, Label::IcInterface)?;

        let mut boundary = Vec::new();
        for (j, kind) in BoundaryKind::ALL.into_iter().enumerate() {
            let pts = lhs_with(config.bc_points, &[unit, (0.0, tm), unit], &mut stream(seed, 10 + j as u64))?;
            let v = pts
                .into_iter()
                .map(|p| {
                    let (u, t, ps) = (p[0], p[1], p[2]);
                    let xm = domain.x_max(ps);
                    let (x, y) = match kind {
                        BoundaryKind::ConvSolid => (0.0, d + u * (1.0 - d)),
                        BoundaryKind::ConvFin => (0.0, u * d),
                        BoundaryKind::Continuity => (u * xm, d),
                        BoundaryKind::SymSolid => (xm, d + u * (1.0 - d)),
                        BoundaryKind::AdiabaticSolid => (u * xm, 1.0),
                        BoundaryKind::SymFinX => (xm, u * d),
                        BoundaryKind::SymFinY => (u * xm, 0.0),
                    };
                    CollocationPoint::new(x, y, t, ps, Label::Bc(kind), Origin::Background)
                })
                .collect();
            boundary.push((kind, v));
        }

        // Interface conditions need t* > 0: map t onto (0, t_max].
        let interface = lhs_with(config.interface_points, &[unit, unit, unit], &mut stream(seed, 20))?
            .into_iter()
            .map(|p| {
                CollocationPoint::new(p[0] * domain.x_max(p[2]), 0.0, tm * (1.0 - p[1]), p[2], Label::Interface, Origin::Background)
            })
            .collect();

        Ok(CloudFactory { domain, config, seed, pcm, fin, ic_solid, ic_fin, ic_interface, boundary, interface })
    }

    /// Background interface points `(x*, t*, P*)` the network is queried on.
    pub fn interface_points(&self) -> &[CollocationPoint] {
        &self.interface
    }

    /// Classify the background against the current interface and add `n_extra` adaptive
    /// points. `refresh` selects the random stream of the adaptive draw.
    pub fn build(&self, triplet: &NetworkTriplet, refresh: u64) -> Result<PointCloud, SamplingError> {
        let cfg = &self.config;
        let d = self.domain.delta_star;

        let q: Vec<[f64; 3]> = self.interface.iter().map(|p| [p.x, p.t, p.p_star]).collect();
        let geom = interface_geometry_at(triplet, &q)?;
        let mut rng = stream(self.seed, 1000 + refresh);
        let extra = adaptive_sample_with(&geom, cfg.sigma, cfg.n_extra, cfg.eps_kappa, &self.domain, &mut rng);

        let mut interior = Vec::with_capacity(self.pcm.len() + self.fin.len() + extra.len());
        interior.extend_from_slice(&self.pcm);
        interior.extend_from_slice(&self.fin);
        interior.extend_from_slice(&extra);
        let (labeled, mut discarded) = classify(&interior, triplet, d, cfg.band)?;

        let mut cloud = PointCloud::default();
        for p in labeled {
            match p.label {
                Label::Solid => cloud.solid.push(p),
                Label::Liquid => cloud.liquid.push(p),
                _ => cloud.fin.push(p),
            }
        }

        for (kind, pts) in &self.boundary {
            if !kind.is_solid_region() {
                cloud.boundary.push((*kind, pts.clone()));
                continue;
            }
            let q: Vec<[f64; 3]> = pts.iter().map(|p| [p.x, p.t, p.p_star]).collect();
            let s = triplet.eval_interface(&q)?;
            let mut keep = Vec::new();
            for (p, &si) in pts.iter().zip(&s) {
                match phase_of(p.y, si, d, cfg.band) {
                    Phase::Solid => keep.push(*p),
                    Phase::Liquid => cloud.liquid.push(CollocationPoint { label: Label::Liquid, ..*p }),
                    Phase::Band => discarded += 1,
                    // Solid-side boundaries start at y* = δ*; only that edge can land here.
                    Phase::Fin => discarded += 1,
                }
            }
            cloud.boundary.push((*kind, keep));
        }

        cloud.ic_solid = self.ic_solid.clone();
        cloud.ic_fin = self.ic_fin.clone();
        cloud.ic_interface = self.ic_interface.clone();
        let s = triplet.eval_interface(&q)?;
        cloud.interface = self.interface.iter().zip(&s).map(|(p, &si)| CollocationPoint { y: si, ..*p }).collect();
        cloud.discarded = discarded;
        Ok(cloud)
    }
}

/// Dump a cloud as CSV with columns `x_star,y_star,t_star,P_star,label,origin`.
pub fn write_cloud_csv<W: Write>(out: W, cloud: &PointCloud) -> Result<(), SamplingError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| SamplingError::Io(e.into());
    w.write_record(["x_star", "y_star", "t_star", "P_star", "label", "origin"]).map_err(io)?;
    for (_, pts) in cloud.sets() {
        for p in pts {
            w.write_record([
                p.x.to_string(),
                p.y.to_string(),
                p.t.to_string(),
                p.p_star.to_string(),
                p.label.name(),
                p.origin.name().to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
