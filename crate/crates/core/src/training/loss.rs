use serde::{Deserialize, Serialize};

use super::families::{Family, LossBreakdown};
use super::weights::WeightState;
use super::TrainingError;
use crate::autodiff::{Bindings, Evaluation, GradWorkspace, Graph, Matrix, NodeId};
use crate::networks::{NetworkTriplet, TripletLeaves};
use crate::physics::{
    residual_bc, residual_flux_continuity, residual_fin_pde, residual_interface, residual_liquid,
    residual_solid_pde, BoundaryKind, BoundaryNodes, DimensionlessGroups, FieldDerivs,
};
use crate::sampling::{CollocationPoint, Domain, PointCloud};

/// Optional residual families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossFlags {
    pub liquid_constraint: bool,
    pub flux_continuity: bool,
}

impl Default for LossFlags {
    fn default() -> Self {
        LossFlags { liquid_constraint: true, flux_continuity: false }
    }
}

/// Loss graph over one fixed cloud. Coordinates are bound once; parameters and family
/// multipliers are rebound on every evaluation.
pub struct LossProblem {
    graph: Graph,
    leaves: TripletLeaves,
    param_leaves: Vec<NodeId>,
    bindings: Bindings,
    families: [Option<NodeId>; Family::COUNT],
    counts: [usize; Family::COUNT],
    multipliers: [NodeId; Family::COUNT],
    total: NodeId,
    template: NetworkTriplet,
    eval: Evaluation,
    ws: GradWorkspace,
}

struct Columns {
    x: NodeId,
    y: NodeId,
    t: NodeId,
    p: NodeId,
}

fn columns(g: &mut Graph, b: &mut Bindings, name: &str, pts: &[CollocationPoint]) -> Columns {
    let n = pts.len();
    let mut col = |tag: &str, f: fn(&CollocationPoint) -> f64| {
        let id = g.input(&format!("{name}.{tag}"), n, 1);
        b.set(id, Matrix::column(&pts.iter().map(f).collect::<Vec<_>>()));
        id
    };
    Columns { x: col("x", |p| p.x), y: col("y", |p| p.y), t: col("t", |p| p.t), p: col("p", |p| p.p_star) }
}

impl LossProblem {
    pub fn new(
        triplet: &NetworkTriplet,
        cloud: &PointCloud,
        groups: &DimensionlessGroups,
        domain: &Domain,
        flags: LossFlags,
    ) -> Result<Self, TrainingError> {
        let mut g = Graph::new();
        let mut b = Bindings::new();
        let leaves = triplet.register(&mut g);
        let mut fam: [Option<NodeId>; Family::COUNT] = [None; Family::COUNT];
        let mut counts = [0usize; Family::COUNT];
        let mut put = |g: &mut Graph, f: Family, r: NodeId, n: usize| {
            fam[f.index()] = Some(g.mean_square(r));
            counts[f.index()] = n;
        };

        if !cloud.solid.is_empty() {
            let c = columns(&mut g, &mut b, "solid", &cloud.solid);
            let out = triplet.forward_solid(&mut g, &leaves, c.x, c.y, c.t, c.p);
            let d = FieldDerivs::build(&mut g, out, c.x, c.y, c.t)?;
            let r = residual_solid_pde(&mut g, &d);
            for (f, r) in [Family::Ge1, Family::Ge2, Family::Ge3].into_iter().zip(r) {
                put(&mut g, f, r, cloud.solid.len());
            }
        }
        if !cloud.fin.is_empty() {
            let c = columns(&mut g, &mut b, "fin", &cloud.fin);
            let out = triplet.forward_fin(&mut g, &leaves, c.x, c.y, c.t, c.p);
            let d = FieldDerivs::build(&mut g, out, c.x, c.y, c.t)?;
            let r = residual_fin_pde(&mut g, &d, groups);
            for (f, r) in [Family::Ge4, Family::Ge5, Family::Ge6].into_iter().zip(r) {
                put(&mut g, f, r, cloud.fin.len());
            }
        }
        if flags.liquid_constraint && !cloud.liquid.is_empty() {
            let c = columns(&mut g, &mut b, "liquid", &cloud.liquid);
            let out = triplet.forward_solid(&mut g, &leaves, c.x, c.y, c.t, c.p);
            let r = residual_liquid(&mut g, out.temperature);
            put(&mut g, Family::Liquid, r, cloud.liquid.len());
        }

        for pts in [&cloud.ic_solid, &cloud.ic_fin, &cloud.ic_interface] {
            if let Some(p) = pts.iter().find(|p| p.t != 0.0) {
                return Err(TrainingError::Config(format!("initial-condition point at t* = {}", p.t)));
            }
        }
        if !cloud.ic_solid.is_empty() {
            let c = columns(&mut g, &mut b, "ic_solid", &cloud.ic_solid);
            let out = triplet.forward_solid(&mut g, &leaves, c.x, c.y, c.t, c.p);
            let r = g.shift(out.temperature, -1.0);
            put(&mut g, Family::Ic1, r, cloud.ic_solid.len());
        }
        if !cloud.ic_fin.is_empty() {
            let c = columns(&mut g, &mut b, "ic_fin", &cloud.ic_fin);
            let out = triplet.forward_fin(&mut g, &leaves, c.x, c.y, c.t, c.p);
            let r = g.shift(out.temperature, -1.0);
            put(&mut g, Family::Ic2, r, cloud.ic_fin.len());
        }
        if !cloud.ic_interface.is_empty() {
            let c = columns(&mut g, &mut b, "ic_interface", &cloud.ic_interface);
            let s = triplet.forward_interface(&mut g, &leaves, c.x, c.t, c.p);
            put(&mut g, Family::Ic3, s, cloud.ic_interface.len());
        }

        for (kind, pts) in &cloud.boundary {
            if pts.is_empty() {
                continue;
            }
            let kind = *kind;
            let c = columns(&mut g, &mut b, &format!("bc_{}", kind.name()), pts);
            let mut nodes = BoundaryNodes::default();
            let solid = matches!(
                kind,
                BoundaryKind::ConvSolid | BoundaryKind::SymSolid | BoundaryKind::AdiabaticSolid | BoundaryKind::Continuity
            );
            let fin = !kind.is_solid_region();
            let needs_dy = matches!(kind, BoundaryKind::AdiabaticSolid | BoundaryKind::SymFinY)
                || (kind == BoundaryKind::Continuity && flags.flux_continuity);
            let needs_dx = !matches!(kind, BoundaryKind::Continuity | BoundaryKind::AdiabaticSolid | BoundaryKind::SymFinY);
            if solid {
                let out = triplet.forward_solid(&mut g, &leaves, c.x, c.y, c.t, c.p);
                nodes.solid_temperature = Some(out.temperature);
                if needs_dx {
                    nodes.solid_dx = Some(g.input_derivative(out.temperature, c.x)?);
                }
                if needs_dy {
                    nodes.solid_dy = Some(g.input_derivative(out.temperature, c.y)?);
                }
            }
            if fin {
                let out = triplet.forward_fin(&mut g, &leaves, c.x, c.y, c.t, c.p);
                nodes.fin_temperature = Some(out.temperature);
                if needs_dx {
                    nodes.fin_dx = Some(g.input_derivative(out.temperature, c.x)?);
                }
                if needs_dy {
                    nodes.fin_dy = Some(g.input_derivative(out.temperature, c.y)?);
                }
            }
            let at: Vec<(f64, f64, f64)> = pts.iter().map(|p| (p.x, p.y, domain.p(p.p_star))).collect();
            let r = residual_bc(&mut g, kind, &nodes, groups, &at)?;
            put(&mut g, bc_family(kind), r, pts.len());
            if kind == BoundaryKind::Continuity && flags.flux_continuity {
                let r = residual_flux_continuity(&mut g, nodes.solid_dy.unwrap(), nodes.fin_dy.unwrap(), groups);
                put(&mut g, Family::FluxContinuity, r, pts.len());
            }
        }

        if !cloud.interface.is_empty() {
            let c = columns(&mut g, &mut b, "interface", &cloud.interface);
            let s = triplet.forward_interface(&mut g, &leaves, c.x, c.t, c.p);
            let sx = g.input_derivative(s, c.x)?;
            let st = g.input_derivative(s, c.t)?;
            let out = triplet.forward_solid(&mut g, &leaves, c.x, s, c.t, c.p);
            let [r8, r9] = residual_interface(&mut g, out.temperature, out.flux_y, sx, st, groups);
            put(&mut g, Family::Bc8, r8, cloud.interface.len());
            put(&mut g, Family::Bc9, r9, cloud.interface.len());
        }

        let multipliers = Family::ALL.map(|f| g.input(&format!("weight.{}", f.name()), 1, 1));
        let total = total_weighted_loss(&mut g, &fam, &multipliers);
        let param_leaves = leaves.all();
        let template = triplet.clone();
        let mut problem = LossProblem {
            graph: g,
            leaves,
            param_leaves,
            bindings: b,
            families: fam,
            counts,
            multipliers,
            total,
            template,
            eval: Evaluation::default(),
            ws: GradWorkspace::default(),
        };
        problem.set_multipliers(&[1.0; Family::COUNT]);
        Ok(problem)
    }

    pub fn counts(&self) -> &[usize; Family::COUNT] {
        &self.counts
    }

    pub fn parameter_count(&self) -> usize {
        self.template.layout().total()
    }

    /// Family multipliers of the weighted total, indexed by [`Family::index`].
    pub fn set_multipliers(&mut self, m: &[f64; Family::COUNT]) {
        for (&id, &v) in self.multipliers.iter().zip(m) {
            self.bindings.set(id, Matrix::scalar(v));
        }
    }

    pub fn set_weights(&mut self, weights: &WeightState) {
        self.set_multipliers(&weights.family_multipliers());
    }

    fn run(&mut self, params: &[f64]) -> Result<(), TrainingError> {
        self.template.bind_values(params, &self.leaves, &mut self.bindings);
        self.graph.evaluate_into(&self.bindings, &mut self.eval)?;
        Ok(())
    }

    fn breakdown(&self) -> LossBreakdown {
        let mut out = LossBreakdown::default();
        for f in Family::ALL {
            if let Some(id) = self.families[f.index()] {
                out.values[f.index()] = self.eval.scalar(id);
                out.counts[f.index()] = self.counts[f.index()];
            }
        }
        out
    }

    /// Per-family losses and the weighted total at `params`.
    pub fn evaluate(&mut self, params: &[f64]) -> Result<(LossBreakdown, f64), TrainingError> {
        self.run(params)?;
        Ok((self.breakdown(), self.eval.scalar(self.total)))
    }

    /// Rebind the multipliers and recompute only the weighted total of the last evaluation.
    pub fn reweight(&mut self, m: &[f64; Family::COUNT]) -> Result<f64, TrainingError> {
        self.set_multipliers(m);
        self.graph.evaluate_from(&self.bindings, &mut self.eval, self.multipliers[0])?;
        Ok(self.eval.scalar(self.total))
    }

    /// Gradient of the weighted total of the last evaluation with respect to the flat
    /// parameter vector.
    pub fn gradient(&mut self, grad: &mut [f64]) -> Result<(), TrainingError> {
        let gs = self.graph.grad_with(&self.eval, self.total, &self.param_leaves, &mut self.ws)?;
        let mut k = 0;
        for m in &gs {
            let s = m.as_slice();
            grad[k..k + s.len()].copy_from_slice(s);
            k += s.len();
        }
        debug_assert_eq!(k, grad.len());
        Ok(())
    }

    /// [`evaluate`](Self::evaluate) followed by [`gradient`](Self::gradient).
    pub fn evaluate_with_grad(&mut self, params: &[f64], grad: &mut [f64]) -> Result<(LossBreakdown, f64), TrainingError> {
        let out = self.evaluate(params)?;
        self.gradient(grad)?;
        Ok(out)
    }
}

fn bc_family(kind: BoundaryKind) -> Family {
    match kind {
        BoundaryKind::ConvSolid => Family::Bc1,
        BoundaryKind::ConvFin => Family::Bc2,
        BoundaryKind::Continuity => Family::Bc3,
        BoundaryKind::SymSolid => Family::Bc4,
        BoundaryKind::AdiabaticSolid => Family::Bc5,
        BoundaryKind::SymFinX => Family::Bc6,
        BoundaryKind::SymFinY => Family::Bc7,
    }
}

/// `Σ m_f·L_f` over the families present. The multipliers are plain inputs, so no gradient
/// flows into the weights.
pub fn total_weighted_loss(g: &mut Graph, families: &[Option<NodeId>; Family::COUNT], multipliers: &[NodeId; Family::COUNT]) -> NodeId {
    let mut total: Option<NodeId> = None;
    for (f, &m) in families.iter().zip(multipliers) {
        if let Some(l) = *f {
            let term = g.mul(m, l);
            total = Some(match total {
                Some(t) => g.add(t, term),
                None => term,
            });
        }
    }
    total.unwrap_or_else(|| g.constant(Matrix::scalar(0.0)))
}

/// Weighted total computed from an existing breakdown.
pub fn weighted_total(breakdown: &LossBreakdown, weights: &WeightState) -> f64 {
    let m = weights.family_multipliers();
    Family::ALL.iter().map(|f| m[f.index()] * breakdown.get(*f)).sum()
}

/// One-shot family losses of `triplet` on `cloud`.
pub fn compute_loss(
    triplet: &NetworkTriplet,
    cloud: &PointCloud,
    groups: &DimensionlessGroups,
    domain: &Domain,
    flags: LossFlags,
) -> Result<LossBreakdown, TrainingError> {
    let mut p = LossProblem::new(triplet, cloud, groups, domain, flags)?;
    Ok(p.evaluate(triplet.params())?.0)
}
