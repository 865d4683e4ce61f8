//! Residual families in flux form. Every function only composes graph nodes, so the
//! derivative nodes may come from `input_derivative` during training or be bound directly to
//! known values in tests.

use serde::{Deserialize, Serialize};

use super::{DimensionlessGroups, PhysicsError};
use crate::autodiff::{AutodiffError, Graph, NodeId};
use crate::networks::FieldNodes;

/// A field network's outputs together with the input derivatives the residuals need.
#[derive(Clone, Copy, Debug)]
pub struct FieldDerivs {
    pub temperature: NodeId,
    pub flux_x: NodeId,
    pub flux_y: NodeId,
    pub dt_dtime: NodeId,
    pub dt_dx: NodeId,
    pub dt_dy: NodeId,
    pub dqx_dx: NodeId,
    pub dqy_dy: NodeId,
}

impl FieldDerivs {
    /// Differentiate a field network's outputs with respect to its coordinate inputs.
    pub fn build(g: &mut Graph, out: FieldNodes, x: NodeId, y: NodeId, t: NodeId) -> Result<Self, AutodiffError> {
        Ok(FieldDerivs {
            temperature: out.temperature,
            flux_x: out.flux_x,
            flux_y: out.flux_y,
            dt_dtime: g.input_derivative(out.temperature, t)?,
            dt_dx: g.input_derivative(out.temperature, x)?,
            dt_dy: g.input_derivative(out.temperature, y)?,
            dqx_dx: g.input_derivative(out.flux_x, x)?,
            dqy_dy: g.input_derivative(out.flux_y, y)?,
        })
    }
}

/// `∂T/∂t − div q`, `q_x − ∂T/∂x`, `q_y − ∂T/∂y` in the solid.
pub fn residual_solid_pde(g: &mut Graph, d: &FieldDerivs) -> [NodeId; 3] {
    pde(g, d, 1.0)
}

/// Fin counterpart with the diffusivity ratio on the storage term.
pub fn residual_fin_pde(g: &mut Graph, d: &FieldDerivs, groups: &DimensionlessGroups) -> [NodeId; 3] {
    pde(g, d, groups.alpha_sf)
}

fn pde(g: &mut Graph, d: &FieldDerivs, storage: f64) -> [NodeId; 3] {
    let div = g.add(d.dqx_dx, d.dqy_dy);
    let rate = if storage == 1.0 { d.dt_dtime } else { g.scale(d.dt_dtime, storage) };
    let r1 = g.sub(rate, div);
    let r2 = g.sub(d.flux_x, d.dt_dx);
    let r3 = g.sub(d.flux_y, d.dt_dy);
    [r1, r2, r3]
}

/// Initial-condition residuals `T_s* − 1`, `T_f* − 1`, `S*`. Every IC point must sit at `t* = 0`.
pub fn residual_ic(
    g: &mut Graph,
    solid_temperature: NodeId,
    fin_temperature: NodeId,
    interface: NodeId,
    times: &[f64],
) -> Result<[NodeId; 3], PhysicsError> {
    if let Some(t) = times.iter().find(|&&t| t != 0.0) {
        return Err(PhysicsError::Misuse(format!("initial-condition point at t* = {t}")));
    }
    Ok([g.shift(solid_temperature, -1.0), g.shift(fin_temperature, -1.0), interface])
}

/// The seven boundary families other than the interface conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Convective wall `x* = 0`, PCM side.
    ConvSolid,
    /// Convective wall `x* = 0`, fin side.
    ConvFin,
    /// Fin surface `y* = δ*`.
    Continuity,
    /// Symmetry line `x* = P/2`, PCM side.
    SymSolid,
    /// Top `y* = 1`.
    AdiabaticSolid,
    /// Symmetry line `x* = P/2`, fin side.
    SymFinX,
    /// Fin mid-plane `y* = 0`.
    SymFinY,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 7] = [
        BoundaryKind::ConvSolid,
        BoundaryKind::ConvFin,
        BoundaryKind::Continuity,
        BoundaryKind::SymSolid,
        BoundaryKind::AdiabaticSolid,
        BoundaryKind::SymFinX,
        BoundaryKind::SymFinY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::ConvSolid => "conv_solid",
            BoundaryKind::ConvFin => "conv_fin",
            BoundaryKind::Continuity => "continuity",
            BoundaryKind::SymSolid => "sym_solid",
            BoundaryKind::AdiabaticSolid => "adiabatic_solid",
            BoundaryKind::SymFinX => "sym_fin_x",
            BoundaryKind::SymFinY => "sym_fin_y",
        }
    }

    /// Solid-side families that only apply where the PCM is currently solid.
    pub fn is_solid_region(self) -> bool {
        matches!(self, BoundaryKind::ConvSolid | BoundaryKind::SymSolid | BoundaryKind::AdiabaticSolid)
    }

    /// Does `(x*, y*)` lie on this boundary of the cell with aspect ratio `p`?
    pub fn contains(self, x: f64, y: f64, p: f64, delta_star: f64) -> bool {
        const TOL: f64 = 1e-9;
        let near = |a: f64, b: f64| (a - b).abs() <= TOL * b.abs().max(1.0);
        let x_in = (-TOL..=0.5 * p + TOL).contains(&x);
        match self {
            BoundaryKind::ConvSolid => near(x, 0.0) && y >= delta_star - TOL && y <= 1.0 + TOL,
            BoundaryKind::ConvFin => near(x, 0.0) && y >= -TOL && y <= delta_star + TOL,
            BoundaryKind::Continuity => near(y, delta_star) && x_in,
            BoundaryKind::SymSolid => near(x, 0.5 * p) && y >= delta_star - TOL && y <= 1.0 + TOL,
            BoundaryKind::AdiabaticSolid => near(y, 1.0) && x_in,
            BoundaryKind::SymFinX => near(x, 0.5 * p) && y >= -TOL && y <= delta_star + TOL,
            BoundaryKind::SymFinY => near(y, 0.0) && x_in,
        }
    }
}

/// Values a boundary residual draws on. Only the ones its kind needs must be present.
#[derive(Clone, Copy, Debug, Default)]
pub struct BoundaryNodes {
    pub solid_temperature: Option<NodeId>,
    pub solid_dx: Option<NodeId>,
    pub solid_dy: Option<NodeId>,
    pub fin_temperature: Option<NodeId>,
    pub fin_dx: Option<NodeId>,
    pub fin_dy: Option<NodeId>,
}

/// One boundary residual over points `(x*, y*, P)`, each checked against the boundary.
pub fn residual_bc(
    g: &mut Graph,
    kind: BoundaryKind,
    nodes: &BoundaryNodes,
    groups: &DimensionlessGroups,
    points: &[(f64, f64, f64)],
) -> Result<NodeId, PhysicsError> {
    if let Some(&(x, y, p)) = points.iter().find(|&&(x, y, p)| !kind.contains(x, y, p, groups.delta_star)) {
        return Err(PhysicsError::Misuse(format!("point ({x}, {y}) at P = {p} is not on boundary {}", kind.name())));
    }
    let need = |n: Option<NodeId>, what: &str| {
        n.ok_or_else(|| PhysicsError::Misuse(format!("boundary {} needs {what}", kind.name())))
    };
    Ok(match kind {
        BoundaryKind::ConvSolid => {
            let t = need(nodes.solid_temperature, "the solid temperature")?;
            let tx = need(nodes.solid_dx, "∂T_s/∂x")?;
            robin(g, tx, t, groups.bi_s)
        }
        BoundaryKind::ConvFin => {
            let t = need(nodes.fin_temperature, "the fin temperature")?;
            let tx = need(nodes.fin_dx, "∂T_f/∂x")?;
            robin(g, tx, t, groups.bi_f)
        }
        BoundaryKind::Continuity => {
            let ts = need(nodes.solid_temperature, "the solid temperature")?;
            let tf = need(nodes.fin_temperature, "the fin temperature")?;
            g.sub(ts, tf)
        }
        BoundaryKind::SymSolid => need(nodes.solid_dx, "∂T_s/∂x")?,
        BoundaryKind::AdiabaticSolid => need(nodes.solid_dy, "∂T_s/∂y")?,
        BoundaryKind::SymFinX => need(nodes.fin_dx, "∂T_f/∂x")?,
        BoundaryKind::SymFinY => need(nodes.fin_dy, "∂T_f/∂y")?,
    })
}

fn robin(g: &mut Graph, dx: NodeId, t: NodeId, bi: f64) -> NodeId {
    let bt = g.scale(t, bi);
    g.sub(dx, bt)
}

/// Interface conditions: `T_s*(x*, S*, t*) − 1` and
/// `q_sy*·(1 + (∂S*/∂x*)²) − (1/Ja)·∂S*/∂t*`, with the solid quantities taken on the interface.
pub fn residual_interface(
    g: &mut Graph,
    temperature_on_s: NodeId,
    flux_y_on_s: NodeId,
    ds_dx: NodeId,
    ds_dt: NodeId,
    groups: &DimensionlessGroups,
) -> [NodeId; 2] {
    let r8 = g.shift(temperature_on_s, -1.0);
    let sx2 = g.square(ds_dx);
    let arc = g.shift(sx2, 1.0);
    let lhs = g.mul(flux_y_on_s, arc);
    let rate = g.scale(ds_dt, 1.0 / groups.ja);
    let r9 = g.sub(lhs, rate);
    [r8, r9]
}

/// Isothermal liquid: `T_s* − 1` on liquid-classified PCM points.
pub fn residual_liquid(g: &mut Graph, solid_temperature: NodeId) -> NodeId {
    g.shift(solid_temperature, -1.0)
}

/// Optional heat-flux continuity on the fin surface, normalized by `k_s`:
/// `∂T_s*/∂y* − (k_f/k_s)·∂T_f*/∂y*`.
pub fn residual_flux_continuity(g: &mut Graph, solid_dy: NodeId, fin_dy: NodeId, groups: &DimensionlessGroups) -> NodeId {
    let f = g.scale(fin_dy, 1.0 / groups.conductivity_ratio);
    g.sub(solid_dy, f)
}
