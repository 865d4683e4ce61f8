//! The three parallel networks: solid field `(T_s*, q_sx*, q_sy*)`, fin field
//! `(T_f*, q_fx*, q_fy*)` and interface position `S*`.

mod checkpoint;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, LayerParams, RoleParams, FORMAT_VERSION};
pub use params::{LayerSlice, ParameterLayout};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AutodiffError, Bindings, Graph, Matrix, NodeId};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("{role} network: hidden layer {layer} has zero width")]
    ZeroWidth { role: NetworkRole, layer: usize },
    #[error("{role} network expects {expected_in} inputs and {expected_out} outputs, found {found_in} -> {found_out}")]
    Arity { role: NetworkRole, expected_in: usize, expected_out: usize, found_in: usize, found_out: usize },
    #[error("{role} network layer {layer}: expected {expected} values, found {found}")]
    LayerShape { role: NetworkRole, layer: usize, expected: usize, found: usize },
    #[error("unsupported checkpoint format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkRole {
    Solid,
    Fin,
    Interface,
}

impl NetworkRole {
    pub const ALL: [NetworkRole; 3] = [NetworkRole::Solid, NetworkRole::Fin, NetworkRole::Interface];

    pub fn index(self) -> usize {
        match self {
            NetworkRole::Solid => 0,
            NetworkRole::Fin => 1,
            NetworkRole::Interface => 2,
        }
    }

    /// `(inputs, outputs)`: `(x*, y*, t*, P*) -> (T*, q_x*, q_y*)` for the field nets and
    /// `(x*, t*, P*) -> S*` for the interface.
    pub fn arity(self) -> (usize, usize) {
        match self {
            NetworkRole::Solid | NetworkRole::Fin => (4, 3),
            NetworkRole::Interface => (3, 1),
        }
    }
}

impl std::fmt::Display for NetworkRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NetworkRole::Solid => "solid",
            NetworkRole::Fin => "fin",
            NetworkRole::Interface => "interface",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSpec {
    pub input_arity: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub output_arity: usize,
    #[serde(default)]
    pub init_seed: u64,
}

impl MlpSpec {
    pub fn new(role: NetworkRole, hidden: Vec<usize>) -> Self {
        let (input_arity, output_arity) = role.arity();
        MlpSpec { input_arity, hidden, activation: Activation::Tanh, output_arity, init_seed: 0 }
    }

    /// `(fan_in, fan_out)` of each affine layer, output layer last.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.hidden.len() + 1);
        let mut fan_in = self.input_arity;
        for &w in &self.hidden {
            shapes.push((fan_in, w));
            fan_in = w;
        }
        shapes.push((fan_in, self.output_arity));
        shapes
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| (i + 1) * o).sum()
    }

    pub fn validate_for(&self, role: NetworkRole) -> Result<(), NetworkError> {
        let (expected_in, expected_out) = role.arity();
        if self.input_arity != expected_in || self.output_arity != expected_out {
            return Err(NetworkError::Arity {
                role,
                expected_in,
                expected_out,
                found_in: self.input_arity,
                found_out: self.output_arity,
            });
        }
        if let Some(layer) = self.hidden.iter().position(|&w| w == 0) {
            return Err(NetworkError::ZeroWidth { role, layer });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletSpecs {
    pub solid: MlpSpec,
    pub fin: MlpSpec,
    pub interface: MlpSpec,
}

impl TripletSpecs {
    /// Same hidden widths for all three networks.
    pub fn uniform(hidden: &[usize]) -> Self {
        TripletSpecs {
            solid: MlpSpec::new(NetworkRole::Solid, hidden.to_vec()),
            fin: MlpSpec::new(NetworkRole::Fin, hidden.to_vec()),
            interface: MlpSpec::new(NetworkRole::Interface, hidden.to_vec()),
        }
    }

    pub fn get(&self, role: NetworkRole) -> &MlpSpec {
        match role {
            NetworkRole::Solid => &self.solid,
            NetworkRole::Fin => &self.fin,
            NetworkRole::Interface => &self.interface,
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        for role in NetworkRole::ALL {
            self.get(role).validate_for(role)?;
        }
        Ok(())
    }
}

impl Default for TripletSpecs {
    fn default() -> Self {
        TripletSpecs::uniform(&[64, 64, 64, 64])
    }
}

/// The three networks sharing one flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkTriplet {
    specs: TripletSpecs,
    layout: ParameterLayout,
    params: Vec<f64>,
    hard_ic_interface: bool,
}

/// Glorot-uniform weights and zero biases, deterministic in `seed`.
pub fn init_triplet(specs: TripletSpecs, seed: u64) -> Result<NetworkTriplet, NetworkError> {
    specs.validate()?;
    let layout = ParameterLayout::new(&specs);
    let mut params = vec![0.0; layout.total()];
    for role in NetworkRole::ALL {
        let spec = specs.get(role);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(spec.init_seed));
        rng.set_stream(role.index() as u64);
        for slice in layout.layers(role) {
            let limit = (6.0 / (slice.fan_in + slice.fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let weights = &mut params[slice.offset..slice.offset + slice.fan_in * slice.fan_out];
            for w in weights.iter_mut() {
                *w = dist.sample(&mut rng);
            }
        }
    }
    Ok(NetworkTriplet { specs, layout, params, hard_ic_interface: false })
}

/// Output nodes of a field network: temperature and the two flux components.
#[derive(Clone, Copy, Debug)]
pub struct FieldNodes {
    pub temperature: NodeId,
    pub flux_x: NodeId,
    pub flux_y: NodeId,
}

/// Parameter leaves of one triplet inside a graph, `(weight, bias)` per layer.
#[derive(Clone, Debug)]
pub struct TripletLeaves {
    layers: [Vec<(NodeId, NodeId)>; 3],
    hard_ic_interface: bool,
}

impl NetworkTriplet {
    pub fn from_parts(specs: TripletSpecs, params: Vec<f64>) -> Result<Self, NetworkError> {
        specs.validate()?;
        let layout = ParameterLayout::new(&specs);
        if params.len() != layout.total() {
            return Err(NetworkError::Malformed(format!(
                "expected {} parameters, found {}",
                layout.total(),
                params.len()
            )));
        }
        Ok(NetworkTriplet { specs, layout, params, hard_ic_interface: false })
    }

    pub fn specs(&self) -> &TripletSpecs {
        &self.specs
    }

    pub fn layout(&self) -> &ParameterLayout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) {
        self.params.copy_from_slice(params);
    }

    pub fn hard_ic_interface(&self) -> bool {
        self.hard_ic_interface
    }

    /// Enable `S* = t*·raw`, which satisfies `S*(x*, 0) = 0` by construction.
    pub fn with_hard_ic_interface(mut self, on: bool) -> Self {
        self.hard_ic_interface = on;
        self
    }

    /// Register parameter leaves for all layers of the three networks.
    pub fn register(&self, g: &mut Graph) -> TripletLeaves {
        let layers = NetworkRole::ALL.map(|role| {
            self.layout
                .layers(role)
                .iter()
                .enumerate()
                .map(|(l, s)| {
                    let w = g.parameter(&format!("{role}.w{l}"), s.fan_in, s.fan_out);
                    let b = g.parameter(&format!("{role}.b{l}"), 1, s.fan_out);
                    (w, b)
                })
                .collect()
        });
        TripletLeaves { layers, hard_ic_interface: self.hard_ic_interface }
    }

    /// Bind the current parameter values to the leaves created by [`register`](Self::register).
    pub fn bind(&self, leaves: &TripletLeaves, bindings: &mut Bindings) {
        self.bind_values(&self.params, leaves, bindings);
    }

    /// Bind an arbitrary parameter vector with this triplet's layout.
    pub fn bind_values(&self, params: &[f64], leaves: &TripletLeaves, bindings: &mut Bindings) {
        for role in NetworkRole::ALL {
            for (s, &(w, b)) in self.layout.layers(role).iter().zip(&leaves.layers[role.index()]) {
                let nw = s.fan_in * s.fan_out;
                bindings.set_from_slice(w, s.fan_in, s.fan_out, &params[s.offset..s.offset + nw]);
                bindings.set_from_slice(b, 1, s.fan_out, &params[s.offset + nw..s.offset + nw + s.fan_out]);
            }
        }
    }

    pub fn forward_solid(&self, g: &mut Graph, leaves: &TripletLeaves, x: NodeId, y: NodeId, t: NodeId, p: NodeId) -> FieldNodes {
        field_outputs(g, leaves, NetworkRole::Solid, &[x, y, t, p])
    }

    pub fn forward_fin(&self, g: &mut Graph, leaves: &TripletLeaves, x: NodeId, y: NodeId, t: NodeId, p: NodeId) -> FieldNodes {
        field_outputs(g, leaves, NetworkRole::Fin, &[x, y, t, p])
    }

    pub fn forward_interface(&self, g: &mut Graph, leaves: &TripletLeaves, x: NodeId, t: NodeId, p: NodeId) -> NodeId {
        leaves.interface(g, x, t, p)
    }

    // ---- direct evaluation helpers (inference, sampling, exports) ----------------------

    /// `S*` at each `(x*, t*, P*)`.
    pub fn eval_interface(&self, points: &[[f64; 3]]) -> Result<Vec<f64>, NetworkError> {
        Ok(self.eval_interface_slopes(points, false)?.0)
    }

    /// `S*`, and optionally `(∂S*/∂x*, ∂²S*/∂x*²)`, at each `(x*, t*, P*)`.
    pub fn eval_interface_slopes(
        &self,
        points: &[[f64; 3]],
        with_slopes: bool,
    ) -> Result<(Vec<f64>, Vec<(f64, f64)>), NetworkError> {
        if points.is_empty() {
            return Ok((Vec::new(), Vec::new()));
        }
        let n = points.len();
        let mut g = Graph::new();
        let leaves = self.register(&mut g);
        let cols: Vec<NodeId> = ["x", "t", "p"].iter().map(|name| g.input(name, n, 1)).collect();
        let s = self.forward_interface(&mut g, &leaves, cols[0], cols[1], cols[2]);
        let slopes = if with_slopes {
            let sx = g.input_derivative(s, cols[0])?;
            let sxx = g.input_derivative(sx, cols[0])?;
            Some((sx, sxx))
        } else {
            None
        };
        let mut b = Bindings::new();
        self.bind(&leaves, &mut b);
        for (j, &c) in cols.iter().enumerate() {
            b.set(c, Matrix::column(&points.iter().map(|p| p[j]).collect::<Vec<_>>()));
        }
        let eval = g.evaluate(&b)?;
        let values = eval.value(s).as_slice().to_vec();
        let slopes = match slopes {
            Some((sx, sxx)) => eval
                .value(sx)
                .as_slice()
                .iter()
                .zip(eval.value(sxx).as_slice())
                .map(|(&a, &b)| (a, b))
                .collect(),
            None => Vec::new(),
        };
        Ok((values, slopes))
    }

    /// `(T*, q_x*, q_y*)` of the solid or fin network at each `(x*, y*, t*, P*)`.
    pub fn eval_field(&self, role: NetworkRole, points: &[[f64; 4]]) -> Result<Vec<[f64; 3]>, NetworkError> {
        assert!(role != NetworkRole::Interface, "eval_field is for the field networks");
        if points.is_empty() {
            return Ok(Vec::new());
        }
        let n = points.len();
        let mut g = Graph::new();
        let leaves = self.register(&mut g);
        let cols: Vec<NodeId> = ["x", "y", "t", "p"].iter().map(|name| g.input(name, n, 1)).collect();
        let out = leaves.network_output(&mut g, role, &cols);
        let mut b = Bindings::new();
        self.bind(&leaves, &mut b);
        for (j, &c) in cols.iter().enumerate() {
            b.set(c, Matrix::column(&points.iter().map(|p| p[j]).collect::<Vec<_>>()));
        }
        let eval = g.evaluate(&b)?;
        Ok(eval.value(out).as_slice().chunks_exact(3).map(|r| [r[0], r[1], r[2]]).collect())
    }
}

impl TripletLeaves {
    /// All parameter leaves in flat-layout order.
    pub fn all(&self) -> Vec<NodeId> {
        self.layers.iter().flat_map(|l| l.iter().flat_map(|&(w, b)| [w, b])).collect()
    }

    /// Raw network output (`n × output_arity`) for the given input columns.
    pub fn network_output(&self, g: &mut Graph, role: NetworkRole, columns: &[NodeId]) -> NodeId {
        let mut h = g.hstack(columns);
        let layers = &self.layers[role.index()];
        for (l, &(w, b)) in layers.iter().enumerate() {
            let z = g.affine(h, w, Some(b));
            h = if l + 1 < layers.len() { g.tanh(z) } else { z };
        }
        h
    }

    pub fn interface(&self, g: &mut Graph, x: NodeId, t: NodeId, p: NodeId) -> NodeId {
        let raw = self.network_output(g, NetworkRole::Interface, &[x, t, p]);
        if self.hard_ic_interface {
            g.mul(t, raw)
        } else {
            raw
        }
    }

    pub fn hard_ic_interface(&self) -> bool {
        self.hard_ic_interface
    }
}

fn field_outputs(g: &mut Graph, leaves: &TripletLeaves, role: NetworkRole, cols: &[NodeId]) -> FieldNodes {
    let out = leaves.network_output(g, role, cols);
    FieldNodes {
        temperature: g.select_column(out, 0),
        flux_x: g.select_column(out, 1),
        flux_y: g.select_column(out, 2),
    }
}

#[cfg(test)]
mod tests;
