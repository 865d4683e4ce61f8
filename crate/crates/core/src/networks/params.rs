use super::{NetworkRole, TripletSpecs};

/// One affine layer inside the flat parameter vector: `fan_in × fan_out` row-major
/// weights at `offset`, followed by `fan_out` biases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSlice {
    pub fan_in: usize,
    pub fan_out: usize,
    pub offset: usize,
}

impl LayerSlice {
    pub fn len(&self) -> usize {
        (self.fan_in + 1) * self.fan_out
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bias_offset(&self) -> usize {
        self.offset + self.fan_in * self.fan_out
    }
}

/// Flat layout of solid, fin and interface parameters, in that order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterLayout {
    layers: [Vec<LayerSlice>; 3],
    total: usize,
}

impl ParameterLayout {
    pub fn new(specs: &TripletSpecs) -> Self {
        let mut offset = 0;
        let layers = NetworkRole::ALL.map(|role| {
            specs
                .get(role)
                .layer_shapes()
                .into_iter()
                .map(|(fan_in, fan_out)| {
                    let s = LayerSlice { fan_in, fan_out, offset };
                    offset += s.len();
                    s
                })
                .collect::<Vec<_>>()
        });
        ParameterLayout { layers, total: offset }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn layers(&self, role: NetworkRole) -> &[LayerSlice] {
        &self.layers[role.index()]
    }

    /// Flat range occupied by one network.
    pub fn range(&self, role: NetworkRole) -> std::ops::Range<usize> {
        let l = self.layers(role);
        let start = l.first().map_or(0, |s| s.offset);
        let end = l.last().map_or(start, |s| s.offset + s.len());
        start..end
    }

    /// Flat index of weight `(row, col)` of `layer`, with `row == fan_in` addressing the bias.
    pub fn index(&self, role: NetworkRole, layer: usize, row: usize, col: usize) -> Option<usize> {
        let s = self.layers(role).get(layer)?;
        (row <= s.fan_in && col < s.fan_out).then(|| s.offset + row * s.fan_out + col)
    }

    /// Inverse of [`index`](Self::index).
    pub fn locate(&self, flat: usize) -> Option<(NetworkRole, usize, usize, usize)> {
        for role in NetworkRole::ALL {
            for (l, s) in self.layers(role).iter().enumerate() {
                if flat >= s.offset && flat < s.offset + s.len() {
                    let local = flat - s.offset;
                    return Some((role, l, local / s.fan_out, local % s.fan_out));
                }
            }
        }
        None
    }
}
