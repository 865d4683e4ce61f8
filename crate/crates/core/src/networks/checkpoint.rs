use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use super::{NetworkError, NetworkRole, NetworkTriplet, TripletSpecs};
use crate::training::{OptimizerState, WeightState};

pub const FORMAT_VERSION: u32 = 1;

/// Weights of one affine layer in row-major `fan_in × fan_out` order, then its biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerParams {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleParams {
    pub solid: Vec<LayerParams>,
    pub fin: Vec<LayerParams>,
    pub interface: Vec<LayerParams>,
}

impl RoleParams {
    fn get(&self, role: NetworkRole) -> &[LayerParams] {
        match role {
            NetworkRole::Solid => &self.solid,
            NetworkRole::Fin => &self.fin,
            NetworkRole::Interface => &self.interface,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub seed: u64,
    pub specs: TripletSpecs,
    pub hard_ic_interface: bool,
    pub parameters: RoleParams,
    pub weight_state: WeightState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_state: Option<OptimizerState>,
    pub config_echo: serde_json::Value,
}

impl Checkpoint {
    pub fn new(
        triplet: &NetworkTriplet,
        seed: u64,
        weight_state: WeightState,
        optimizer_state: Option<OptimizerState>,
        config_echo: serde_json::Value,
    ) -> Self {
        let p = triplet.params();
        let layers = |role| {
            triplet
                .layout()
                .layers(role)
                .iter()
                .map(|s| {
                    let nw = s.fan_in * s.fan_out;
                    LayerParams {
                        fan_in: s.fan_in,
                        fan_out: s.fan_out,
                        weights: p[s.offset..s.offset + nw].to_vec(),
                        bias: p[s.offset + nw..s.offset + nw + s.fan_out].to_vec(),
                    }
                })
                .collect()
        };
        Checkpoint {
            format_version: FORMAT_VERSION,
            seed,
            specs: triplet.specs().clone(),
            hard_ic_interface: triplet.hard_ic_interface(),
            parameters: RoleParams {
                solid: layers(NetworkRole::Solid),
                fin: layers(NetworkRole::Fin),
                interface: layers(NetworkRole::Interface),
            },
            weight_state,
            optimizer_state,
            config_echo,
        }
    }

    /// Rebuild the networks, checking every layer against the stored specs.
    pub fn triplet(&self) -> Result<NetworkTriplet, NetworkError> {
        self.specs.validate()?;
        let mut flat = Vec::new();
        for role in NetworkRole::ALL {
            let shapes = self.specs.get(role).layer_shapes();
            let layers = self.parameters.get(role);
            if layers.len() != shapes.len() {
                return Err(NetworkError::Malformed(format!(
                    "{role} network has {} layers, specs describe {}",
                    layers.len(),
                    shapes.len()
                )));
            }
            for (l, (lp, &(fan_in, fan_out))) in layers.iter().zip(&shapes).enumerate() {
                if lp.fan_in != fan_in || lp.fan_out != fan_out {
                    return Err(NetworkError::Malformed(format!(
                        "{role} layer {l} is {}x{}, specs describe {fan_in}x{fan_out}",
                        lp.fan_in, lp.fan_out
                    )));
                }
                if lp.weights.len() != fan_in * fan_out {
                    return Err(NetworkError::LayerShape { role, layer: l, expected: fan_in * fan_out, found: lp.weights.len() });
                }
                if lp.bias.len() != fan_out {
                    return Err(NetworkError::LayerShape { role, layer: l, expected: fan_out, found: lp.bias.len() });
                }
                flat.extend_from_slice(&lp.weights);
                flat.extend_from_slice(&lp.bias);
            }
        }
        Ok(NetworkTriplet::from_parts(self.specs.clone(), flat)?.with_hard_ic_interface(self.hard_ic_interface))
    }

    /// Serialized document; floats carry 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
        self.serialize(&mut ser).expect("checkpoint serialization cannot fail");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json emits utf-8")
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| NetworkError::Malformed(e.to_string()))?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| NetworkError::Malformed("missing format_version".into()))?;
        if version != FORMAT_VERSION as u64 {
            return Err(NetworkError::Version { found: version.min(u32::MAX as u64) as u32, expected: FORMAT_VERSION });
        }
        let ckpt: Checkpoint = serde_json::from_value(value).map_err(|e| NetworkError::Malformed(e.to_string()))?;
        ckpt.triplet()?;
        Ok(ckpt)
    }
}

/// Write `ckpt` to `path` through a temporary sibling file and a rename.
pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), NetworkError> {
    write_atomic(path, ckpt.to_json().as_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, NetworkError> {
    let text = fs::read_to_string(path)?;
    Checkpoint::from_json(&text)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f32(writer, value)
    }
}
