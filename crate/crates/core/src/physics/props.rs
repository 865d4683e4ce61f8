use serde::{Deserialize, Serialize};

use super::PhysicsError;

/// Thermophysical properties of the paraffin (solid phase) and the aluminium fin, SI units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialProps {
    pub rho_s: f64,
    pub rho_f: f64,
    pub c_s: f64,
    pub c_f: f64,
    pub k_s: f64,
    pub k_f: f64,
    pub latent_heat: f64,
    pub t_melt: f64,
    pub h: f64,
    pub t_ambient: f64,
    /// Liquid specific heat; carried along but never enters the residuals.
    pub c_l: f64,
    /// Liquid conductivity; carried along but never enters the residuals.
    pub k_l: f64,
}

impl Default for MaterialProps {
    fn default() -> Self {
        MaterialProps {
            rho_s: 830.0,
            rho_f: 2770.0,
            c_s: 1920.0,
            c_f: 875.0,
            k_s: 0.514,
            k_f: 177.0,
            latent_heat: 251_000.0,
            t_melt: 32.0,
            h: 65.0,
            t_ambient: 10.0,
            c_l: 3260.0,
            k_l: 0.224,
        }
    }
}

impl MaterialProps {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let positive = [
            ("rho_s", self.rho_s),
            ("rho_f", self.rho_f),
            ("c_s", self.c_s),
            ("c_f", self.c_f),
            ("k_s", self.k_s),
            ("k_f", self.k_f),
            ("latent_heat", self.latent_heat),
            ("h", self.h),
            ("c_l", self.c_l),
            ("k_l", self.k_l),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PhysicsError::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.t_melt > self.t_ambient) {
            return Err(PhysicsError::Config(format!(
                "melt temperature {} must exceed ambient {} (no driving force otherwise)",
                self.t_melt, self.t_ambient
            )));
        }
        Ok(())
    }

    pub fn diffusivity_solid(&self) -> f64 {
        self.k_s / (self.rho_s * self.c_s)
    }

    pub fn diffusivity_fin(&self) -> f64 {
        self.k_f / (self.rho_f * self.c_f)
    }
}

/// Cell geometry in metres; `aspect_ratio = l_f / l_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub l_c: f64,
    pub delta: f64,
    pub aspect_ratio: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry { l_c: 0.01, delta: 0.0005, aspect_ratio: 2.0, p_min: 1.0, p_max: 5.0 }
    }
}

pub const P_MIN: f64 = 1.0;
pub const P_MAX: f64 = 5.0;

impl Geometry {
    pub fn with_aspect_ratio(&self, p: f64) -> Geometry {
        Geometry { aspect_ratio: p, ..self.clone() }
    }

    pub fn l_f(&self) -> f64 {
        self.aspect_ratio * self.l_c
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.l_c > 0.0 && self.delta > 0.0 && self.delta < self.l_c) {
            return Err(PhysicsError::Config(format!(
                "need 0 < delta < l_c, got delta = {}, l_c = {}",
                self.delta, self.l_c
            )));
        }
        if !(self.p_min >= P_MIN && self.p_max <= P_MAX && self.p_min < self.p_max) {
            return Err(PhysicsError::Config(format!(
                "aspect-ratio range [{}, {}] must be a non-empty subset of [{P_MIN}, {P_MAX}]",
                self.p_min, self.p_max
            )));
        }
        if !(self.aspect_ratio >= self.p_min && self.aspect_ratio <= self.p_max) {
            return Err(PhysicsError::Config(format!(
                "aspect ratio {} outside [{}, {}]",
                self.aspect_ratio, self.p_min, self.p_max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessGroups {
    pub ja: f64,
    pub bi_s: f64,
    pub bi_f: f64,
    pub alpha_sf: f64,
    pub delta_star: f64,
    /// `k_s / k_f`, used only by the optional flux-continuity residual.
    pub conductivity_ratio: f64,
}

pub fn compute_groups(props: &MaterialProps, geom: &Geometry) -> Result<DimensionlessGroups, PhysicsError> {
    props.validate()?;
    geom.validate()?;
    Ok(DimensionlessGroups {
        ja: props.c_s * (props.t_melt - props.t_ambient) / props.latent_heat,
        bi_s: props.h * geom.l_c / props.k_s,
        bi_f: props.h * geom.l_c / props.k_f,
        alpha_sf: props.k_s * props.rho_f * props.c_f / (props.rho_s * props.c_s * props.k_f),
        delta_star: geom.delta / geom.l_c,
        conductivity_ratio: props.k_s / props.k_f,
    })
}

/// Conversions between physical and dimensionless variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingMap {
    pub props: MaterialProps,
    pub geom: Geometry,
}

impl ScalingMap {
    pub fn new(props: MaterialProps, geom: Geometry) -> Result<Self, PhysicsError> {
        props.validate()?;
        geom.validate()?;
        Ok(ScalingMap { props, geom })
    }

    pub fn groups(&self) -> DimensionlessGroups {
        compute_groups(&self.props, &self.geom).expect("validated at construction")
    }

    pub fn length_star(&self, x: f64) -> f64 {
        x / self.geom.l_c
    }

    pub fn length(&self, x_star: f64) -> f64 {
        x_star * self.geom.l_c
    }

    /// Diffusive time scale `l_c² / α_s` in seconds.
    pub fn time_scale(&self) -> f64 {
        self.geom.l_c * self.geom.l_c / self.props.diffusivity_solid()
    }

    pub fn time_star(&self, t: f64) -> Result<f64, PhysicsError> {
        if !(t >= 0.0) {
            return Err(PhysicsError::Domain(format!("time must be non-negative, got {t}")));
        }
        Ok(t / self.time_scale())
    }

    pub fn time(&self, t_star: f64) -> f64 {
        t_star * self.time_scale()
    }

    pub fn temperature_star(&self, temp: f64) -> f64 {
        (temp - self.props.t_ambient) / (self.props.t_melt - self.props.t_ambient)
    }

    pub fn temperature(&self, t_star: f64) -> f64 {
        self.props.t_ambient + t_star * (self.props.t_melt - self.props.t_ambient)
    }

    /// Temperature-gradient scale `(T_m − T_∞)/l_c` for both flux components.
    pub fn flux_scale(&self) -> f64 {
        (self.props.t_melt - self.props.t_ambient) / self.geom.l_c
    }

    pub fn flux_star(&self, grad: f64) -> f64 {
        grad / self.flux_scale()
    }

    pub fn flux(&self, q_star: f64) -> f64 {
        q_star * self.flux_scale()
    }

    pub fn p_star(&self, p: f64) -> Result<f64, PhysicsError> {
        let (lo, hi) = (self.geom.p_min, self.geom.p_max);
        if !(p >= lo && p <= hi) {
            return Err(PhysicsError::Domain(format!("aspect ratio {p} outside [{lo}, {hi}]")));
        }
        Ok((p - lo) / (hi - lo))
    }

    pub fn p(&self, p_star: f64) -> f64 {
        self.geom.p_min + p_star * (self.geom.p_max - self.geom.p_min)
    }

    /// Right edge `x* = P/2` of the half-cell for the aspect ratio encoded by `p_star`.
    pub fn x_max_star(&self, p_star: f64) -> f64 {
        0.5 * self.p(p_star)
    }
}

/// `t* = α_s t / l_c²`.
pub fn nondim_time(t: f64, props: &MaterialProps, geom: &Geometry) -> Result<f64, PhysicsError> {
    ScalingMap::new(props.clone(), geom.clone())?.time_star(t)
}

/// `P* = (P − P_min)/(P_max − P_min)`.
pub fn normalize_p(p: f64, geom: &Geometry) -> Result<f64, PhysicsError> {
    let (lo, hi) = (geom.p_min, geom.p_max);
    if !(p >= lo && p <= hi) {
        return Err(PhysicsError::Domain(format!("aspect ratio {p} outside [{lo}, {hi}]")));
    }
    Ok((p - lo) / (hi - lo))
}
