use serde::{Deserialize, Serialize};

use super::tridiag::solve_tridiagonal;
use super::OracleError;
use crate::physics::{Geometry, MaterialProps};

/// Condition at the cooled wall of the solid layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallCondition {
    /// Convection to the ambient through `h`.
    #[default]
    Convective,
    /// Wall held at the ambient temperature (`h → ∞`).
    FixedTemperature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OneDConfig {
    /// Nodes of the solid-layer grid and of the fin grid.
    pub grid_n: usize,
    /// Time step, s.
    pub dt: f64,
    /// Number of equal output intervals over `[0, t_end]`.
    pub snapshots: usize,
    pub wall: WallCondition,
    /// Initial wall-side front position, m.
    pub x_seed: f64,
    /// Initial fin-side layer thickness, m.
    pub y_seed: f64,
}

impl Default for OneDConfig {
    fn default() -> Self {
        OneDConfig { grid_n: 2000, dt: 0.1, snapshots: 200, wall: WallCondition::Convective, x_seed: 1e-6, y_seed: 1e-6 }
    }
}

impl OneDConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.grid_n < 4 {
            return Err(OracleError::Config(format!("grid_n must be at least 4, got {}", self.grid_n)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(OracleError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.snapshots == 0 {
            return Err(OracleError::Config("snapshots must be at least 1".into()));
        }
        if !(self.x_seed > 0.0 && self.y_seed > 0.0) {
            return Err(OracleError::Config("seeds must be positive".into()));
        }
        Ok(())
    }
}

/// State at one output time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneDSnapshot {
    pub t: f64,
    /// Wall-side front position `X`, m.
    pub x_front: f64,
    /// Solid temperature on the immobilised grid `ξ = x / X`.
    pub ts: Vec<f64>,
    /// Fin-side layer thickness `Y` at each fin node, m.
    pub y: Vec<f64>,
    /// Fin temperature at each fin node.
    pub tf: Vec<f64>,
}

/// Output of [`solve_1d`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneDSeries {
    /// Fin node positions over `[0, l_f]`, m.
    pub fin_x: Vec<f64>,
    /// Immobilised solid grid over `[0, 1]`.
    pub xi: Vec<f64>,
    pub snapshots: Vec<OneDSnapshot>,
}

fn bracket(v: &[f64], q: f64) -> (usize, f64) {
    let n = v.len();
    if n < 2 || q <= v[0] {
        return (0, 0.0);
    }
    if q >= v[n - 1] {
        return (n - 2, 1.0);
    }
    let i = v.partition_point(|&a| a <= q).saturating_sub(1).min(n - 2);
    let span = v[i + 1] - v[i];
    (i, if span > 0.0 { (q - v[i]) / span } else { 0.0 })
}

impl OneDSeries {
    pub fn t_end(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }

    fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Wall-side front position, linear in time between snapshots.
    pub fn front_at(&self, t: f64) -> f64 {
        let (i, w) = bracket(&self.times(), t);
        match self.snapshots.len() {
            0 => 0.0,
            1 => self.snapshots[0].x_front,
            _ => (1.0 - w) * self.snapshots[i].x_front + w * self.snapshots[i + 1].x_front,
        }
    }

    /// `(Y, T_f)` at fin position `x` (m) and time `t` (s), bilinear between grid nodes and
    /// snapshots. Queries outside the covered range are clamped.
    pub fn fin_at(&self, x: f64, t: f64) -> (f64, f64) {
        if self.snapshots.is_empty() {
            return (0.0, f64::NAN);
        }
        let (j, wx) = bracket(&self.fin_x, x);
        let at = |s: &OneDSnapshot| {
            let lerp = |v: &[f64]| if v.len() < 2 { v[0] } else { (1.0 - wx) * v[j] + wx * v[j + 1] };
            (lerp(&s.y), lerp(&s.tf))
        };
        if self.snapshots.len() == 1 {
            return at(&self.snapshots[0]);
        }
        let (i, wt) = bracket(&self.times(), t);
        let (a, b) = (at(&self.snapshots[i]), at(&self.snapshots[i + 1]));
        ((1.0 - wt) * a.0 + wt * b.0, (1.0 - wt) * a.1 + wt * b.1)
    }
}

struct Solid {
    alpha: f64,
    dxi: f64,
    biot: f64,
    wall: WallCondition,
    t_amb: f64,
    t_melt: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    scratch: Vec<f64>,
}

impl Solid {
    /// Temperatures on the immobilised grid after one step of length `dt` that moves the
    /// front from `x_old` to `x_new`. The front node is held at the melt temperature.
    fn profile(&mut self, old: &[f64], x_old: f64, x_new: f64, dt: f64, out: &mut [f64]) {
        let n = old.len();
        let m = n - 1;
        let aa = self.alpha * dt / (x_new * x_new * self.dxi * self.dxi);
        let growth = (x_new - x_old) / (x_new * 2.0 * self.dxi);
        for j in 0..m {
            let bb = j as f64 * self.dxi * growth;
            self.a[j] = -(aa - bb);
            self.b[j] = 1.0 + 2.0 * aa;
            self.c[j] = -(aa + bb);
            self.d[j] = old[j];
        }
        match self.wall {
            WallCondition::Convective => {
                let r = 2.0 * aa * self.dxi * x_new * self.biot;
                self.b[0] = 1.0 + 2.0 * aa + r;
                self.c[0] = -2.0 * aa;
                self.d[0] = old[0] + r * self.t_amb;
            }
            WallCondition::FixedTemperature => {
                self.b[0] = 1.0;
                self.c[0] = 0.0;
                self.d[0] = self.t_amb;
            }
        }
        self.d[m - 1] -= self.c[m - 1] * self.t_melt;
        self.c[m - 1] = 0.0;
        solve_tridiagonal(&self.a[..m], &self.b[..m], &self.c[..m], &self.d[..m], &mut out[..m], &mut self.scratch);
        out[m] = self.t_melt;
    }

    fn front_gradient(&self, v: &[f64]) -> f64 {
        let n = v.len();
        (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * self.dxi)
    }
}

/// Two-region model: a solid layer growing from the cooled wall, tracked on an immobilised
/// grid with an implicit step and a Stefan condition solved for the new front position, and
/// a fin losing heat to the melt through a solid layer of thickness `Y(x, t)` with
/// `ρ_s L ∂Y/∂t = k_s (T_m − T_f) / Y`.
pub fn solve_1d(props: &MaterialProps, geom: &Geometry, t_end: f64, cfg: &OneDConfig) -> Result<OneDSeries, OracleError> {
    cfg.validate()?;
    for (name, v) in [
        ("rho_s", props.rho_s),
        ("rho_f", props.rho_f),
        ("c_s", props.c_s),
        ("c_f", props.c_f),
        ("k_s", props.k_s),
        ("k_f", props.k_f),
        ("latent_heat", props.latent_heat),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(OracleError::Config(format!("{name} must be positive, got {v}")));
        }
    }
    if !(props.h >= 0.0) || props.t_ambient > props.t_melt {
        return Err(OracleError::Config("need h ≥ 0 and ambient at or below the melt temperature".into()));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(OracleError::Config(format!("t_end must be non-negative, got {t_end}")));
    }
    let l_f = geom.l_f();
    if !(l_f > 0.0 && geom.delta > 0.0) {
        return Err(OracleError::Config("fin length and thickness must be positive".into()));
    }

    let n = cfg.grid_n;
    let (tm, tinf) = (props.t_melt, props.t_ambient);
    let dxi = 1.0 / (n - 1) as f64;
    let xi: Vec<f64> = (0..n).map(|j| j as f64 * dxi).collect();
    let dx = l_f / (n - 1) as f64;
    let fin_x: Vec<f64> = (0..n).map(|i| i as f64 * dx).collect();

    let initial = OneDSnapshot { t: 0.0, x_front: 0.0, ts: vec![tm; n], y: vec![0.0; n], tf: vec![tm; n] };
    let mut snapshots = vec![initial];
    if t_end == 0.0 {
        return Ok(OneDSeries { fin_x, xi, snapshots });
    }

    let mut solid = Solid {
        alpha: props.diffusivity_solid(),
        dxi,
        biot: props.h / props.k_s,
        wall: cfg.wall,
        t_amb: tinf,
        t_melt: tm,
        a: vec![0.0; n],
        b: vec![0.0; n],
        c: vec![0.0; n],
        d: vec![0.0; n],
        scratch: vec![0.0; n],
    };
    let stefan = props.k_s / (props.rho_s * props.latent_heat);

    let mut x_front = cfg.x_seed;
    let t_wall = match cfg.wall {
        WallCondition::FixedTemperature => tinf,
        WallCondition::Convective => {
            // Steady linear profile through the seed layer in series with the wall film.
            let bi = props.h * x_front / props.k_s;
            tinf + (tm - tinf) * bi / (1.0 + bi)
        }
    };
    let mut ts: Vec<f64> = xi.iter().map(|&s| t_wall + (tm - t_wall) * s).collect();
    let mut trial = vec![0.0; n];

    let mut y = vec![cfg.y_seed; n];
    let mut tf = vec![tm; n];
    let alpha_f = props.diffusivity_fin();
    let sink = props.k_s / (geom.delta * props.k_f);
    let bi_f = props.h / props.k_f;
    let growth = 2.0 * props.k_s / (props.rho_s * props.latent_heat);
    let (mut fa, mut fb, mut fc, mut fd) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut fs = vec![0.0; n];
    let mut tf_new = vec![0.0; n];

    let mut t = 0.0;
    for k in 1..=cfg.snapshots {
        let target = t_end * k as f64 / cfg.snapshots as f64;
        while t < target {
            let step = if target - t <= cfg.dt * (1.0 + 1e-9) { target - t } else { cfg.dt };

            // Front position: root of F(X) = X − X_old − dt·(k/ρL)·T_ξ(1)/X.
            let x_old = x_front;
            let mut f = |x: f64, buf: &mut Vec<f64>| {
                solid.profile(&ts, x_old, x, step, buf);
                x - x_old - step * stefan * solid.front_gradient(buf) / x
            };
            let f_lo = f(x_old, &mut trial);
            let x_new = if f_lo >= 0.0 {
                x_old
            } else {
                let (mut lo, mut flo) = (x_old, f_lo);
                let mut hi = x_old * 1.5;
                let mut fhi = f(hi, &mut trial);
                let mut expansions = 0;
                while fhi < 0.0 {
                    hi = x_old + 2.0 * (hi - x_old);
                    fhi = f(hi, &mut trial);
                    expansions += 1;
                    if expansions > 200 || !fhi.is_finite() {
                        return Err(OracleError::StepSize { t, dt: cfg.dt, suggested: cfg.dt / 2.0 });
                    }
                }
                // Illinois false position.
                let mut side = 0i8;
                let mut root = hi;
                for _ in 0..200 {
                    root = (lo * fhi - hi * flo) / (fhi - flo);
                    if !(root > lo && root < hi) {
                        root = 0.5 * (lo + hi);
                    }
                    let fr = f(root, &mut trial);
                    if fr == 0.0 || (hi - lo) <= 1e-13 * hi {
                        break;
                    }
                    if fr < 0.0 {
                        lo = root;
                        flo = fr;
                        if side == -1 {
                            fhi *= 0.5;
                        }
                        side = -1;
                    } else {
                        hi = root;
                        fhi = fr;
                        if side == 1 {
                            flo *= 0.5;
                        }
                        side = 1;
                    }
                    if (hi - lo) <= 1e-13 * hi {
                        root = 0.5 * (lo + hi);
                        break;
                    }
                }
                root
            };
            solid.profile(&ts, x_old, x_new, step, &mut trial);
            std::mem::swap(&mut ts, &mut trial);
            x_front = x_new;

            // Fin: implicit diffusion with the sink lagged in Y, convective at both ends.
            let r = alpha_f * step / (dx * dx);
            for i in 0..n {
                let beta = alpha_f * step * sink / y[i];
                fa[i] = -r;
                fb[i] = 1.0 + 2.0 * r + beta;
                fc[i] = -r;
                fd[i] = tf[i] + beta * tm;
            }
            let end = 2.0 * r * dx * bi_f;
            fb[0] += end;
            fc[0] = -2.0 * r;
            fd[0] += end * tinf;
            fb[n - 1] += end;
            fa[n - 1] = -2.0 * r;
            fd[n - 1] += end * tinf;
            solve_tridiagonal(&fa, &fb, &fc, &fd, &mut tf_new, &mut fs);
            std::mem::swap(&mut tf, &mut tf_new);
            for (yi, &ti) in y.iter_mut().zip(&tf) {
                *yi = (*yi * *yi + growth * (tm - ti).max(0.0) * step).sqrt();
            }

            if !(x_front.is_finite() && ts.iter().chain(&tf).chain(&y).all(|v| v.is_finite())) {
                return Err(OracleError::StepSize { t, dt: cfg.dt, suggested: cfg.dt / 2.0 });
            }
            t += step;
        }
        t = target;
        snapshots.push(OneDSnapshot { t, x_front, ts: ts.clone(), y: y.clone(), tf: tf.clone() });
    }
    Ok(OneDSeries { fin_x, xi, snapshots })
}
