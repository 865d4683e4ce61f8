use serde::{Deserialize, Serialize};

use super::tridiag::solve_tridiagonal;
use super::OracleError;
use crate::physics::{Geometry, MaterialProps};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnthalpyConfig {
    /// Cells across the half-width `[0, l_f/2]`.
    pub nx: usize,
    /// Cells across the height `[0, l_c]`; in fin mode the bottom row is the fin.
    pub ny: usize,
    /// Width of the freezing range below the melt temperature, K.
    pub mush: f64,
    /// Time step, s; `None` picks the largest admissible step.
    pub dt: Option<f64>,
    /// Number of equal output intervals over `[0, t_end]`.
    pub snapshots: usize,
    /// Explicit output instants in `(0, t_end]`, s; replaces the equal intervals when given.
    pub output_times: Vec<f64>,
    /// Replace the fin by melt so the cell reduces to a slab cooled from `x = 0`.
    pub slab: bool,
}

impl Default for EnthalpyConfig {
    fn default() -> Self {
        EnthalpyConfig { nx: 256, ny: 128, mush: 0.1, dt: None, snapshots: 20, output_times: Vec::new(), slab: false }
    }
}

/// Phase of a cell in a snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellPhase {
    Fin,
    Solid,
    Mushy,
    Liquid,
}

impl CellPhase {
    pub fn name(self) -> &'static str {
        match self {
            CellPhase::Fin => "fin",
            CellPhase::Solid => "solid",
            CellPhase::Mushy => "mushy",
            CellPhase::Liquid => "liquid",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnthalpySnapshot {
    pub t: f64,
    /// Temperature, row-major with `nx` cells per row, bottom row first.
    pub temperature: Vec<f64>,
    /// Liquid fraction per cell; 0 for fin cells.
    pub liquid_fraction: Vec<f64>,
    pub phase: Vec<CellPhase>,
    /// Interface height per column, m.
    pub interface: Vec<f64>,
    /// Front position along `x` per row, m.
    pub front: Vec<f64>,
    /// Solidified share of the melt volume.
    pub solid_fraction: f64,
    /// Heat content relative to solid at the melt temperature, J per metre of depth.
    pub energy: f64,
    /// Heat released through the wall so far, J per metre of depth.
    pub released: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnthalpySeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<EnthalpySnapshot>,
}

struct Layout {
    nx: usize,
    rows: usize,
    dx: f64,
    dy: f64,
    y0: f64,
    width: f64,
    height: f64,
}

struct Melt {
    cap: f64,
    latent: f64,
    t_melt: f64,
    mush: f64,
}

impl Melt {
    /// Temperature and liquid fraction for volumetric enthalpy `h` relative to solid at the
    /// melt temperature.
    #[inline]
    fn state(&self, h: f64) -> (f64, f64) {
        if h >= self.latent {
            (self.t_melt + (h - self.latent) / self.cap, 1.0)
        } else if h <= -self.cap * self.mush {
            (self.t_melt + h / self.cap, 0.0)
        } else {
            let t = self.t_melt + (h - self.latent) / (self.cap + self.latent / self.mush);
            (t, ((t - self.t_melt + self.mush) / self.mush).clamp(0.0, 1.0))
        }
    }
}

/// Fixed-grid enthalpy solver for the half cell. The melt is stepped explicitly; the fin is
/// a single row of cells stepped implicitly along `x`, exchanging heat with the first melt
/// row at the previous melt temperature.
pub fn solve_2d_enthalpy(
    props: &MaterialProps,
    geom: &Geometry,
    t_end: f64,
    cfg: &EnthalpyConfig,
) -> Result<EnthalpySeries, OracleError> {
    if cfg.nx < 2 || cfg.ny < 3 {
        return Err(OracleError::Config(format!("grid must be at least 2×3, got {}×{}", cfg.nx, cfg.ny)));
    }
    if !(cfg.mush > 0.0) || cfg.snapshots == 0 {
        return Err(OracleError::Config("mush width and snapshot count must be positive".into()));
    }
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
    if !(props.h >= 0.0 && t_end >= 0.0 && t_end.is_finite()) {
        return Err(OracleError::Config("need h ≥ 0 and a non-negative end time".into()));
    }
    if !(geom.l_c > 0.0 && geom.delta > 0.0 && geom.delta < geom.l_c && geom.aspect_ratio > 0.0) {
        return Err(OracleError::Config("invalid geometry".into()));
    }

    let nx = cfg.nx;
    let width = 0.5 * geom.l_f();
    let dx = width / nx as f64;
    let (rows, dy, y0) = if cfg.slab {
        (cfg.ny, geom.l_c / cfg.ny as f64, 0.0)
    } else {
        (cfg.ny - 1, (geom.l_c - geom.delta) / (cfg.ny - 1) as f64, geom.delta)
    };
    let lay = Layout { nx, rows, dx, dy, y0, width, height: geom.l_c };
    let melt = Melt { cap: props.rho_s * props.c_s, latent: props.rho_s * props.latent_heat, t_melt: props.t_melt, mush: cfg.mush };
    let ks = props.k_s;
    let tinf = props.t_ambient;

    // Conductances per metre of depth, W/K.
    let gx = ks * dy / dx;
    let gy = ks * dx / dy;
    let film = |len: f64, half: f64, k: f64| if props.h > 0.0 { len / (half / k + 1.0 / props.h) } else { 0.0 };
    let g_wall = film(dy, 0.5 * dx, ks);
    let fin = !cfg.slab;
    let delta = geom.delta;
    let g_couple = if fin { dx / (0.5 * delta / props.k_f + 0.5 * dy / ks) } else { 0.0 };
    let g_fin_x = props.k_f * delta / dx;
    let g_fin_wall = if fin { film(delta, 0.5 * dx, props.k_f) } else { 0.0 };
    let vol = dx * dy;
    let fin_cap = props.rho_f * props.c_f * dx * delta;

    let bound = 0.9 * melt.cap * dx.min(dy).powi(2) / (4.0 * ks);
    let mut positivity = f64::INFINITY;
    for j in 0..rows {
        for i in 0..nx {
            let mut g = 0.0;
            g += if i == 0 { g_wall } else { gx };
            g += if i + 1 < nx { gx } else { 0.0 };
            g += if j + 1 < rows { gy } else { 0.0 };
            g += if j > 0 { gy } else { g_couple };
            positivity = positivity.min(melt.cap * vol / g);
        }
    }
    let dt_max = bound.min(positivity);
    let dt = match cfg.dt {
        Some(dt) if !(dt > 0.0 && dt <= dt_max) => {
            return Err(OracleError::StepSize { t: 0.0, dt, suggested: dt_max });
        }
        Some(dt) => dt,
        None => dt_max,
    };

    let cells = nx * rows;
    let mut h = vec![melt.latent; cells];
    let mut temp = vec![props.t_melt; cells];
    let mut frac = vec![1.0; cells];
    let mut tfin = vec![props.t_melt; if fin { nx } else { 0 }];
    let mut released = 0.0;

    let (mut fa, mut fb, mut fc, mut fd) = (vec![0.0; nx], vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]);
    let mut fs = vec![0.0; nx];
    let mut fin_new = vec![0.0; nx];
    let mut flux = vec![0.0; cells];

    let energy = |h: &[f64], tfin: &[f64]| -> f64 {
        h.iter().sum::<f64>() * vol + tfin.iter().map(|&t| fin_cap * (t - props.t_melt)).sum::<f64>()
    };
    let snap = |t: f64, temp: &[f64], frac: &[f64], tfin: &[f64], h: &[f64], released: f64| {
        snapshot(&lay, &melt, t, temp, frac, tfin, energy(h, tfin), released)
    };

    let targets: Vec<f64> = if cfg.output_times.is_empty() {
        (1..=cfg.snapshots).map(|k| t_end * k as f64 / cfg.snapshots as f64).collect()
    } else {
        if !(cfg.output_times.windows(2).all(|w| w[0] < w[1])
            && cfg.output_times[0] > 0.0
            && *cfg.output_times.last().unwrap() <= t_end)
        {
            return Err(OracleError::Config("output times must increase within (0, t_end]".into()));
        }
        cfg.output_times.clone()
    };

    let mut snapshots = vec![snap(0.0, &temp, &frac, &tfin, &h, 0.0)];
    let mut t = 0.0;
    let mut steps = 0usize;
    for target in targets {
        while t < target {
            let step = if target - t <= dt * (1.0 + 1e-9) { target - t } else { dt };

            if fin {
                // Solved for the increment so that a state without net flux is kept exactly.
                let cap = fin_cap / step;
                for i in 0..nx {
                    let mut q = g_couple * (temp[i] - tfin[i]);
                    fa[i] = 0.0;
                    fc[i] = 0.0;
                    if i > 0 {
                        fa[i] = -g_fin_x;
                        q += g_fin_x * (tfin[i - 1] - tfin[i]);
                    }
                    if i + 1 < nx {
                        fc[i] = -g_fin_x;
                        q += g_fin_x * (tfin[i + 1] - tfin[i]);
                    }
                    fb[i] = cap - fa[i] - fc[i] + g_couple;
                    fd[i] = q;
                }
                fb[0] += g_fin_wall;
                fd[0] += g_fin_wall * (tinf - tfin[0]);
                solve_tridiagonal(&fa, &fb, &fc, &fd, &mut fin_new, &mut fs);
                for (n, o) in fin_new.iter_mut().zip(&tfin) {
                    *n += o;
                }
                released += step * g_fin_wall * (fin_new[0] - tinf);
                std::mem::swap(&mut tfin, &mut fin_new);
            }

            // Net heat flow into each melt cell.
            for j in 0..rows {
                let row = &temp[j * nx..(j + 1) * nx];
                let out = &mut flux[j * nx..(j + 1) * nx];
                out[0] = g_wall * (tinf - row[0]);
                for i in 1..nx {
                    let q = gx * (row[i - 1] - row[i]);
                    out[i - 1] -= q;
                    out[i] = q;
                }
            }
            released += step * (0..rows).map(|j| g_wall * (temp[j * nx] - tinf)).sum::<f64>();
            for j in 1..rows {
                let (lo, hi) = temp.split_at(j * nx);
                let below = &lo[(j - 1) * nx..];
                let here = &hi[..nx];
                let (fl, fh) = flux.split_at_mut(j * nx);
                let fbelow = &mut fl[(j - 1) * nx..];
                for i in 0..nx {
                    let q = gy * (below[i] - here[i]);
                    fbelow[i] -= q;
                    fh[i] += q;
                }
            }
            if fin {
                for i in 0..nx {
                    flux[i] += g_couple * (tfin[i] - temp[i]);
                }
            }

            let scale = step / vol;
            for ((hc, tc), (fc_, q)) in h.iter_mut().zip(temp.iter_mut()).zip(frac.iter_mut().zip(&flux)) {
                *hc += scale * q;
                let (tv, fv) = melt.state(*hc);
                *tc = tv;
                *fc_ = fv;
            }
            steps += 1;
            t += step;
            if steps % 1024 == 0 && !temp.iter().all(|v| v.is_finite()) {
                return Err(OracleError::StepSize { t, dt, suggested: 0.5 * dt });
            }
        }
        t = target;
        if !temp.iter().chain(&tfin).all(|v| v.is_finite()) {
            return Err(OracleError::StepSize { t, dt, suggested: 0.5 * dt });
        }
        snapshots.push(snap(t, &temp, &frac, &tfin, &h, released));
    }

    let x = (0..nx).map(|i| (i as f64 + 0.5) * dx).collect();
    let mut y: Vec<f64> = Vec::with_capacity(cfg.ny);
    if fin {
        y.push(0.5 * delta);
    }
    y.extend((0..rows).map(|j| y0 + (j as f64 + 0.5) * dy));
    Ok(EnthalpySeries { x, y, nx, ny: cfg.ny, dt, steps, snapshots })
}

#[allow(clippy::too_many_arguments)]
fn snapshot(
    lay: &Layout,
    melt: &Melt,
    t: f64,
    temp: &[f64],
    frac: &[f64],
    tfin: &[f64],
    energy: f64,
    released: f64,
) -> EnthalpySnapshot {
    let nx = lay.nx;
    let level = melt.t_melt - 0.5 * melt.mush;
    let yc = |j: usize| lay.y0 + (j as f64 + 0.5) * lay.dy;
    let xc = |i: usize| (i as f64 + 0.5) * lay.dx;

    let interface = (0..nx)
        .map(|i| match (0..lay.rows).find(|&j| temp[j * nx + i] >= level) {
            None => lay.height,
            Some(0) => lay.y0,
            Some(j) => {
                let (a, b) = (temp[(j - 1) * nx + i], temp[j * nx + i]);
                yc(j - 1) + (level - a) / (b - a) * lay.dy
            }
        })
        .collect();
    let front = (0..lay.rows)
        .map(|j| {
            let row = &temp[j * nx..(j + 1) * nx];
            match row.iter().position(|&v| v >= level) {
                None => lay.width,
                Some(0) => 0.0,
                Some(i) => xc(i - 1) + (level - row[i - 1]) / (row[i] - row[i - 1]) * lay.dx,
            }
        })
        .collect();
    let solid_fraction = frac.iter().map(|f| 1.0 - f).sum::<f64>() / frac.len() as f64;

    let mut temperature = Vec::with_capacity(tfin.len() + temp.len());
    let mut liquid_fraction = Vec::with_capacity(temperature.capacity());
    let mut phase = Vec::with_capacity(temperature.capacity());
    temperature.extend_from_slice(tfin);
    liquid_fraction.extend(tfin.iter().map(|_| 0.0));
    phase.extend(tfin.iter().map(|_| CellPhase::Fin));
    temperature.extend_from_slice(temp);
    liquid_fraction.extend_from_slice(frac);
    phase.extend(frac.iter().map(|&f| {
        if f <= 0.0 {
            CellPhase::Solid
        } else if f >= 1.0 {
            CellPhase::Liquid
        } else {
            CellPhase::Mushy
        }
    }));
    EnthalpySnapshot { t, temperature, liquid_fraction, phase, interface, front, solid_fraction, energy, released }
}
