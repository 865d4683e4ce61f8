use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Profile, RunConfig};
use super::tables::{Cell, ExportKind, ExportTable};
use super::IoError;
use crate::networks::{init_triplet, load_checkpoint, save_checkpoint, Checkpoint, NetworkRole, NetworkTriplet, TripletSpecs};
use crate::oracles::{
    generate_pretrain_targets, oracle1d_rows, pretrain_target_at, solve_1d, solve_2d_enthalpy, write_oracle1d_csv,
    write_oracle2d_csv, EnthalpyConfig, EnthalpySeries, OneDSeries,
};
use crate::physics::{fin_temp_extrema, solid_fraction, solid_fraction_of, ScalingMap};
use crate::sampling::CloudFactory;
use crate::training::{pretrain, train_full, Group, PretrainTarget, TrainContext, TrainOutcome, TrainingHistory};

/// Panels of the trapezoid rule behind every solid-fraction value.
pub const FRACTION_PANELS: usize = 200;
/// Points along `x*` in interface and fin-temperature tables.
pub const PROFILE_POINTS: usize = 101;
/// Grid of the fin-extrema search.
pub const EXTREMA_GRID: usize = 41;
/// Instants of the interface and fin-temperature comparisons.
pub const COMPARISON_TIMES: [f64; 2] = [1.61, 3.23];
/// Solid fraction taken as the end of solidification.
pub const END_FRACTION: f64 = 0.99;

fn geometry_for(cfg: &RunConfig, p: f64) -> crate::physics::Geometry {
    cfg.geometry.with_aspect_ratio(p)
}

/// 1D two-region solution for aspect ratio `p` over `[0, t*_max]`.
pub fn oracle1d_series(cfg: &RunConfig, p: f64) -> Result<OneDSeries, IoError> {
    let scaling = cfg.scaling()?;
    scaling.p_star(p).map_err(|e| IoError::Config(e.to_string()))?;
    Ok(solve_1d(&cfg.materials, &geometry_for(cfg, p), scaling.time(cfg.t_star_max), &cfg.oracle.one_d)?)
}

pub fn run_oracle1d(cfg: &RunConfig, p: f64, out_dir: &Path) -> Result<PathBuf, IoError> {
    let series = oracle1d_series(cfg, p)?;
    let scaling = cfg.scaling()?;
    let rows = oracle1d_rows(&series, &scaling, p, cfg.oracle.table_points)?;
    let path = out_dir.join("oracle1d.csv");
    write_oracle1d_csv(std::fs::File::create(&path)?, &rows)?;
    Ok(path)
}

pub fn oracle2d_series(cfg: &RunConfig, p: f64, two_d: &EnthalpyConfig) -> Result<EnthalpySeries, IoError> {
    let scaling = cfg.scaling()?;
    scaling.p_star(p).map_err(|e| IoError::Config(e.to_string()))?;
    Ok(solve_2d_enthalpy(&cfg.materials, &geometry_for(cfg, p), scaling.time(cfg.t_star_max), two_d)?)
}

pub fn run_oracle2d(cfg: &RunConfig, p: f64, slab: bool, out_dir: &Path) -> Result<PathBuf, IoError> {
    let two_d = EnthalpyConfig { slab, ..cfg.oracle.two_d.clone() };
    let series = oracle2d_series(cfg, p, &two_d)?;
    let scaling = cfg.scaling()?;
    let path = out_dir.join("oracle2d.csv");
    let snaps: Vec<_> = series.snapshots.iter().collect();
    write_oracle2d_csv(std::io::BufWriter::new(std::fs::File::create(&path)?), &series.x, &series.y, &snaps, &scaling)?;
    Ok(path)
}

/// Pre-training targets from the 1D solutions at every configured aspect ratio.
pub fn oracle_targets(cfg: &RunConfig) -> Result<Vec<PretrainTarget>, IoError> {
    let scaling = cfg.scaling()?;
    let mut out = Vec::new();
    for (k, &p) in cfg.oracle.pretrain_p.iter().enumerate() {
        let series = oracle1d_series(cfg, p)?;
        let seed = cfg.seed.wrapping_add(1 + k as u64);
        out.extend(generate_pretrain_targets(&series, &scaling, cfg.training.pretrain_points, p, seed)?);
    }
    Ok(out)
}

pub fn fresh_triplet(cfg: &RunConfig) -> Result<NetworkTriplet, IoError> {
    Ok(init_triplet(TripletSpecs::uniform(&cfg.network.hidden), cfg.seed)?.with_hard_ic_interface(cfg.flags.hard_ic_interface))
}

pub fn load_triplet(path: &Path) -> Result<NetworkTriplet, IoError> {
    if !path.exists() {
        return Err(IoError::MissingCheckpoint(path.to_path_buf()));
    }
    Ok(load_checkpoint(path)?.triplet()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub cycle: usize,
    pub phase: String,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: String,
    pub start_loss: f64,
    pub final_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub profile: Profile,
    pub seed: u64,
    pub parameters: usize,
    pub pretrain_targets: usize,
    pub pretrain_loss_first: Option<f64>,
    pub pretrain_loss_last: Option<f64>,
    pub adam_epochs: usize,
    pub refreshes: usize,
    pub cycles: Vec<CycleSummary>,
    pub final_groups: BTreeMap<String, f64>,
    pub final_families: BTreeMap<String, f64>,
    pub final_weights: BTreeMap<String, f64>,
    pub last_cloud: BTreeMap<String, usize>,
    pub config: RunConfig,
}

fn report(cfg: &RunConfig, n_targets: usize, triplet: &NetworkTriplet, history: &TrainingHistory, outcome: Option<&TrainOutcome>) -> TrainReport {
    TrainReport {
        profile: cfg.profile,
        seed: cfg.seed,
        parameters: triplet.params().len(),
        pretrain_targets: n_targets,
        pretrain_loss_first: history.pretrain.first().copied(),
        pretrain_loss_last: history.pretrain.last().copied(),
        adam_epochs: history.epochs.iter().filter(|e| e.phase.name() == "adam").count(),
        refreshes: history.refreshes.len(),
        cycles: history
            .cycles
            .iter()
            .map(|c| CycleSummary {
                cycle: c.cycle,
                phase: c.phase.name().to_string(),
                iterations: c.iterations,
                evaluations: c.evaluations,
                stop: format!("{:?}", c.stop),
                start_loss: c.start_loss,
                final_loss: c.final_loss,
            })
            .collect(),
        final_groups: outcome.map(|o| o.final_breakdown.group_map()).unwrap_or_default(),
        final_families: outcome.map(|o| o.final_breakdown.family_map()).unwrap_or_default(),
        final_weights: outcome.map(|o| o.weights.weights.clone()).unwrap_or_default(),
        last_cloud: history.refreshes.last().map(|r| r.counts.clone()).unwrap_or_default(),
        config: cfg.clone(),
    }
}

fn loss_curve(history: &TrainingHistory) -> Result<ExportTable, IoError> {
    let mut t = ExportTable::new(ExportKind::LossCurve);
    for (i, &l) in history.pretrain.iter().enumerate() {
        t.push(vec!["pretrain".into(), (i as f64).into(), l.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into()])?;
    }
    for e in &history.epochs {
        let mut row: Vec<Cell> = vec![e.phase.name().into(), (e.step as f64).into(), e.weighted_total.into()];
        row.extend(Group::ALL.iter().map(|g| Cell::Num(e.groups.get(g.name()).copied().unwrap_or(f64::NAN))));
        t.push(row)?;
    }
    for c in &history.cycles {
        for (i, &l) in c.losses.iter().enumerate() {
            t.push(vec![format!("{}{}", c.phase.name(), c.cycle).into(), (i as f64).into(), l.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into()])?;
        }
    }
    Ok(t)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| IoError::Schema(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub struct TrainRun {
    pub outcome: TrainOutcome,
    pub report: TrainReport,
    pub files: Vec<PathBuf>,
}

/// Pre-train on `targets` (or on fresh 1D solutions when `None`), train, and write
/// `ckpt.json`, `report.json`, `loss_curve.csv` and `timing.json`.
pub fn run_train(
    cfg: &RunConfig,
    init: Option<NetworkTriplet>,
    targets: Option<Vec<PretrainTarget>>,
    out_dir: &Path,
) -> Result<TrainRun, IoError> {
    cfg.validate()?;
    let clock = Instant::now();
    let mut timing = BTreeMap::new();
    let triplet = match init {
        Some(t) => t,
        None => fresh_triplet(cfg)?,
    };
    let targets = match targets {
        Some(t) => t,
        None => oracle_targets(cfg)?,
    };
    timing.insert("oracle_seconds", clock.elapsed().as_secs_f64());

    let ctx = TrainContext {
        factory: CloudFactory::new(cfg.domain()?, cfg.sampling.clone(), cfg.seed)?,
        groups: cfg.scaling()?.groups(),
        domain: cfg.domain()?,
        flags: cfg.loss_flags(),
        config: cfg.training_config(),
    };
    let pre = if targets.is_empty() || cfg.training.n_pre == 0 { None } else { Some(targets.as_slice()) };
    let outcome = train_full(triplet, ctx, pre)?;
    timing.insert("total_seconds", clock.elapsed().as_secs_f64());

    std::fs::create_dir_all(out_dir)?;
    let ckpt = Checkpoint::new(
        &outcome.triplet,
        cfg.seed,
        outcome.weights.clone(),
        None,
        serde_json::to_value(cfg).map_err(|e| IoError::Schema(e.to_string()))?,
    );
    let ckpt_path = out_dir.join("ckpt.json");
    save_checkpoint(&ckpt_path, &ckpt)?;
    let rep = report(cfg, targets.len(), &outcome.triplet, &outcome.history, Some(&outcome));
    let report_path = out_dir.join("report.json");
    write_json(&report_path, &rep)?;
    let curve = loss_curve(&outcome.history)?.save(out_dir)?;
    let timing_path = out_dir.join("timing.json");
    write_json(&timing_path, &timing)?;
    Ok(TrainRun { outcome, report: rep, files: vec![ckpt_path, report_path, curve, timing_path] })
}

/// Supervised fit to `targets` only; writes `ckpt.json` and `report.json`.
pub fn run_pretrain(cfg: &RunConfig, init: Option<NetworkTriplet>, targets: &[PretrainTarget], out_dir: &Path) -> Result<Vec<f64>, IoError> {
    cfg.validate()?;
    let mut triplet = match init {
        Some(t) => t,
        None => fresh_triplet(cfg)?,
    };
    let losses = pretrain(&mut triplet, targets, cfg.training.n_pre, cfg.training.pretrain_lr)?;
    std::fs::create_dir_all(out_dir)?;
    let ckpt = Checkpoint::new(
        &triplet,
        cfg.seed,
        cfg.training_config().initial_weights(),
        None,
        serde_json::to_value(cfg).map_err(|e| IoError::Schema(e.to_string()))?,
    );
    save_checkpoint(&out_dir.join("ckpt.json"), &ckpt)?;
    let history = TrainingHistory { pretrain: losses.clone(), ..TrainingHistory::default() };
    write_json(&out_dir.join("report.json"), &report(cfg, targets.len(), &triplet, &history, None))?;
    Ok(losses)
}

fn x_grid(p: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 * p * i as f64 / (n - 1) as f64).collect()
}

/// Interface, fin temperature at mid-thickness, solid fraction and full-field queries of a
/// trained model.
pub struct ModelView<'a> {
    pub triplet: &'a NetworkTriplet,
    pub scaling: ScalingMap,
}

impl<'a> ModelView<'a> {
    pub fn new(triplet: &'a NetworkTriplet, cfg: &RunConfig) -> Result<Self, IoError> {
        Ok(ModelView { triplet, scaling: cfg.scaling()? })
    }

    fn p_star(&self, p: f64) -> Result<f64, IoError> {
        self.scaling.p_star(p).map_err(|e| IoError::Config(e.to_string()))
    }

    fn delta_star(&self) -> f64 {
        self.scaling.groups().delta_star
    }

    pub fn interface(&self, xs: &[f64], t: f64, p: f64) -> Result<Vec<f64>, IoError> {
        let ps = self.p_star(p)?;
        let pts: Vec<[f64; 3]> = xs.iter().map(|&x| [x, t, ps]).collect();
        Ok(self.triplet.eval_interface(&pts)?)
    }

    pub fn fin_mid(&self, xs: &[f64], t: f64, p: f64) -> Result<Vec<f64>, IoError> {
        let ps = self.p_star(p)?;
        let y = 0.5 * self.delta_star();
        let pts: Vec<[f64; 4]> = xs.iter().map(|&x| [x, y, t, ps]).collect();
        Ok(self.triplet.eval_field(NetworkRole::Fin, &pts)?.into_iter().map(|r| r[0]).collect())
    }

    pub fn solid_fraction(&self, t: f64, p: f64) -> Result<f64, IoError> {
        Ok(solid_fraction(self.triplet, &self.scaling, t, p, FRACTION_PANELS)?)
    }

    pub fn fin_extrema(&self, t: f64, p: f64) -> Result<(f64, f64), IoError> {
        Ok(fin_temp_extrema(self.triplet, &self.scaling, t, p, EXTREMA_GRID)?)
    }

    /// Temperature and phase on an `nx × ny` grid over `[0, P/2] × [0, 1]`. The temperature
    /// is the fin network inside the fin, the solid network below the interface and the melt
    /// temperature above it; the phase is 0 (fin), 1 (solid) or 2 (liquid).
    pub fn contour(&self, table: &mut ExportTable, t: f64, p: f64, nx: usize, ny: usize) -> Result<(), IoError> {
        let ps = self.p_star(p)?;
        let d = self.delta_star();
        let xs = x_grid(p, nx);
        let s = self.interface(&xs, t, p)?;
        let mut pts = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = j as f64 / (ny - 1) as f64;
            for &x in &xs {
                pts.push([x, y, t, ps]);
            }
        }
        let fin = self.triplet.eval_field(NetworkRole::Fin, &pts)?;
        let solid = self.triplet.eval_field(NetworkRole::Solid, &pts)?;
        let mut temp = Vec::with_capacity(pts.len());
        let mut phase = Vec::with_capacity(pts.len());
        for (k, q) in pts.iter().enumerate() {
            let (v, ph) = if q[1] <= d {
                (fin[k][0], 0.0)
            } else if q[1] <= s[k % nx] {
                (solid[k][0], 1.0)
            } else {
                (1.0, 2.0)
            };
            temp.push(v);
            phase.push(ph);
        }
        for (field, vals) in [("T_star", &temp), ("phase", &phase)] {
            for (q, &v) in pts.iter().zip(vals) {
                table.push(vec![q[0].into(), q[1].into(), t.into(), p.into(), field.into(), v.into()])?;
            }
        }
        Ok(())
    }
}

/// Parse `NXxNY`.
pub fn parse_grid(spec: &str) -> Result<(usize, usize), IoError> {
    let bad = || IoError::Config(format!("malformed grid `{spec}`, expected NXxNY with both at least 2"));
    let (a, b) = spec.split_once(['x', 'X']).ok_or_else(bad)?;
    let nx: usize = a.trim().parse().map_err(|_| bad())?;
    let ny: usize = b.trim().parse().map_err(|_| bad())?;
    if nx < 2 || ny < 2 {
        return Err(bad());
    }
    Ok((nx, ny))
}

/// `contour.csv`, `interface.csv` and `solid_fraction.csv` at the requested instants.
pub fn infer_tables(view: &ModelView, p: f64, t_stars: &[f64], grid: (usize, usize)) -> Result<[ExportTable; 3], IoError> {
    let mut contour = ExportTable::new(ExportKind::Contour);
    let mut interface = ExportTable::new(ExportKind::Interface);
    let mut fraction = ExportTable::new(ExportKind::SolidFraction);
    let xs = x_grid(p, PROFILE_POINTS);
    for &t in t_stars {
        if !(t >= 0.0) {
            return Err(IoError::Config(format!("t* must be non-negative, got {t}")));
        }
        view.contour(&mut contour, t, p, grid.0, grid.1)?;
        for (&x, s) in xs.iter().zip(view.interface(&xs, t, p)?) {
            interface.push(vec![t.into(), x.into(), s.into(), p.into()])?;
        }
        fraction.push(vec![t.into(), view.solid_fraction(t, p)?.into(), p.into()])?;
    }
    Ok([contour, interface, fraction])
}

/// Instants of the solid-fraction curves: `n` equal steps over `[0, t*_max]`.
pub fn fraction_times(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

/// First instant with solid fraction at least [`END_FRACTION`], else the last instant.
pub fn end_of_solidification(times: &[f64], fractions: &[f64]) -> f64 {
    times.iter().zip(fractions).find(|(_, &f)| f >= END_FRACTION).map_or(*times.last().unwrap_or(&0.0), |(&t, _)| t)
}

/// Tables for the parametric study: interface and fin temperature across `P` at the
/// comparison instants, solid-fraction curves, contours and fin extrema at the end of
/// solidification.
pub fn export_tables(view: &ModelView, cfg: &RunConfig, p_values: &[f64], grid: (usize, usize)) -> Result<Vec<ExportTable>, IoError> {
    let mut interface = ExportTable::new(ExportKind::Interface);
    let mut fin = ExportTable::new(ExportKind::FinTemp);
    let mut fraction = ExportTable::new(ExportKind::SolidFraction);
    let mut contour = ExportTable::new(ExportKind::Contour);
    let mut extrema = ExportTable::new(ExportKind::FinExtrema);
    let times = fraction_times(cfg.t_star_max, 40);
    for &p in p_values {
        let xs = x_grid(p, PROFILE_POINTS);
        for &t in &COMPARISON_TIMES {
            for ((&x, s), tf) in xs.iter().zip(view.interface(&xs, t, p)?).zip(view.fin_mid(&xs, t, p)?) {
                interface.push(vec![t.into(), x.into(), s.into(), p.into()])?;
                fin.push(vec![t.into(), x.into(), tf.into(), p.into()])?;
            }
            view.contour(&mut contour, t, p, grid.0, grid.1)?;
        }
        let mut fr = Vec::with_capacity(times.len());
        for &t in &times {
            let f = view.solid_fraction(t, p)?;
            fraction.push(vec![t.into(), f.into(), p.into()])?;
            fr.push(f);
        }
        let t_end = end_of_solidification(&times, &fr);
        let (lo, hi) = view.fin_extrema(t_end, p)?;
        extrema.push(vec![p.into(), lo.into(), hi.into()])?;
    }
    Ok(vec![interface, fin, fraction, contour, extrema])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub mean_abs: f64,
    pub max_abs: f64,
    pub max_rel: f64,
}

impl Deviation {
    fn of(pairs: &[(f64, f64)]) -> Self {
        let n = pairs.len().max(1) as f64;
        Deviation {
            mean_abs: pairs.iter().map(|(m, o)| (m - o).abs()).sum::<f64>() / n,
            max_abs: pairs.iter().map(|(m, o)| (m - o).abs()).fold(0.0, f64::max),
            max_rel: pairs.iter().map(|(m, o)| (m - o).abs() / o.abs().max(1e-12)).fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub interface_mean: f64,
    pub interface_max: f64,
    pub fin_max_rel: f64,
}

impl Thresholds {
    pub fn for_profile(profile: Profile) -> Self {
        let m = match profile {
            Profile::Full => 1.0,
            Profile::Fast => 2.0,
        };
        Thresholds { interface_mean: 0.05 * m, interface_max: 0.10 * m, fin_max_rel: 0.02 * m }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstantSummary {
    pub t_star: f64,
    pub interface: Deviation,
    pub fin_temp: Deviation,
    /// Fin deviation measured on the dimensional temperature in °C.
    pub fin_temp_celsius_max_rel: f64,
    pub fraction_model: f64,
    pub fraction_oracle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub p: f64,
    pub profile: Profile,
    pub thresholds: Thresholds,
    pub instants: Vec<InstantSummary>,
    pub fraction_max_abs: f64,
    /// Maximum fin-temperature error quoted for the reference model.
    pub reference_fin_max_rel: f64,
    pub violations: Vec<String>,
    pub passed: bool,
}

/// Compare a model with the 1D solution at aspect ratio `p` and the given instants.
pub fn validate_model(view: &ModelView, series: &OneDSeries, cfg: &RunConfig, p: f64, t_stars: &[f64]) -> Result<(ValidationSummary, [ExportTable; 3]), IoError> {
    let scaling = &view.scaling;
    let thresholds = Thresholds::for_profile(cfg.profile);
    let mut ti = ExportTable::new(ExportKind::ValidateInterface);
    let mut tf = ExportTable::new(ExportKind::ValidateFin);
    let mut tfr = ExportTable::new(ExportKind::ValidateFraction);
    let xs = x_grid(p, PROFILE_POINTS);
    let mut instants = Vec::new();
    let mut violations = Vec::new();
    let d = scaling.groups().delta_star;
    for &t in t_stars {
        let s_model = view.interface(&xs, t, p)?;
        let f_model = view.fin_mid(&xs, t, p)?;
        let mut sp = Vec::new();
        let mut fp = Vec::new();
        let mut fc = Vec::new();
        for (k, &x) in xs.iter().enumerate() {
            let (so, fo) = pretrain_target_at(series, scaling, x, t);
            ti.push(vec![t.into(), x.into(), p.into(), s_model[k].into(), so.into()])?;
            tf.push(vec![t.into(), x.into(), p.into(), f_model[k].into(), fo.into()])?;
            sp.push((s_model[k], so));
            fp.push((f_model[k], fo));
            fc.push((scaling.temperature(f_model[k]), scaling.temperature(fo)));
        }
        let fraction_model = view.solid_fraction(t, p)?;
        let fraction_oracle = solid_fraction_of(
            |q| q.iter().map(|&x| pretrain_target_at(series, scaling, x, t).0).collect(),
            p,
            d,
            FRACTION_PANELS,
        );
        tfr.push(vec![t.into(), p.into(), fraction_model.into(), fraction_oracle.into()])?;
        let s = InstantSummary {
            t_star: t,
            interface: Deviation::of(&sp),
            fin_temp: Deviation::of(&fp),
            fin_temp_celsius_max_rel: Deviation::of(&fc).max_rel,
            fraction_model,
            fraction_oracle,
        };
        if s.interface.mean_abs > thresholds.interface_mean {
            violations.push(format!("t* = {t}: interface mean deviation {} > {}", s.interface.mean_abs, thresholds.interface_mean));
        }
        if s.interface.max_abs > thresholds.interface_max {
            violations.push(format!("t* = {t}: interface max deviation {} > {}", s.interface.max_abs, thresholds.interface_max));
        }
        if s.fin_temp.max_rel > thresholds.fin_max_rel {
            violations.push(format!("t* = {t}: fin temperature max relative deviation {} > {}", s.fin_temp.max_rel, thresholds.fin_max_rel));
        }
        instants.push(s);
    }
    let fraction_max_abs = instants.iter().map(|s| (s.fraction_model - s.fraction_oracle).abs()).fold(0.0, f64::max);
    let passed = violations.is_empty();
    let summary = ValidationSummary {
        p,
        profile: cfg.profile,
        thresholds,
        instants,
        fraction_max_abs,
        reference_fin_max_rel: 0.004,
        violations,
        passed,
    };
    Ok((summary, [ti, tf, tfr]))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_json(path, value)
}
