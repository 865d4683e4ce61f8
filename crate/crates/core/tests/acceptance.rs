//! One line per acceptance criterion: `criterion N: PASS|FAIL ...`.
//!
//! Training-based criteria run the fast profile with its relaxed bounds; the full-profile
//! variants are `#[ignore]`d because they take hours on one core.

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stefan_pddl::io::{
    export_tables, fraction_times, oracle1d_series, run_train, validate_model, ExportKind, ModelView, Profile, RunConfig,
    TrainRun, COMPARISON_TIMES,
};
use stefan_pddl::networks::{init_triplet, NetworkTriplet, TripletSpecs};
use stefan_pddl::oracles::{
    neumann_analytic, neumann_lambda, neumann_residual, solve_1d, solve_2d_enthalpy, EnthalpyConfig, OneDConfig,
    WallCondition,
};
use stefan_pddl::physics::{BoundaryKind, Geometry, MaterialProps, ScalingMap};
use stefan_pddl::sampling::{
    adaptive_sample, classify, interface_geometry, lhs_generate, phase_of, CollocationPoint, Domain, Label, Origin, Phase,
    PointCloud, SamplingConfig,
};
use stefan_pddl::training::lbfgs::{minimize, LbfgsConfig, LbfgsState, StopReason};
use stefan_pddl::training::{AdamState, LossFlags, LossProblem, WeightMode, WeightState};

/// Written to the stdout handle directly so the line survives the test harness's capture.
fn verdict(n: u32, ok: bool, detail: &str) {
    let line = format!("criterion {n}: {} {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn scaling() -> ScalingMap {
    ScalingMap::new(MaterialProps::default(), Geometry::default()).unwrap()
}

fn domain() -> Domain {
    Domain { p_min: 1.0, p_max: 5.0, delta_star: scaling().groups().delta_star, t_max: 4.0 }
}

fn pt(x: f64, y: f64, t: f64, p: f64, label: Label) -> CollocationPoint {
    CollocationPoint::new(x, y, t, p, label, Origin::Background)
}

/// Twenty points covering every residual family.
fn miniature_cloud() -> PointCloud {
    let d = domain();
    let ds = d.delta_star;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut u = move || rng.gen::<f64>();
    let mut c = PointCloud::default();
    let mut p = u();
    c.solid.push(pt(u() * d.x_max(p), ds + 0.3 * u(), 0.1 + 3.0 * u(), p, Label::Solid));
    p = u();
    c.solid.push(pt(u() * d.x_max(p), ds + 0.3 * u(), 0.1 + 3.0 * u(), p, Label::Solid));
    p = u();
    c.fin.push(pt(u() * d.x_max(p), ds * u(), 0.1 + 3.0 * u(), p, Label::Fin));
    p = u();
    c.fin.push(pt(u() * d.x_max(p), ds * u(), 0.1 + 3.0 * u(), p, Label::Fin));
    p = u();
    c.liquid.push(pt(u() * d.x_max(p), 0.7 + 0.2 * u(), 0.1 + 3.0 * u(), p, Label::Liquid));
    p = u();
    c.ic_solid.push(pt(u() * d.x_max(p), ds + 0.5 * u(), 0.0, p, Label::IcSolid));
    p = u();
    c.ic_fin.push(pt(u() * d.x_max(p), ds * u(), 0.0, p, Label::IcFin));
    p = u();
    c.ic_interface.push(pt(u() * d.x_max(p), 0.0, 0.0, p, Label::IcInterface));
    for _ in 0..5 {
        p = u();
        c.interface.push(pt(u() * d.x_max(p), 0.0, 0.1 + 3.0 * u(), p, Label::Interface));
    }
    for kind in BoundaryKind::ALL {
        p = u();
        let xm = d.x_max(p);
        let (x, y) = match kind {
            BoundaryKind::ConvSolid => (0.0, ds + 0.3 * u()),
            BoundaryKind::ConvFin => (0.0, ds * u()),
            BoundaryKind::Continuity => (u() * xm, ds),
            BoundaryKind::SymSolid => (xm, ds + 0.3 * u()),
            BoundaryKind::AdiabaticSolid => (u() * xm, 1.0),
            BoundaryKind::SymFinX => (xm, ds * u()),
            BoundaryKind::SymFinY => (u() * xm, 0.0),
        };
        c.boundary.push((kind, vec![pt(x, y, 0.1 + 3.0 * u(), p, Label::Bc(kind))]));
    }
    assert_eq!(c.len(), 20);
    c
}

#[test]
fn criterion_1_gradient_matches_finite_differences() {
    let clock = Instant::now();
    let t = init_triplet(TripletSpecs::default(), 17).unwrap();
    let flags = LossFlags { liquid_constraint: true, flux_continuity: true };
    let mut problem = LossProblem::new(&t, &miniature_cloud(), &scaling().groups(), &domain(), flags).unwrap();
    let mut weights = WeightState::new(0.8, WeightMode::Family);
    for (k, w) in weights.keys().into_iter().enumerate() {
        weights.weights.insert(w.to_string(), 0.3 + 0.05 * k as f64);
    }
    problem.set_weights(&weights);
    let x = t.params().to_vec();
    let mut g = vec![0.0; x.len()];
    problem.evaluate_with_grad(&x, &mut g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let i = rng.gen_range(0..x.len());
        let mut xp = x.clone();
        xp[i] = x[i] + h;
        let fp = problem.evaluate(&xp).unwrap().1;
        xp[i] = x[i] - h;
        let fm = problem.evaluate(&xp).unwrap().1;
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-6));
    }
    let secs = clock.elapsed().as_secs_f64();
    let ok = worst < 1e-5 && secs < 30.0;
    verdict(1, ok, &format!("worst relative error {worst:.2e} over 100 probes (< 1e-5), {secs:.1} s (< 30 s)"));
    assert!(ok);
}

#[test]
fn criterion_2_neumann() {
    let clock = Instant::now();
    let props = MaterialProps::default();
    let st = scaling().groups().ja;
    let lambda = neumann_lambda(st).unwrap();
    let cfg = OneDConfig { grid_n: 2000, dt: 0.1, snapshots: 100, wall: WallCondition::FixedTemperature, ..OneDConfig::default() };
    let s = solve_1d(&props, &Geometry::default(), 1000.0, &cfg).unwrap();
    let mut worst = 0.0f64;
    for snap in s.snapshots.iter().filter(|p| p.t >= 100.0 - 1e-9) {
        let exact = neumann_analytic(st, props.diffusivity_solid(), snap.t).unwrap();
        worst = worst.max((snap.x_front - exact).abs() / exact);
    }
    let secs = clock.elapsed().as_secs_f64();
    let ok = worst < 0.01 && (lambda - 0.283).abs() < 1e-3 && neumann_residual(st, lambda).abs() < 1e-12 && secs < 10.0;
    verdict(2, ok, &format!("St = {st:.5}, λ = {lambda:.6}, worst relative front error {worst:.2e} on [100, 1000] s (< 1e-2), {secs:.1} s (< 10 s)"));
    assert!(ok);
}

#[test]
fn criterion_3_slab_enthalpy_vs_1d() {
    let clock = Instant::now();
    let props = MaterialProps::default();
    let geom = Geometry::default().with_aspect_ratio(5.0);
    let cfg = EnthalpyConfig { nx: 256, ny: 128, slab: true, output_times: vec![499.0, 1001.0], ..EnthalpyConfig::default() };
    let two = solve_2d_enthalpy(&props, &geom, 1001.0, &cfg).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let one = solve_1d(&props, &geom, 1001.0, &OneDConfig { snapshots: 1001, ..OneDConfig::default() }).unwrap();
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for snap in &two.snapshots[1..] {
        let mean = snap.front.iter().sum::<f64>() / snap.front.len() as f64;
        let x1 = one.front_at(snap.t);
        let dev = (mean - x1).abs() / geom.l_c;
        worst = worst.max(dev);
        detail += &format!("t = {} s: {:.4} mm vs {:.4} mm; ", snap.t, mean * 1e3, x1 * 1e3);
    }
    let ok = worst < 0.02 && secs < 60.0;
    verdict(3, ok, &format!("{detail}worst deviation {:.2}% of l_c (< 2%), enthalpy run {secs:.1} s (< 60 s)", 100.0 * worst));
    assert!(ok);
}

struct FastRun {
    _dir: tempfile::TempDir,
    run: TrainRun,
    cfg: RunConfig,
    secs: f64,
}

fn fast_config() -> RunConfig {
    RunConfig::for_profile(Profile::Fast)
}

fn fast_run() -> &'static FastRun {
    static RUN: OnceLock<FastRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fast_config();
        let clock = Instant::now();
        let run = run_train(&cfg, None, None, dir.path()).unwrap();
        FastRun { _dir: dir, run, cfg, secs: clock.elapsed().as_secs_f64() }
    })
}

fn interface_and_fin(triplet: &NetworkTriplet, cfg: &RunConfig, scale: f64) -> (bool, String, bool, String) {
    let view = ModelView::new(triplet, cfg).unwrap();
    let series = oracle1d_series(cfg, 2.0).unwrap();
    let (summary, _) = validate_model(&view, &series, cfg, 2.0, &COMPARISON_TIMES).unwrap();
    let mut ok4 = true;
    let mut ok5 = true;
    let mut d4 = String::new();
    let mut d5 = String::new();
    for s in &summary.instants {
        ok4 &= s.interface.mean_abs <= 0.05 * scale && s.interface.max_abs <= 0.10 * scale;
        ok5 &= s.fin_temp.max_rel <= 0.02 * scale;
        d4 += &format!("t* = {}: mean {:.4} (≤ {}), max {:.4} (≤ {}); ", s.t_star, s.interface.mean_abs, 0.05 * scale, s.interface.max_abs, 0.10 * scale);
        d5 += &format!(
            "t* = {}: max rel {:.4} (≤ {}), in °C {:.4}; ",
            s.t_star,
            s.fin_temp.max_rel,
            0.02 * scale,
            s.fin_temp_celsius_max_rel
        );
    }
    d5 += &format!("reference model quotes {}", summary.reference_fin_max_rel);
    (ok4, d4, ok5, d5)
}

#[test]
fn criterion_4_and_5_fast_profile() {
    let f = fast_run();
    let (ok4, d4, ok5, d5) = interface_and_fin(&f.run.outcome.triplet, &f.cfg, 2.0);
    let in_time = f.secs < 1800.0;
    verdict(4, ok4 && in_time, &format!("fast profile, seed {}, bounds ×2: {d4}training {:.0} s (≤ 1800 s)", f.cfg.seed, f.secs));
    verdict(5, ok5, &format!("fast profile, bound ×2: {d5}"));
    assert!(ok4 && ok5 && in_time);
}

#[test]
#[ignore = "full profile takes hours on one core"]
fn criterion_4_and_5_full_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::for_profile(Profile::Full);
    let run = run_train(&cfg, None, None, dir.path()).unwrap();
    let (ok4, d4, ok5, d5) = interface_and_fin(&run.outcome.triplet, &cfg, 1.0);
    verdict(4, ok4, &format!("full profile: {d4}"));
    verdict(5, ok5, &format!("full profile: {d5}"));
    assert!(ok4 && ok5);
}

#[test]
#[ignore = "trains the fast profile once per seed"]
fn criterion_4_and_5_fast_profile_seed_sweep() {
    let mut passed = 0;
    let seeds = [0u64, 1, 2, 3, 4, 5, 6, 7];
    for &seed in &seeds {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { seed, ..fast_config() };
        let run = run_train(&cfg, None, None, dir.path()).unwrap();
        let (ok4, d4, ok5, d5) = interface_and_fin(&run.outcome.triplet, &cfg, 2.0);
        println!("seed {seed}: interface {} {d4}fin {} {d5}", ok4, ok5);
        passed += usize::from(ok4 && ok5);
    }
    println!("criteria 4 and 5 hold for {passed} of {} seeds", seeds.len());
}

#[test]
#[ignore = "full profile takes hours on one core"]
fn criterion_4_and_5_full_profile_flux_continuity() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::for_profile(Profile::Full);
    cfg.flags.flux_continuity = true;
    let run = run_train(&cfg, None, None, dir.path()).unwrap();
    let (ok4, d4, ok5, d5) = interface_and_fin(&run.outcome.triplet, &cfg, 1.0);
    verdict(4, ok4, &format!("full profile with flux continuity: {d4}"));
    verdict(5, ok5, &format!("full profile with flux continuity: {d5}"));
    assert!(ok4 && ok5);
}

const P_VALUES: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];

#[test]
fn criterion_6_solid_fraction_trends() {
    let f = fast_run();
    let view = ModelView::new(&f.run.outcome.triplet, &f.cfg).unwrap();
    let times = fraction_times(f.cfg.t_star_max, 40);
    let mut worst_time_step = f64::INFINITY;
    for &p in &P_VALUES {
        let fr: Vec<f64> = times.iter().map(|&t| view.solid_fraction(t, p).unwrap()).collect();
        worst_time_step = worst_time_step.min(fr.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min));
    }
    let mut worst_p_step = f64::NEG_INFINITY;
    let mut detail = String::new();
    for &t in &COMPARISON_TIMES {
        let fr: Vec<f64> = P_VALUES.iter().map(|&p| view.solid_fraction(t, p).unwrap()).collect();
        worst_p_step = worst_p_step.max(fr.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max));
        detail += &format!("t* = {t}: F = {:?}; ", fr.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
    }
    let ok = worst_time_step >= -1e-3 && worst_p_step <= 1e-2;
    verdict(6, ok, &format!("{detail}smallest step in t* {worst_time_step:.2e} (≥ -1e-3), largest rise across P {worst_p_step:.2e} (≤ 1e-2)"));
    assert!(ok);
}

#[test]
fn criterion_7_fin_extrema_trend() {
    let f = fast_run();
    let view = ModelView::new(&f.run.outcome.triplet, &f.cfg).unwrap();
    let tables = export_tables(&view, &f.cfg, &[1.0, 2.0, 3.0, 4.0, 4.7, 5.0], (3, 3)).unwrap();
    let ext = tables.iter().find(|t| t.kind == ExportKind::FinExtrema).unwrap();
    let p = ext.column("P").unwrap();
    let lo = ext.column("Tf_star_min").unwrap();
    let hi = ext.column("Tf_star_max").unwrap();
    let on_grid: Vec<usize> = (0..p.len()).filter(|&i| P_VALUES.contains(&p[i])).collect();
    let monotone = on_grid.windows(2).all(|w| hi[w[1]] >= hi[w[0]]);
    let gap = |i: usize| hi[i] - lo[i];
    let i47 = p.iter().position(|&v| v == 4.7).unwrap();
    let wider = gap(i47) > gap(0);
    let ok = monotone && wider;
    verdict(
        7,
        ok,
        &format!(
            "max T_f* at end of solidification {:?} over P = {:?}; gap at P = 4.7 {:.4} vs P = 1 {:.4}",
            on_grid.iter().map(|&i| (hi[i] * 1e4).round() / 1e4).collect::<Vec<_>>(),
            P_VALUES,
            gap(i47),
            gap(0)
        ),
    );
    assert!(ok);
}

fn flat_interface(c: f64) -> NetworkTriplet {
    let mut t = init_triplet(TripletSpecs::uniform(&[4]), 1).unwrap();
    let range = t.layout().range(stefan_pddl::networks::NetworkRole::Interface);
    let last = range.end - 1;
    for v in &mut t.params_mut()[range] {
        *v = 0.0;
    }
    t.params_mut()[last] = c;
    t
}

#[test]
fn criterion_8_algorithm_units() {
    let clock = Instant::now();
    let mut notes = Vec::new();

    // LHS: exactly one point per stratum in every dimension.
    let n = 64;
    let pts = lhs_generate(n, &[(0.0, 1.0), (-2.0, 2.0), (0.0, 4.0)], 5).unwrap();
    let lhs_ok = (0..3).all(|d| {
        let (lo, w) = [(0.0, 1.0), (-2.0, 4.0), (0.0, 4.0)][d];
        let mut hit = vec![0; n];
        for p in &pts {
            hit[(((p[d] - lo) / w) * n as f64).floor() as usize] += 1;
        }
        hit.iter().all(|&h| h == 1)
    });
    notes.push(format!("LHS stratified {lhs_ok}"));

    // Classification offsets around the interface.
    let s = 0.4;
    let d = domain();
    let band = SamplingConfig::default().band;
    let offsets_ok = band == 0.001
        && phase_of(s - 0.001, s, d.delta_star, band) == Phase::Solid
        && phase_of(s + 0.001, s, d.delta_star, band) == Phase::Liquid
        && phase_of(s, s, d.delta_star, band) == Phase::Band
        && phase_of(s - 0.000999, s, d.delta_star, band) == Phase::Band
        && phase_of(d.delta_star, s, d.delta_star, band) == Phase::Fin;
    let tri = flat_interface(s);
    let probe = [pt(0.3, s - 0.001, 1.0, 0.2, Label::Pending), pt(0.3, s + 0.001, 1.0, 0.2, Label::Pending), pt(0.3, s, 1.0, 0.2, Label::Pending)];
    let (labeled, dropped) = classify(&probe, &tri, d.delta_star, band).unwrap();
    let classify_ok = dropped == 1 && labeled[0].label == Label::Solid && labeled[1].label == Label::Liquid;
    notes.push(format!("offsets ±0.001 exact {}", offsets_ok && classify_ok));

    // N_extra adaptive points.
    let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.02).collect();
    let geom = interface_geometry(&init_triplet(TripletSpecs::uniform(&[8]), 3).unwrap(), &xs, 1.0, 0.25).unwrap();
    let extra = adaptive_sample(&geom, 0.05, SamplingConfig::default().n_extra, 1e-3, &d, 9);
    let extra_ok = extra.len() == 500 && extra.iter().all(|p| p.origin == Origin::Adaptive);
    notes.push(format!("N_extra = {}", extra.len()));

    // Weight recurrence trace w = 1, 0.9, 0.92 for losses 1, 0.5, 0.5 with τ = 0.8.
    let mut w = WeightState::new(0.8, WeightMode::Group);
    let mut trace = Vec::new();
    for l in [1.0, 0.5, 0.5] {
        w.observe(&[("pde".to_string(), l)].into_iter().collect());
        trace.push(w.weight("pde"));
    }
    let trace_ok = (trace[0] - 1.0).abs() < 1e-12 && (trace[1] - 0.9).abs() < 1e-12 && (trace[2] - 0.92).abs() < 1e-12;
    notes.push(format!("weight trace {trace:?}"));

    // L-BFGS on a 50-dimensional quadratic.
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let diag: Vec<f64> = (0..50).map(|_| rng.gen_range(1.0..10.0)).collect();
    let centre: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // Near the optimum sᵀy falls far below the default absolute curvature floor, so only
    // strictly positive curvature is required here.
    let cfg = LbfgsConfig { memory: 50, max_iter: 52, tol_grad: 1e-10, tol_change: 0.0, curvature_eps: 0.0, ..LbfgsConfig::default() };
    let mut st = LbfgsState::new(&cfg);
    let mut x = vec![0.0; 50];
    let out = minimize(&mut x, &mut st, &cfg, |x, g| {
        let mut f = 0.0;
        for i in 0..50 {
            let r = x[i] - centre[i];
            g[i] = diag[i] * r;
            f += 0.5 * diag[i] * r * r;
        }
        f
    });
    let lbfgs_ok = out.stop == StopReason::GradientTolerance
        && out.grad_inf_norm < 1e-10
        && out.iterations <= 52
        && out.steps.iter().all(|s| !s.fallback && s.satisfies_wolfe(cfg.c1, cfg.c2));
    notes.push(format!("L-BFGS {} iterations, |g| = {:.1e}", out.iterations, out.grad_inf_norm));

    // Adam with zero gradient.
    let mut adam = AdamState::new(5, 1e-3);
    let mut params = vec![0.5, -1.0, 2.0, 0.0, 3.0];
    let before = params.clone();
    for _ in 0..10 {
        adam.update(&mut params, &[0.0; 5]);
    }
    let adam_ok = params == before;
    notes.push(format!("zero-gradient Adam no-op {adam_ok}"));

    let secs = clock.elapsed().as_secs_f64();
    let ok = lhs_ok && offsets_ok && classify_ok && extra_ok && trace_ok && lbfgs_ok && adam_ok && secs < 60.0;
    verdict(8, ok, &format!("{}; {secs:.1} s (< 60 s)", notes.join("; ")));
    assert!(ok);
}

fn outputs(cfg: &RunConfig, dir: &Path, run: &TrainRun) -> Vec<(String, Vec<u8>)> {
    let view = ModelView::new(&run.outcome.triplet, cfg).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = ["ckpt.json", "report.json", "loss_curve.csv"]
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
        .collect();
    for t in export_tables(&view, cfg, &P_VALUES, (21, 11)).unwrap() {
        files.push((t.kind.file_name().to_string(), t.to_bytes().unwrap()));
    }
    files
}

#[test]
fn criterion_9_determinism() {
    let a = fast_run();
    let dir = tempfile::tempdir().unwrap();
    let b = run_train(&a.cfg, None, None, dir.path()).unwrap();
    let fa = outputs(&a.cfg, a._dir.path(), &a.run);
    let fb = outputs(&a.cfg, dir.path(), &b);
    let differing: Vec<&str> = fa.iter().zip(&fb).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.as_str()).collect();
    let ok = differing.is_empty();
    verdict(9, ok, &format!("{} files compared, differing: {differing:?}", fa.len()));
    assert!(ok);
}
