use super::*;
use crate::physics::{Geometry, MaterialProps, ScalingMap};

fn jakob(props: &MaterialProps) -> f64 {
    props.c_s * (props.t_melt - props.t_ambient) / props.latent_heat
}

fn coarse(grid_n: usize, dt: f64, wall: WallCondition) -> OneDConfig {
    OneDConfig { grid_n, dt, snapshots: 20, wall, ..OneDConfig::default() }
}

#[test]
fn neumann_root_for_the_paraffin() {
    let st = jakob(&MaterialProps::default());
    assert!((st - 0.16829).abs() < 1e-5);
    let lambda = neumann_lambda(st).unwrap();
    // Reference root from an independent bisection in double precision.
    assert!((lambda - 0.2824242998489488).abs() < 1e-12, "λ = {lambda}");
    assert!((lambda - 0.283).abs() < 1e-3);
    assert!(neumann_residual(st, lambda).abs() < 1e-12);
}

#[test]
fn neumann_small_stefan_limit() {
    // λ² ≈ St/2 for small St.
    let st = 1e-6;
    let lambda = neumann_lambda(st).unwrap();
    assert!((lambda - (st / 2.0).sqrt()).abs() < 1e-3 * lambda);
    assert!(neumann_analytic(st, 1e-7, 100.0).unwrap() < 1e-4);
}

#[test]
fn neumann_sqrt_scaling() {
    let (st, a) = (0.3, 2e-7);
    let x1 = neumann_analytic(st, a, 250.0).unwrap();
    let x4 = neumann_analytic(st, a, 1000.0).unwrap();
    assert!((x4 - 2.0 * x1).abs() <= 1e-14 * x4);
    assert_eq!(neumann_analytic(st, a, 0.0).unwrap(), 0.0);
}

#[test]
fn neumann_rejects_non_positive_stefan() {
    assert!(neumann_lambda(0.0).is_err());
    assert!(neumann_lambda(-1.0).is_err());
    assert!(neumann_lambda(f64::NAN).is_err());
}

#[test]
fn zero_duration_is_the_initial_state() {
    let props = MaterialProps::default();
    let s = solve_1d(&props, &Geometry::default(), 0.0, &OneDConfig::default()).unwrap();
    assert_eq!(s.snapshots.len(), 1);
    let s0 = &s.snapshots[0];
    assert_eq!(s0.x_front, 0.0);
    assert!(s0.y.iter().all(|&v| v == 0.0));
    assert!(s0.tf.iter().chain(&s0.ts).all(|&v| v == props.t_melt));
}

#[test]
fn no_driving_force_no_growth() {
    let props = MaterialProps { t_ambient: 32.0, ..MaterialProps::default() };
    let cfg = coarse(100, 1.0, WallCondition::Convective);
    let s = solve_1d(&props, &Geometry::default(), 500.0, &cfg).unwrap();
    for snap in &s.snapshots {
        assert!(snap.x_front <= cfg.x_seed);
        assert!(snap.y.iter().all(|&v| v <= cfg.y_seed));
    }
}

#[test]
fn fixed_wall_matches_neumann() {
    let props = MaterialProps::default();
    let s = solve_1d(&props, &Geometry::default(), 1000.0, &coarse(400, 0.5, WallCondition::FixedTemperature)).unwrap();
    let alpha = props.diffusivity_solid();
    for snap in s.snapshots.iter().filter(|p| p.t >= 100.0) {
        let exact = neumann_analytic(jakob(&props), alpha, snap.t).unwrap();
        assert!((snap.x_front - exact).abs() < 0.01 * exact, "t = {}: {} vs {exact}", snap.t, snap.x_front);
    }
}

#[test]
fn fronts_grow_and_fin_stays_between_ambient_and_melt() {
    let props = MaterialProps::default();
    let s = solve_1d(&props, &Geometry::default(), 1240.0, &coarse(200, 1.0, WallCondition::Convective)).unwrap();
    for w in s.snapshots.windows(2) {
        assert!(w[1].x_front >= w[0].x_front);
        assert!(w[1].y.iter().zip(&w[0].y).all(|(a, b)| a >= b));
    }
    for snap in &s.snapshots {
        assert!(snap.tf.iter().all(|&v| v >= props.t_ambient - 1e-9 && v <= props.t_melt + 1e-9));
        assert!(snap.ts.iter().all(|&v| v >= props.t_ambient - 1e-9 && v <= props.t_melt + 1e-9));
    }
    let last = s.snapshots.last().unwrap();
    assert!(last.x_front > 1e-4);
    // The fin cools most at its convective ends.
    assert!(last.tf[0] < last.tf[100]);
}

#[test]
fn refinement_changes_front_little() {
    let props = MaterialProps::default();
    let g = Geometry::default();
    let a = solve_1d(&props, &g, 1240.0, &coarse(200, 1.0, WallCondition::Convective)).unwrap();
    let b = solve_1d(&props, &g, 1240.0, &coarse(400, 0.5, WallCondition::Convective)).unwrap();
    let (xa, xb) = (a.snapshots.last().unwrap().x_front, b.snapshots.last().unwrap().x_front);
    assert!((xa - xb).abs() < 0.005 * xb, "{xa} vs {xb}");
}

#[test]
fn series_interpolation_hits_nodes() {
    let s = solve_1d(&MaterialProps::default(), &Geometry::default(), 100.0, &coarse(50, 1.0, WallCondition::Convective))
        .unwrap();
    let snap = &s.snapshots[7];
    let (y, tf) = s.fin_at(s.fin_x[13], snap.t);
    assert!((y - snap.y[13]).abs() < 1e-15 && (tf - snap.tf[13]).abs() < 1e-12);
    assert_eq!(s.front_at(snap.t), snap.x_front);
    assert_eq!(s.front_at(1e9), s.snapshots.last().unwrap().x_front);
}

#[test]
fn one_d_rejects_bad_config() {
    let p = MaterialProps::default();
    let g = Geometry::default();
    assert!(solve_1d(&p, &g, 10.0, &OneDConfig { grid_n: 3, ..OneDConfig::default() }).is_err());
    assert!(solve_1d(&p, &g, 10.0, &OneDConfig { dt: 0.0, ..OneDConfig::default() }).is_err());
    assert!(solve_1d(&p, &g, -1.0, &OneDConfig::default()).is_err());
}

fn small_2d(nx: usize, ny: usize, slab: bool) -> EnthalpyConfig {
    EnthalpyConfig { nx, ny, slab, snapshots: 5, ..EnthalpyConfig::default() }
}

#[test]
fn no_flux_keeps_fields_constant() {
    let props = MaterialProps { h: 0.0, ..MaterialProps::default() };
    let s = solve_2d_enthalpy(&props, &Geometry::default(), 100.0, &small_2d(16, 8, false)).unwrap();
    for snap in &s.snapshots {
        assert!(snap.temperature.iter().all(|&v| v == props.t_melt));
        assert!(snap.liquid_fraction.iter().skip(16).all(|&f| f == 1.0));
        assert_eq!(snap.released, 0.0);
        assert_eq!(snap.solid_fraction, 0.0);
    }
}

#[test]
fn energy_balance_closes() {
    let props = MaterialProps::default();
    let s = solve_2d_enthalpy(&props, &Geometry::default(), 600.0, &small_2d(32, 16, false)).unwrap();
    let e0 = s.snapshots[0].energy;
    for snap in &s.snapshots[1..] {
        let drop = e0 - snap.energy;
        assert!(drop > 0.0);
        assert!((drop - snap.released).abs() < 0.005 * drop, "{drop} vs {}", snap.released);
        assert!(snap.liquid_fraction.iter().all(|&f| (0.0..=1.0).contains(&f)));
    }
    let fr: Vec<f64> = s.snapshots.iter().map(|p| p.solid_fraction).collect();
    assert!(fr.windows(2).all(|w| w[1] >= w[0]) && fr[5] > 0.0);
}

#[test]
fn slab_front_follows_the_1d_solver() {
    let props = MaterialProps::default();
    let geom = Geometry::default().with_aspect_ratio(5.0);
    let s = solve_2d_enthalpy(&props, &geom, 500.0, &small_2d(64, 32, true)).unwrap();
    let one = solve_1d(&props, &geom, 500.0, &coarse(400, 0.5, WallCondition::Convective)).unwrap();
    let front = &s.snapshots.last().unwrap().front;
    let spread = front.iter().cloned().fold(0.0, f64::max) - front.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-12, "slab rows must agree");
    let x1 = one.front_at(500.0);
    assert!((front[0] - x1).abs() < 0.02 * geom.l_c, "{} vs {x1}", front[0]);
}

#[test]
fn halving_mush_width_barely_moves_solid_fraction() {
    let props = MaterialProps::default();
    let g = Geometry::default();
    let a = solve_2d_enthalpy(&props, &g, 600.0, &small_2d(32, 16, false)).unwrap();
    let b = solve_2d_enthalpy(&props, &g, 600.0, &EnthalpyConfig { mush: 0.05, ..small_2d(32, 16, false) }).unwrap();
    for (p, q) in a.snapshots.iter().zip(&b.snapshots) {
        assert!((p.solid_fraction - q.solid_fraction).abs() <= 0.01 * p.solid_fraction.max(1e-12) + 1e-12);
    }
}

#[test]
fn interface_starts_at_fin_and_rises_near_wall() {
    let props = MaterialProps::default();
    let s = solve_2d_enthalpy(&props, &Geometry::default(), 600.0, &small_2d(32, 16, false)).unwrap();
    let g = Geometry::default();
    assert!(s.snapshots[0].interface.iter().all(|&v| v == g.delta));
    let last = s.snapshots.last().unwrap();
    assert!(last.interface.iter().all(|&v| v >= g.delta && v <= g.l_c));
    assert!(last.interface[31] > g.delta);
    assert_eq!(last.phase[0], CellPhase::Fin);
}

#[test]
fn explicit_output_times() {
    let cfg = EnthalpyConfig { output_times: vec![7.0, 20.0], ..small_2d(8, 4, false) };
    let s = solve_2d_enthalpy(&MaterialProps::default(), &Geometry::default(), 20.0, &cfg).unwrap();
    let t: Vec<f64> = s.snapshots.iter().map(|p| p.t).collect();
    assert_eq!(t, [0.0, 7.0, 20.0]);
    let bad = EnthalpyConfig { output_times: vec![7.0, 30.0], ..small_2d(8, 4, false) };
    assert!(solve_2d_enthalpy(&MaterialProps::default(), &Geometry::default(), 20.0, &bad).is_err());
}

#[test]
fn oversized_step_is_rejected() {
    let r = solve_2d_enthalpy(
        &MaterialProps::default(),
        &Geometry::default(),
        10.0,
        &EnthalpyConfig { dt: Some(10.0), ..small_2d(16, 8, false) },
    );
    assert!(matches!(r, Err(OracleError::StepSize { .. })));
}

fn scaled(p: f64) -> (ScalingMap, OneDSeries) {
    let props = MaterialProps::default();
    let geom = Geometry::default().with_aspect_ratio(p);
    let scaling = ScalingMap::new(props.clone(), geom.clone()).unwrap();
    let t_end = scaling.time(4.0);
    let s = solve_1d(&props, &geom, t_end, &coarse(200, 1.0, WallCondition::Convective)).unwrap();
    (scaling, s)
}

#[test]
fn targets_at_time_zero_are_initial_conditions() {
    let (scaling, s) = scaled(2.0);
    let d = scaling.length_star(scaling.geom.delta);
    for x in [0.0, 0.3, 1.0] {
        let (sv, tf) = pretrain_target_at(&s, &scaling, x, 0.0);
        assert_eq!(sv, d);
        assert_eq!(tf, 1.0);
    }
}

#[test]
fn targets_cover_the_design_and_cool_in_time() {
    let (scaling, s) = scaled(2.0);
    assert!(generate_pretrain_targets(&s, &scaling, 0, 2.0, 1).unwrap().is_empty());
    let t = generate_pretrain_targets(&s, &scaling, 300, 2.0, 1).unwrap();
    assert_eq!(t.len(), 300);
    let p_star = scaling.p_star(2.0).unwrap();
    for p in &t {
        assert!(p.x >= 0.0 && p.x <= 1.0 && p.t >= 0.0 && p.t <= 4.0 + 1e-12);
        assert_eq!(p.p_star, p_star);
        assert!(p.s >= scaling.length_star(scaling.geom.delta) && p.s <= 1.0);
        assert!(p.tf >= 0.0 && p.tf <= 1.0);
    }
    assert_eq!(t, generate_pretrain_targets(&s, &scaling, 300, 2.0, 1).unwrap());
    assert!(generate_pretrain_targets(&s, &scaling, 10, 3.0, 1).is_err());

    let rows = oracle1d_rows(&s, &scaling, 2.0, 11).unwrap();
    for i in 0..11 {
        let col: Vec<&OneDRow> = rows.iter().skip(i).step_by(11).collect();
        assert!(col.windows(2).all(|w| w[1].t_star > w[0].t_star && w[1].tf_star <= w[0].tf_star + 1e-12));
        assert!(col.windows(2).all(|w| w[1].s_star >= w[0].s_star));
    }
}

#[test]
fn oracle1d_csv_round_trip() {
    let (scaling, s) = scaled(2.0);
    let rows = oracle1d_rows(&s, &scaling, 2.0, 5).unwrap();
    let mut buf = Vec::new();
    write_oracle1d_csv(&mut buf, &rows).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("t_star,x_star,s_star,Tf_star\n"));
    let back = read_oracle1d_csv(buf.as_slice()).unwrap();
    assert_eq!(back, rows);
    let targets = targets_from_rows(&back, 0.25, 0.05);
    assert_eq!(targets.len(), rows.len());
    assert_eq!(targets[3].y, 0.025);
}

#[test]
fn oracle2d_csv_layout() {
    let props = MaterialProps::default();
    let g = Geometry::default();
    let scaling = ScalingMap::new(props.clone(), g.clone()).unwrap();
    let s = solve_2d_enthalpy(&props, &g, 60.0, &small_2d(4, 3, false)).unwrap();
    let mut buf = Vec::new();
    write_oracle2d_csv(&mut buf, &s.x, &s.y, &[s.snapshots.last().unwrap()], &scaling).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t_star,x_star,y_star,T_star,phase");
    assert_eq!(lines.len(), 1 + 12);
    assert!(lines[1].ends_with(",fin"));
}
