use super::*;
use crate::training::{AdamState, WeightMode, WeightState};

fn small_specs() -> TripletSpecs {
    TripletSpecs::uniform(&[7, 5])
}

/// Independent evaluation of one network straight from the flat vector.
fn reference(specs: &TripletSpecs, params: &[f64], role: NetworkRole, input: &[f64]) -> Vec<f64> {
    let mut offset = 0;
    for r in NetworkRole::ALL {
        if r == role {
            break;
        }
        offset += specs.get(r).parameter_count();
    }
    let shapes = specs.get(role).layer_shapes();
    let mut h = input.to_vec();
    for (l, &(fi, fo)) in shapes.iter().enumerate() {
        let mut z = vec![0.0; fo];
        for (j, zj) in z.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, hi) in h.iter().enumerate() {
                acc += hi * params[offset + i * fo + j];
            }
            *zj = acc + params[offset + fi * fo + j];
        }
        offset += (fi + 1) * fo;
        h = if l + 1 < shapes.len() { z.iter().map(|v| v.tanh()).collect() } else { z };
    }
    h
}

fn probe_points() -> Vec<[f64; 4]> {
    vec![[0.1, 0.2, 0.3, 0.4], [1.7, 0.05, 3.2, 0.9], [0.0, 1.0, 0.0, 0.0], [2.4, 0.6, 1.61, 0.25]]
}

#[test]
fn glorot_bound_and_zero_bias() {
    let specs = TripletSpecs::default();
    let t = init_triplet(specs, 11).unwrap();
    let slice = t.layout().layers(NetworkRole::Solid)[1];
    assert_eq!((slice.fan_in, slice.fan_out), (64, 64));
    let limit = (6.0f64 / 128.0).sqrt();
    assert!((limit - 0.2165).abs() < 1e-4);
    let w = &t.params()[slice.offset..slice.bias_offset()];
    assert!(w.iter().all(|v| v.abs() <= limit));
    assert!(w.iter().any(|v| v.abs() > 0.9 * limit));
    for role in NetworkRole::ALL {
        for s in t.layout().layers(role) {
            assert!(t.params()[s.bias_offset()..s.offset + s.len()].iter().all(|&b| b == 0.0));
        }
    }
}

#[test]
fn init_is_deterministic_in_seed() {
    let a = init_triplet(small_specs(), 3).unwrap();
    let b = init_triplet(small_specs(), 3).unwrap();
    let c = init_triplet(small_specs(), 4).unwrap();
    assert_eq!(a.params(), b.params());
    assert_ne!(a.params(), c.params());
    // The three networks draw from different streams.
    let s = &a.params()[a.layout().range(NetworkRole::Solid)][..10];
    let f = &a.params()[a.layout().range(NetworkRole::Fin)][..10];
    assert_ne!(s, f);
}

#[test]
fn init_rejects_bad_specs() {
    let mut specs = small_specs();
    specs.fin.hidden = vec![8, 0];
    assert!(matches!(init_triplet(specs, 0), Err(NetworkError::ZeroWidth { role: NetworkRole::Fin, layer: 1 })));
    let mut specs = small_specs();
    specs.interface.input_arity = 4;
    assert!(matches!(init_triplet(specs, 0), Err(NetworkError::Arity { role: NetworkRole::Interface, .. })));
}

#[test]
fn layout_is_a_bijection() {
    let t = init_triplet(small_specs(), 0).unwrap();
    let layout = t.layout();
    let mut seen = vec![false; layout.total()];
    for role in NetworkRole::ALL {
        for (l, s) in layout.layers(role).iter().enumerate() {
            for row in 0..=s.fan_in {
                for col in 0..s.fan_out {
                    let k = layout.index(role, l, row, col).unwrap();
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(layout.locate(k), Some((role, l, row, col)));
                }
            }
        }
    }
    assert!(seen.iter().all(|&v| v));
    assert_eq!(layout.locate(layout.total()), None);
    assert_eq!(layout.index(NetworkRole::Solid, 0, 5, 0), None);
    let r = layout.range(NetworkRole::Fin);
    assert_eq!(r.start, layout.range(NetworkRole::Solid).end);
    assert_eq!(layout.range(NetworkRole::Interface).end, layout.total());
}

#[test]
fn zero_parameters_give_zero_outputs() {
    let specs = small_specs();
    let n = ParameterLayout::new(&specs).total();
    let t = NetworkTriplet::from_parts(specs, vec![0.0; n]).unwrap();
    for role in [NetworkRole::Solid, NetworkRole::Fin] {
        for v in t.eval_field(role, &probe_points()).unwrap() {
            assert_eq!(v, [0.0, 0.0, 0.0]);
        }
    }
    assert!(t.eval_interface(&[[0.3, 1.0, 0.5], [2.0, 3.0, 1.0]]).unwrap().iter().all(|&s| s == 0.0));
}

#[test]
fn forward_matches_straight_line_reference() {
    let t = init_triplet(small_specs(), 21).unwrap();
    // Non-zero biases so every term is exercised.
    let mut t = t;
    for (i, p) in t.params_mut().iter_mut().enumerate() {
        *p += 0.01 * ((i % 7) as f64 - 3.0);
    }
    for role in [NetworkRole::Solid, NetworkRole::Fin] {
        let pts = probe_points();
        let got = t.eval_field(role, &pts).unwrap();
        for (p, g) in pts.iter().zip(&got) {
            let want = reference(t.specs(), t.params(), role, p);
            for k in 0..3 {
                assert!((g[k] - want[k]).abs() <= 1e-15 * want[k].abs().max(1.0), "{role} {k}");
            }
        }
    }
    let pts = [[0.2, 1.0, 0.1], [2.5, 4.0, 1.0]];
    let got = t.eval_interface(&pts).unwrap();
    for (p, g) in pts.iter().zip(&got) {
        let want = reference(t.specs(), t.params(), NetworkRole::Interface, p)[0];
        assert!((g - want).abs() <= 1e-15 * want.abs().max(1.0));
    }
}

#[test]
fn repeated_evaluation_is_identical() {
    let t = init_triplet(small_specs(), 2).unwrap();
    let a = t.eval_field(NetworkRole::Fin, &probe_points()).unwrap();
    let b = t.eval_field(NetworkRole::Fin, &probe_points()).unwrap();
    assert_eq!(a, b);
    let pts = [[0.4, 0.7, 0.3]];
    assert_eq!(t.eval_interface(&pts).unwrap(), t.eval_interface(&pts).unwrap());
}

fn central<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = 1e-6;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn solid_temperature_input_derivatives_match_fd() {
    let t = init_triplet(small_specs(), 5).unwrap();
    let p0 = [0.6, 0.4, 1.2, 0.3];
    let mut g = Graph::new();
    let leaves = t.register(&mut g);
    let cols: Vec<NodeId> = ["x", "y", "t", "p"].iter().map(|n| g.input(n, 1, 1)).collect();
    let out = t.forward_solid(&mut g, &leaves, cols[0], cols[1], cols[2], cols[3]);
    let derivs: Vec<NodeId> = (0..3).map(|k| g.input_derivative(out.temperature, cols[k]).unwrap()).collect();
    let mut b = Bindings::new();
    t.bind(&leaves, &mut b);
    for k in 0..4 {
        b.set(cols[k], Matrix::scalar(p0[k]));
    }
    let ev = g.evaluate(&b).unwrap();
    for k in 0..3 {
        let fd = central(
            |v| {
                let mut q = p0;
                q[k] = v;
                reference(t.specs(), t.params(), NetworkRole::Solid, &q)[0]
            },
            p0[k],
        );
        let ad = ev.scalar(derivs[k]);
        assert!((ad - fd).abs() <= 1e-6 * fd.abs().max(1e-3), "axis {k}: {ad} vs {fd}");
    }
}

#[test]
fn interface_slopes_match_fd() {
    let t = init_triplet(small_specs(), 8).unwrap();
    let p0 = [0.9, 2.0, 0.5];
    let (_, slopes) = t.eval_interface_slopes(&[p0], true).unwrap();
    let s = |x: f64, tt: f64| t.eval_interface(&[[x, tt, p0[2]]]).unwrap()[0];
    let fd_x = central(|x| s(x, p0[1]), p0[0]);
    assert!((slopes[0].0 - fd_x).abs() <= 1e-6 * fd_x.abs().max(1e-3));
    let h = 1e-4;
    let fd_xx = (s(p0[0] + h, p0[1]) - 2.0 * s(p0[0], p0[1]) + s(p0[0] - h, p0[1])) / (h * h);
    assert!((slopes[0].1 - fd_xx).abs() <= 1e-5 * fd_xx.abs().max(1e-2));

    let mut g = Graph::new();
    let leaves = t.register(&mut g);
    let cols: Vec<NodeId> = ["x", "t", "p"].iter().map(|n| g.input(n, 1, 1)).collect();
    let sn = t.forward_interface(&mut g, &leaves, cols[0], cols[1], cols[2]);
    let st = g.input_derivative(sn, cols[1]).unwrap();
    let mut b = Bindings::new();
    t.bind(&leaves, &mut b);
    for k in 0..3 {
        b.set(cols[k], Matrix::scalar(p0[k]));
    }
    let fd_t = central(|v| s(p0[0], v), p0[1]);
    let ad_t = g.evaluate(&b).unwrap().scalar(st);
    assert!((ad_t - fd_t).abs() <= 1e-6 * fd_t.abs().max(1e-3));
}

#[test]
fn hard_ic_zeroes_the_interface_at_t0() {
    let t = init_triplet(small_specs(), 1).unwrap().with_hard_ic_interface(true);
    let s = t.eval_interface(&[[0.3, 0.0, 0.2], [1.1, 0.0, 0.9]]).unwrap();
    assert_eq!(s, vec![0.0, 0.0]);
    let raw = init_triplet(small_specs(), 1).unwrap();
    let a = raw.eval_interface(&[[0.3, 2.0, 0.2]]).unwrap()[0];
    let b = t.eval_interface(&[[0.3, 2.0, 0.2]]).unwrap()[0];
    assert!((b - 2.0 * a).abs() < 1e-15);
}

fn sample_checkpoint() -> (NetworkTriplet, Checkpoint) {
    let mut t = init_triplet(small_specs(), 99).unwrap();
    for (i, p) in t.params_mut().iter_mut().enumerate() {
        *p += 1e-3 * (i as f64).sin() / 3.0;
    }
    let mut ws = WeightState::new(0.8, WeightMode::Group);
    ws.weights.insert("pde".into(), 0.9123456789012345);
    let adam = AdamState::new(t.params().len(), 1e-3);
    let echo = serde_json::json!({"lr": 5e-4, "profile": "fast"});
    let ck = Checkpoint::new(&t, 99, ws, Some(crate::training::OptimizerState::Adam(adam)), echo);
    (t, ck)
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ckpt.json");
    let (t, ck) = sample_checkpoint();
    save_checkpoint(&path, &ck).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back, ck);
    let t2 = back.triplet().unwrap();
    assert_eq!(t2.params(), t.params());
    assert_eq!(
        t.eval_field(NetworkRole::Solid, &probe_points()).unwrap(),
        t2.eval_field(NetworkRole::Solid, &probe_points()).unwrap()
    );
    // Saving the loaded checkpoint reproduces the bytes.
    assert_eq!(back.to_json(), std::fs::read_to_string(&path).unwrap());
    assert!(!dir.path().join("ckpt.json.tmp").exists());
}

#[test]
fn checkpoint_numbers_have_17_significant_digits() {
    let (_, ck) = sample_checkpoint();
    let text = ck.to_json();
    assert!(text.contains("\"lr\":5.0000000000000001e-4"), "{}", &text[text.len() - 200..]);
    let w = format!("{:.16e}", 0.9123456789012345f64);
    assert_eq!(w.split('e').next().unwrap().len(), 18);
    assert!(text.contains(&w));
}

#[test]
fn truncated_checkpoint_is_malformed() {
    let (_, ck) = sample_checkpoint();
    let text = ck.to_json();
    let cut = &text[..text.len() / 2];
    assert!(matches!(Checkpoint::from_json(cut), Err(NetworkError::Malformed(_))));
    assert!(matches!(Checkpoint::from_json(""), Err(NetworkError::Malformed(_))));
}

#[test]
fn checkpoint_version_and_arity_errors() {
    let (_, ck) = sample_checkpoint();
    let mut v: serde_json::Value = serde_json::from_str(&ck.to_json()).unwrap();
    v["format_version"] = serde_json::json!(7);
    assert!(matches!(
        Checkpoint::from_json(&v.to_string()),
        Err(NetworkError::Version { found: 7, expected: FORMAT_VERSION })
    ));

    let mut v: serde_json::Value = serde_json::from_str(&ck.to_json()).unwrap();
    v["specs"]["solid"]["input_arity"] = serde_json::json!(3);
    assert!(matches!(
        Checkpoint::from_json(&v.to_string()),
        Err(NetworkError::Arity { role: NetworkRole::Solid, found_in: 3, .. })
    ));

    let mut v: serde_json::Value = serde_json::from_str(&ck.to_json()).unwrap();
    v["parameters"]["fin"][0]["bias"] = serde_json::json!([0.0]);
    assert!(matches!(Checkpoint::from_json(&v.to_string()), Err(NetworkError::LayerShape { role: NetworkRole::Fin, .. })));
}

#[test]
fn missing_checkpoint_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_checkpoint(&dir.path().join("nope.json")), Err(NetworkError::Io(_))));
}
