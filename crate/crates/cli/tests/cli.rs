use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
profile = "fast"
seed = 11

[network]
hidden = [6, 6]

[sampling]
pcm_points = 32
fin_points = 16
bc_points = 8
ic_points = 8
interface_points = 16
n_extra = 8

[training]
n_pre = 5
pretrain_points = 20
n_adam = 6
refresh_every = 3
n_cycles = 1
n_lbfgs = 3

[oracle]
pretrain_p = [2.0]
table_points = 5

[oracle.one_d]
grid_n = 40
dt = 5.0
snapshots = 10

[oracle.two_d]
nx = 8
ny = 4
snapshots = 2
"#;

fn stefan(dir: &Path, args: &[&str]) -> Output {
    let cfg = dir.join("tiny.toml");
    if !cfg.exists() {
        std::fs::write(&cfg, TINY).unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_stefan"))
        .args(["--config", cfg.to_str().unwrap(), "--out-dir", dir.join("out").to_str().unwrap()])
        .args(args)
        .output()
        .unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn unknown_command_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!stefan(dir.path(), &["bake"]).status.success());
}

#[test]
fn missing_checkpoint_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = stefan(dir.path(), &["infer", "--p", "2", "--t-star", "1.61"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("checkpoint not found"));
}

#[test]
fn bad_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[geometry]\np_max = 7.0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_stefan"))
        .args(["--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "oracle1d", "--p", "2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_max") || String::from_utf8_lossy(&out.stderr).contains("aspect"));
}

#[test]
fn oracle_table_then_pretrain() {
    let dir = tempfile::tempdir().unwrap();
    let out = stefan(dir.path(), &["oracle1d", "--p", "2", "--t-star-max", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = dir.path().join("out/oracle1d.csv");
    assert_eq!(lines(&table)[0], "t_star,x_star,s_star,Tf_star");
    let out = stefan(dir.path(), &["pretrain", "--targets", table.to_str().unwrap(), "--p", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/ckpt.json").exists());
}

#[test]
fn oracle2d_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = stefan(dir.path(), &["oracle2d", "--p", "2", "--t-star-max", "0.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let l = lines(&dir.path().join("out/oracle2d.csv"));
    assert_eq!(l[0], "t_star,x_star,y_star,T_star,phase");
    assert_eq!(l.len(), 1 + 3 * 8 * 4);
}

#[test]
fn train_infer_validate_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = stefan(dir.path(), &["train"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["ckpt.json", "report.json", "loss_curve.csv", "timing.json"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }

    let out = stefan(dir.path(), &["infer", "--p", "2", "--t-star", "1.61", "--grid", "201x101"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let contour = lines(&dir.path().join("out/contour.csv"));
    assert_eq!(contour[0], "x_star,y_star,t_star,P,field,value");
    for field in ["T_star", "phase"] {
        assert_eq!(contour.iter().filter(|l| l.split(',').nth(4) == Some(field)).count(), 201 * 101);
    }
    assert_eq!(lines(&dir.path().join("out/solid_fraction.csv"))[0], "t_star,fraction,P");
    assert_eq!(lines(&dir.path().join("out/interface.csv"))[0], "t_star,x_star,s_star,P");

    let out = stefan(dir.path(), &["infer", "--p", "2", "--t-star", "1", "--grid", "20by3"]);
    assert!(!out.status.success());

    let out = stefan(dir.path(), &["validate"]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/validate_summary.json")).unwrap()).unwrap();
    assert_eq!(out.status.success(), summary["passed"].as_bool().unwrap(), "exit status must mirror the summary");
    assert_eq!(summary["violations"].as_array().unwrap().is_empty(), summary["passed"].as_bool().unwrap());
    assert!(String::from_utf8_lossy(&out.stdout).contains("fin max rel"));

    let out = stefan(dir.path(), &["export", "--p", "1,3", "--grid", "5x4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(lines(&dir.path().join("out/fin_extrema.csv"))[0], "P,Tf_star_min,Tf_star_max");
    assert_eq!(lines(&dir.path().join("out/fin_temp.csv"))[0], "t_star,x_star,Tf_star,P");
}

#[test]
fn identical_runs_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        assert!(stefan(d, &["train"]).status.success());
        assert!(stefan(d, &["export", "--p", "2", "--grid", "4x3"]).status.success());
    }
    for f in ["ckpt.json", "report.json", "loss_curve.csv", "interface.csv", "fin_temp.csv", "solid_fraction.csv", "contour.csv", "fin_extrema.csv"] {
        assert_eq!(std::fs::read(a.path().join("out").join(f)).unwrap(), std::fs::read(b.path().join("out").join(f)).unwrap(), "{f}");
    }
}
