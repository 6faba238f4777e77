use std::fs;
use std::path::Path;

use nhrelax::cli::{main_with_args, sidecar_path, Command, RunConfig};
use nhrelax::figs::{load_sidecar, load_table};
use nhrelax::{ModelSpec, Statistics};

fn run(args: &[&str]) -> i32 {
    let mut all = vec!["nhrelax"];
    all.extend_from_slice(args);
    main_with_args(all)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    load_table(path, &[]).unwrap().rows
}

#[test]
fn relax_example_gives_one_sustained_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("relax.csv");
    let args = ["relax", "--model", "hn", "--stats", "boson", "--w", "1", "--kappa", "0.999", "--Gamma", "0.2", "--L", "100"];
    let mut full = args.to_vec();
    full.extend(["-o", out.to_str().unwrap()]);
    assert_eq!(run(&full), 0);
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][11], "true");
    let meta = load_sidecar(&sidecar_path(&out)).unwrap();
    assert_eq!(meta["status"], "ok");
    assert_eq!(meta["config"]["model"]["L"], 100);
}

#[test]
fn length_sweep_is_sorted_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let code = run(&[
            "sweep", "--axis", "L", "--values", "20:180:20", "--stats", "boson", "--kappa", "0.999", "--Gamma", "0.2",
            "--workers", "2", "-o", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let ls: Vec<usize> = rows(&a).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(ls, (1..=9).map(|k| 20 * k).collect::<Vec<_>>());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["relax", "--stats", "boson", "--kappa", "0", "--Gamma", "0.5", "-o", o]), 1);
    assert!(!out.exists());
    assert_eq!(run(&["relax", "--no-such-flag"]), 1);
    assert_eq!(run(&["localization", "--L", "20", "--energy", "5,0", "-o", o]), 2);
    let meta = load_sidecar(&sidecar_path(&out)).unwrap();
    assert_eq!(meta["status"], "error");
    assert_eq!(meta["error"]["name"], "NotAnEigenvalue");
    let v = dir.path().join("verify.csv");
    assert_eq!(run(&["verify", "-o", v.to_str().unwrap()]), 0);
    assert!(rows(&v).iter().all(|r| r[3] == "true"));
}

#[test]
fn json_config_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(Command::Relax, ModelSpec::hn(Statistics::Fermion, 40, 1.0, 0.999, 0.0, 0.2));
    cfg.output = Some(dir.path().join("from_json.csv"));
    let cfg_path = dir.path().join("run.json");
    fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    assert_eq!(run(&["--config", cfg_path.to_str().unwrap()]), 0);
    let flags = dir.path().join("from_flags.csv");
    assert_eq!(run(&["relax", "--L", "40", "--Gamma", "0.2", "-o", flags.to_str().unwrap()]), 0);
    assert_eq!(fs::read(dir.path().join("from_json.csv")).unwrap(), fs::read(&flags).unwrap());
}

#[test]
fn trajectory_companion_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    assert_eq!(run(&["relax", "--L", "20", "--Gamma", "0.1", "--trajectory", "-o", out.to_str().unwrap()]), 0);
    let traj = load_table(&dir.path().join("r.trajectory.csv"), &["t", "site", "n", "delta_n"]).unwrap();
    let dn = traj.numeric("delta_n").unwrap();
    assert_eq!(dn[0], 1.0);
    assert!(traj.text("site").unwrap().iter().all(|s| *s == "20"));
    assert!(sidecar_path(&dir.path().join("r.trajectory.csv")).exists());
}
