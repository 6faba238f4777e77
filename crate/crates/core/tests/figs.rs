use std::fs;

use nhrelax::cli::{main_with_args, sidecar_path};
use nhrelax::figs::{load_sidecar, load_table, validate, FigsError, FigureId, FigureRecipe};

fn produce(dir: &std::path::Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut all = vec!["nhrelax"];
    all.extend_from_slice(args);
    all.extend(["-o", out.to_str().unwrap()]);
    assert_eq!(main_with_args(all), 0);
    out
}

#[test]
fn cli_tables_satisfy_recipes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sweep = produce(d, "sweep.csv", &["sweep", "--axis", "L", "--values", "20,30", "--Gamma", "0.2"]);
    let relax = produce(d, "relax.csv", &["relax", "--L", "20", "--Gamma", "0.2", "--trajectory"]);
    let prop = produce(d, "p.csv", &["propagator", "--L", "20", "--route", "direct,no_bounce", "--t-points", "11"]);
    let intf = produce(d, "i.csv", &["interference", "--L", "50"]);
    let cases = [
        (FigureId::Fig1b, sweep.clone()),
        (FigureId::SatFit, sweep),
        (FigureId::RelaxCurves, d.join("relax.trajectory.csv")),
        (FigureId::PCurves, prop.clone()),
        (FigureId::Heights, prop),
        (FigureId::Interference, intf),
        (FigureId::Fig2, relax),
    ];
    for (figure, input) in cases {
        let recipe = FigureRecipe { figure, inputs: vec![input], output: d.join(format!("{}.svg", figure.label())) };
        let tables = validate(&recipe).unwrap_or_else(|e| panic!("{}: {e}", figure.label()));
        assert!(!tables[0].rows.is_empty());
    }
    let p = load_table(&d.join("p.csv"), &["logP"]).unwrap();
    assert_eq!(p.numeric("logP").unwrap()[0], f64::NEG_INFINITY);
}

#[test]
fn empty_csv_is_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let header_only = dir.path().join("header.csv");
    fs::write(&header_only, "t,site,n,delta_n\n").unwrap();
    for input in [empty, header_only] {
        let recipe = FigureRecipe { figure: FigureId::RelaxCurves, inputs: vec![input], output: dir.path().join("f.svg") };
        let err = validate(&recipe).unwrap_err();
        assert_eq!(err.name(), "SchemaMismatch");
    }
}

#[test]
fn missing_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    fs::write(&p, "t,site,n\n0,1,0\n").unwrap();
    match load_table(&p, FigureId::RelaxCurves.required_columns()) {
        Err(FigsError::SchemaMismatch { missing, .. }) => assert_eq!(missing, vec!["delta_n".to_string()]),
        other => panic!("{other:?}"),
    }
    let recipe = FigureRecipe { figure: FigureId::RelaxCurves, inputs: vec![p], output: dir.path().join("f.png") };
    assert!(matches!(validate(&recipe), Err(FigsError::OutputFormat(_))));
}

#[test]
fn sidecar_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = produce(dir.path(), "s.csv", &["spectrum", "--L", "8"]);
    let meta = load_sidecar(&sidecar_path(&out)).unwrap();
    assert_eq!(meta["rows"], 8);
    let bad = dir.path().join("bad.meta.json");
    fs::write(&bad, r#"{"tool":"x"}"#).unwrap();
    assert_eq!(load_sidecar(&bad).unwrap_err().name(), "SchemaMismatch");
}

#[test]
fn recipe_json() {
    let r: FigureRecipe =
        serde_json::from_str(r#"{"figure":"fig_P_curves","inputs":["p.csv"],"output":"p.pdf"}"#).unwrap();
    assert_eq!(r.figure, FigureId::PCurves);
    assert!(FigureId::Fig1b.overlay().is_some());
}
