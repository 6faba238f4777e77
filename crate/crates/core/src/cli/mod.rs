//! Command-line driver: run configuration, dispatch and artifact emission.
//!
//! Every command writes one primary CSV (plus optional companions) and a JSON sidecar
//! per CSV. Exit codes: `0` success, `1` configuration error, `2` numerical failure,
//! `3` failed verification.

mod artifacts;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub use artifacts::{
    companion_path, fmt_real, sidecar_path, ErrorInfo, Sidecar, Table, INTERFERENCE_COLUMNS, LOCALIZATION_COLUMNS,
    PROPAGATOR_COLUMNS, RELAXATION_COLUMNS, SPECTRUM_COLUMNS, STEADY_COLUMNS, TRAJECTORY_COLUMNS, VERIFY_COLUMNS,
};

use crate::analysis::{
    evec_prediction, interference_terms, localization_extract, run_sweep, saturation_study, scaling_fit,
    LengthConvention, SweepAxis,
};
use crate::dynamics::{relax, steady_diagonal_quadrature, InitialKind, RelaxConfig, DEFAULT_SUSTAIN_FACTOR};
use crate::models::{derived_scales, hn_spectral_analytic, ModelKind, ModelSpec, Statistics};
use crate::ndlinalg::{eigenvalues, solve_steady_sylvester, C64};
use crate::propagator::{g_obc_bounce, p_no_bounce, p_simplified, propagate_direct, propagate_spectral, Route};
use crate::Error;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "NHRELAX_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Propagator,
    Relax,
    Sweep,
    Steady,
    Interference,
    Localization,
    Verify,
}

impl Command {
    pub fn label(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Propagator => "propagator",
            Self::Relax => "relax",
            Self::Sweep => "sweep",
            Self::Steady => "steady",
            Self::Interference => "interference",
            Self::Localization => "localization",
            Self::Verify => "verify",
        }
    }
}

fn default_model() -> ModelSpec {
    ModelSpec::hn(Statistics::Fermion, 100, 1.0, 0.999, 0.0, 0.05)
}
fn default_eta() -> f64 {
    (-1.0f64).exp()
}
fn default_sustain() -> f64 {
    DEFAULT_SUSTAIN_FACTOR
}
fn default_t_points() -> usize {
    201
}
fn default_init() -> InitialKind {
    InitialKind::Vacuum
}

/// Full description of one invocation; the JSON config file mirrors this struct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_model")]
    pub model: ModelSpec,
    #[serde(default = "default_init")]
    pub init: InitialKind,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_sustain")]
    pub sustain_factor: f64,
    /// Observed site `m` (1-based); the last site by default.
    #[serde(default)]
    pub site: Option<usize>,
    /// Source site `j` (1-based); the first site by default.
    #[serde(default)]
    pub source: Option<usize>,
    #[serde(default)]
    pub axis: Option<SweepAxis>,
    #[serde(default)]
    pub values: Vec<f64>,
    /// Gamma sweeps: report the large-L plateau of `tau * Delta` per value.
    #[serde(default)]
    pub plateau: bool,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "default_t_points")]
    pub t_points: usize,
    #[serde(default)]
    pub routes: Vec<Route>,
    #[serde(default)]
    pub energy: Option<[f64; 2]>,
    /// Also write the `t,site,n,delta_n` table for `relax`.
    #[serde(default)]
    pub trajectory: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub verify: bool,
}

impl RunConfig {
    pub fn new(command: Command, model: ModelSpec) -> Self {
        Self {
            command,
            model,
            init: default_init(),
            eta: default_eta(),
            sustain_factor: default_sustain(),
            site: None,
            source: None,
            axis: None,
            values: Vec::new(),
            plateau: false,
            t_end: None,
            t_points: default_t_points(),
            routes: Vec::new(),
            energy: None,
            trajectory: false,
            output: None,
            workers: None,
            verify: false,
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.command.label())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| Err(CliError::Config(m));
        if self.command != Command::Verify {
            self.model.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return cfg(format!("eta = {} must lie in (0, 1)", self.eta));
        }
        if self.sustain_factor < 1.0 {
            return cfg(format!("sustain factor {} must be at least 1", self.sustain_factor));
        }
        if self.t_points < 2 {
            return cfg("t_points must be at least 2".into());
        }
        if self.workers == Some(0) {
            return cfg("workers must be positive".into());
        }
        let n = self.model.sites();
        for (label, v) in [("site", self.site), ("source", self.source)] {
            if let Some(s) = v.filter(|&s| s == 0 || s > n) {
                return cfg(format!("{label} {s} outside 1..={n}"));
            }
        }
        if let Some(t) = self.t_end.filter(|t| !(*t > 0.0 && t.is_finite())) {
            return cfg(format!("t_end = {t} must be positive"));
        }
        if self.command == Command::Sweep {
            let axis = self.axis.ok_or_else(|| CliError::Config("sweep needs an axis".into()))?;
            if self.values.is_empty() {
                return cfg("sweep needs at least one value".into());
            }
            for &v in &self.values {
                axis.apply(&self.model, v).map_err(|e| CliError::Config(format!("{} = {v}: {e}", axis.label())))?;
            }
            if self.plateau && (axis != SweepAxis::Gamma || self.model.statistics != Statistics::Fermion) {
                return cfg("plateau sweeps need a fermionic Gamma axis".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerical(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 2,
        }
    }
}

fn num<T, E: Into<Error>>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Numerical(e.into()))
}

/// Parses `a:b:step` (inclusive) or a comma-separated list.
pub fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let float = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    match parts.len() {
        1 => text.split(',').map(float).collect(),
        3 => {
            let (a, b, step) = (float(parts[0])?, float(parts[1])?, float(parts[2])?);
            if !(step > 0.0) || b < a {
                return Err(format!("range '{text}' needs a <= b and a positive step"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|k| a + k as f64 * step).collect())
        }
        _ => Err(format!("cannot parse values '{text}'")),
    }
}

/// Parsed `--values` argument.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueList(pub Vec<f64>);

fn parse_value_list(text: &str) -> Result<ValueList, String> {
    parse_values(text).map(ValueList)
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "hn" => Ok(ModelKind::Hn),
        "ssh" => Ok(ModelKind::Ssh),
        "nnn" => Ok(ModelKind::Nnn),
        _ => Err(format!("unknown model '{s}'")),
    }
}

fn parse_stats(s: &str) -> Result<Statistics, String> {
    match s.to_ascii_lowercase().as_str() {
        "fermion" | "fermions" => Ok(Statistics::Fermion),
        "boson" | "bosons" => Ok(Statistics::Boson),
        _ => Err(format!("unknown statistics '{s}'")),
    }
}

fn parse_energy(s: &str) -> Result<[f64; 2], String> {
    let v = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()?;
    match v[..] {
        [re, im] => Ok([re, im]),
        _ => Err("energy must be 're,im'".into()),
    }
}

#[derive(Parser, Debug)]
#[command(name = "nhrelax", version, about = "Relaxation of dissipative non-Hermitian chains")]
pub struct Cli {
    /// JSON run configuration; explicit flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<CliCommand>,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Eigenvalues of the effective Hamiltonian.
    Spectrum(Flags),
    /// P(m, j; t) curves by the selected routes.
    Propagator(Flags),
    /// Relaxation time of one site.
    Relax(Flags),
    /// Relaxation times along one parameter axis.
    Sweep(Flags),
    /// Steady-state occupations.
    Steady(Flags),
    /// Spectral terms of the propagator and their cancellation.
    Interference(Flags),
    /// Localization lengths from transfer-polynomial roots.
    Localization(Flags),
    /// Oracle, route and benchmark cross-checks.
    Verify(Flags),
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    #[arg(long, value_parser = parse_kind)]
    pub model: Option<ModelKind>,
    #[arg(long, value_parser = parse_stats)]
    pub stats: Option<Statistics>,
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long)]
    pub w: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "Gamma")]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long = "gamma-ssh")]
    pub gamma_ssh: Option<f64>,
    #[arg(long = "T")]
    pub t_nnn: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub init: Option<InitialKind>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub sustain_factor: Option<f64>,
    #[arg(long)]
    pub site: Option<usize>,
    #[arg(long)]
    pub source: Option<usize>,
    #[arg(long)]
    pub axis: Option<SweepAxis>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, value_parser = parse_value_list)]
    pub values: Option<ValueList>,
    #[arg(long)]
    pub plateau: bool,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
    #[arg(long = "route", value_delimiter = ',')]
    pub routes: Vec<Route>,
    /// `re,im`.
    #[arg(long, value_parser = parse_energy, allow_hyphen_values = true)]
    pub energy: Option<[f64; 2]>,
    #[arg(long)]
    pub trajectory: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub verify: bool,
}

impl CliCommand {
    fn split(self) -> (Command, Flags) {
        match self {
            Self::Spectrum(f) => (Command::Spectrum, f),
            Self::Propagator(f) => (Command::Propagator, f),
            Self::Relax(f) => (Command::Relax, f),
            Self::Sweep(f) => (Command::Sweep, f),
            Self::Steady(f) => (Command::Steady, f),
            Self::Interference(f) => (Command::Interference, f),
            Self::Localization(f) => (Command::Localization, f),
            Self::Verify(f) => (Command::Verify, f),
        }
    }
}

fn apply_flags(cfg: &mut RunConfig, f: Flags) {
    let m = &mut cfg.model;
    if let Some(k) = f.model {
        if k != m.kind {
            let base = match k {
                ModelKind::Hn => ModelSpec::hn(m.statistics, m.l, m.w, m.kappa, 0.0, m.gamma),
                ModelKind::Ssh => ModelSpec::ssh(m.statistics, m.l, m.w, m.kappa, 1.0, 0.0, m.gamma),
                ModelKind::Nnn => ModelSpec::nnn(m.statistics, m.l, m.w, m.kappa, 0.0, 0.0, m.gamma),
            };
            *m = base;
        }
    }
    macro_rules! set {
        ($src:expr, $dst:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    set!(f.stats, m.statistics);
    set!(f.l, m.l);
    set!(f.w, m.w);
    set!(f.kappa, m.kappa);
    set!(f.lambda, m.lambda_loss);
    set!(f.gamma, m.gamma);
    set!(f.u, m.u);
    set!(f.gamma_ssh, m.gamma_ssh);
    set!(f.t_nnn, m.t_nnn);
    set!(f.phi, m.phi);
    set!(f.init, cfg.init);
    set!(f.eta, cfg.eta);
    set!(f.sustain_factor, cfg.sustain_factor);
    set!(f.values.map(|v| v.0), cfg.values);
    set!(f.t_points, cfg.t_points);
    if f.site.is_some() {
        cfg.site = f.site;
    }
    if f.source.is_some() {
        cfg.source = f.source;
    }
    if f.axis.is_some() {
        cfg.axis = f.axis;
    }
    if f.t_end.is_some() {
        cfg.t_end = f.t_end;
    }
    if f.energy.is_some() {
        cfg.energy = f.energy;
    }
    if f.output.is_some() {
        cfg.output = f.output;
    }
    if f.workers.is_some() {
        cfg.workers = f.workers;
    }
    if !f.routes.is_empty() {
        cfg.routes = f.routes;
    }
    cfg.plateau |= f.plateau;
    cfg.trajectory |= f.trajectory;
    cfg.verify |= f.verify;
}

/// Builds the run configuration from parsed arguments and an optional JSON file.
pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let from_file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            Some(serde_json::from_str::<RunConfig>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let mut cfg = match (from_file, cli.command) {
        (None, None) => return Err(CliError::Config("no command given".into())),
        (Some(c), None) => c,
        (Some(mut c), Some(cmd)) => {
            let (command, flags) = cmd.split();
            c.command = command;
            apply_flags(&mut c, flags);
            c
        }
        (None, Some(cmd)) => {
            let (command, flags) = cmd.split();
            let mut c = RunConfig::new(command, default_model());
            apply_flags(&mut c, flags);
            c
        }
    };
    if cfg.workers.is_none() {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            let n = v.trim().parse::<usize>().map_err(|_| CliError::Config(format!("{WORKERS_ENV}='{v}' is not a count")))?;
            cfg.workers = Some(n);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Tables and summary produced by one command.
#[derive(Debug)]
pub struct Outcome {
    pub tables: Vec<(PathBuf, Table)>,
    pub summary: serde_json::Value,
    pub verify_failed: bool,
}

fn model_cells(s: &ModelSpec) -> [String; 3] {
    [s.kind.label().to_string(), s.statistics.label().to_string(), s.l.to_string()]
}

fn relax_config(cfg: &RunConfig) -> RelaxConfig {
    RelaxConfig {
        init: cfg.init,
        eta: cfg.eta,
        sustain_factor: cfg.sustain_factor,
        site: cfg.site,
        keep_curve: cfg.trajectory,
        ..RelaxConfig::default()
    }
}

fn relaxation_row(s: &ModelSpec, init: InitialKind, eta: f64, tau: f64, delta: f64, sustained: bool) -> Vec<String> {
    let [model, stat, l] = model_cells(s);
    vec![
        model,
        stat,
        l,
        fmt_real(s.w),
        fmt_real(s.kappa),
        fmt_real(s.lambda_loss),
        fmt_real(s.gamma),
        init.label().to_string(),
        fmt_real(eta),
        fmt_real(tau),
        fmt_real(tau * delta),
        sustained.to_string(),
    ]
}

fn scales_json(spec: &ModelSpec) -> serde_json::Value {
    match derived_scales(spec) {
        Ok(s) => serde_json::to_value(s).unwrap_or_default(),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.model;
    let eig = num(eigenvalues(&num(s.h_eff())?))?;
    let mut t = Table::new(SPECTRUM_COLUMNS);
    for (k, e) in eig.iter().enumerate() {
        let [model, stat, l] = model_cells(s);
        t.push(vec![model, stat, l, (k + 1).to_string(), fmt_real(e.re), fmt_real(e.im)]);
    }
    let summary = json!({ "gap": s.gap(), "scales": scales_json(s) });
    Ok(Outcome { tables: vec![(cfg.output_path(), t)], summary, verify_failed: false })
}

fn cmd_propagator(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.model;
    let n = s.sites();
    let m = cfg.site.unwrap_or(n);
    let j = cfg.source.unwrap_or(1);
    let d = m.abs_diff(j) as f64;
    let t_end = cfg.t_end.unwrap_or(4.0 * (d + 1.0) / s.gap());
    let grid: Vec<f64> = (0..cfg.t_points).map(|k| t_end * k as f64 / (cfg.t_points - 1) as f64).collect();
    let mut routes = if cfg.routes.is_empty() { vec![Route::Direct] } else { cfg.routes.clone() };
    routes.sort();
    routes.dedup();
    let h = num(s.h_eff())?;
    let direct: Vec<_> = num(propagate_direct(&h, j, &grid))?.into_iter().filter(|x| x.m == m).collect();
    let spectral = if routes.contains(&Route::Spectral) { Some(num(hn_spectral_analytic(s))?) } else { None };
    let mut t = Table::new(PROPAGATOR_COLUMNS);
    let mut skipped = serde_json::Map::new();
    let mut max_dev = serde_json::Map::new();
    for &route in &routes {
        let mut count = 0usize;
        let mut dev = 0.0f64;
        for (k, &time) in grid.iter().enumerate() {
            let sample = match route {
                Route::Direct => Ok(direct[k]),
                Route::Spectral => propagate_spectral(spectral.as_ref().expect("built above"), m, j, time),
                Route::NoBounce if m == s.l => p_no_bounce(s, j, time),
                Route::Simplified if m == s.l => p_simplified(s, j, time),
                Route::BounceSum => g_obc_bounce(m, j, time, s, 0).map(|b| b.value),
                Route::NoBounce | Route::Simplified => {
                    return Err(CliError::Config(format!("route {} needs the observed site to be L", route.label())))
                }
            };
            match sample {
                Ok(smp) => {
                    if time > 0.0 {
                        dev = dev.max((smp.log_p() - direct[k].log_p()).abs());
                    }
                    let [model, stat, l] = model_cells(s);
                    t.push(vec![model, stat, l, j.to_string(), m.to_string(), fmt_real(time), fmt_real(smp.log_p()), route.label().into()]);
                }
                Err(crate::propagator::PropagatorError::CancellationGuard(_)) => count += 1,
                Err(e) => return Err(CliError::Numerical(e.into())),
            }
        }
        skipped.insert(route.label().into(), count.into());
        if cfg.verify {
            max_dev.insert(route.label().into(), dev.into());
        }
    }
    let summary = json!({ "m": m, "j": j, "t_end": t_end, "skipped_by_guard": skipped, "max_abs_dlogP_vs_direct": max_dev });
    Ok(Outcome { tables: vec![(cfg.output_path(), t)], summary, verify_failed: false })
}

fn cmd_relax(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.model;
    let run = num(relax(s, &relax_config(cfg)))?;
    let mut t = Table::new(RELAXATION_COLUMNS);
    t.push(relaxation_row(s, cfg.init, cfg.eta, run.result.tau, run.delta, run.result.sustained));
    let path = cfg.output_path();
    let mut tables = vec![(path.clone(), t)];
    if let Some(curve) = &run.curve {
        let mut tr = Table::new(TRAJECTORY_COLUMNS);
        for &(time, n, dn) in curve {
            tr.push(vec![fmt_real(time), run.site.to_string(), fmt_real(n), fmt_real(dn)]);
        }
        tables.push((companion_path(&path, "trajectory"), tr));
    }
    let mut summary = json!({
        "site": run.site,
        "steady_occupation": run.steady_occupation,
        "delta": run.delta,
        "result": run.result,
        "warnings": run.warnings,
        "evec": evec_prediction(s, LengthConvention::Cells).ok(),
    });
    if cfg.verify {
        let syl = num(solve_steady_sylvester(&num(s.h_eff())?, 2.0 * s.gamma))?;
        let exact = syl[(run.site - 1, run.site - 1)].re;
        summary["steady_cross_check"] = json!({ "sylvester": exact, "relative": (exact - run.steady_occupation).abs() / exact });
    }
    Ok(Outcome { tables, summary, verify_failed: false })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.model;
    let axis = cfg.axis.expect("validated");
    let mut t = Table::new(RELAXATION_COLUMNS);
    let summary = if cfg.plateau {
        let rep = num(saturation_study(&cfg.values, s, cfg.eta, true))?;
        for p in &rep.points {
            let spec = SweepAxis::Gamma.apply(s, p.gamma).map_err(|e| CliError::Numerical(e.into()))?.with_l(p.plateau_l);
            let delta = spec.gap();
            t.push(relaxation_row(&spec, cfg.init, cfg.eta, p.tau_sat_times_delta / delta, delta, true));
        }
        t.rows.sort_by(|a, b| a[6].parse::<f64>().unwrap_or(0.0).total_cmp(&b[6].parse::<f64>().unwrap_or(0.0)));
        json!({ "saturation": rep })
    } else {
        let res = num(run_sweep(s, axis, &cfg.values, &relax_config(cfg), true))?;
        for p in &res.points {
            t.push(relaxation_row(&p.spec, cfg.init, cfg.eta, p.tau, p.run.delta, p.run.result.sustained));
        }
        let evec: Vec<_> = res.points.iter().map(|p| evec_prediction(&p.spec, LengthConvention::Cells).ok()).collect();
        json!({ "axis": axis.label(), "fit": scaling_fit(&res, 1.0).ok(), "evec": evec })
    };
    Ok(Outcome { tables: vec![(cfg.output_path(), t)], summary, verify_failed: false })
}

fn cmd_steady(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.model;
    let diag = num(steady_diagonal_quadrature(s))?;
    let mut t = Table::new(STEADY_COLUMNS);
    for (k, v) in diag.iter().enumerate() {
        let [model, stat, l] = model_cells(s);
        t.push(vec![model, stat, l, (k + 1).to_string(), fmt_real(*v)]);
    }
    let mut summary = json!({ "mean": diag.iter().sum::<f64>() / diag.len() as f64 });
    if cfg.verify {
        let syl = num(solve_steady_sylvester(&num(s.h_eff())?, 2.0 * s.gamma))?;
        let worst = diag.iter().enumerate().map(|(k, v)| (v - syl[(k, k)].re).abs() / syl[(k, k)].re.abs()).fold(0.0, f64::max);
        summary["sylvester_max_relative"] = worst.into();
    }
    Ok(Outcome { tables: vec![(cfg.output_path(), t)], summary, verify_failed: false })
}

fn cmd_interference(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.model;
    let m = cfg.site.unwrap_or(s.l);
    let j = cfg.source.unwrap_or(1);
    let time = cfg.t_end.unwrap_or(m.abs_diff(j) as f64 / s.gap());
    let dump = num(interference_terms(s, m, j, time))?;
    let mut t = Table::new(INTERFERENCE_COLUMNS);
    for (k, (e, term)) in dump.eigenvalues.iter().zip(&dump.terms).enumerate() {
        let [model, stat, l] = model_cells(s);
        t.push(vec![
            model,
            stat,
            l,
            m.to_string(),
            j.to_string(),
            fmt_real(time),
            (k + 1).to_string(),
            fmt_real(e.re),
            fmt_real(e.im),
            fmt_real(term.log10_mag()),
            fmt_real(term.phase),
        ]);
    }
    let summary = json!({
        "max_term_log10": dump.max_term_log10,
        "naive_sum_log10": dump.naive_sum_log10,
        "stable_log10": dump.stable_log10,
        "abs_sum_log10": dump.abs_sum_log10,
        "cancellation_decades": dump.cancellation_decades(),
    });
    Ok(Outcome { tables: vec![(cfg.output_path(), t)], summary, verify_failed: false })
}

fn cmd_localization(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.model;
    let energies: Vec<C64> = match cfg.energy {
        Some([re, im]) => vec![C64::new(re, im)],
        None => num(eigenvalues(&num(s.h_eff())?))?,
    };
    let mut t = Table::new(LOCALIZATION_COLUMNS);
    for e in energies {
        let r = num(localization_extract(s, e))?;
        let [model, stat, l] = model_cells(s);
        t.push(vec![model, stat, l, fmt_real(e.re), fmt_real(e.im), fmt_real(r.xi_extracted), fmt_real(r.xi_gbz), fmt_real(r.max_relative_residual)]);
    }
    Ok(Outcome { tables: vec![(cfg.output_path(), t)], summary: json!({ "scales": scales_json(s) }), verify_failed: false })
}

fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rep = verify::run_suite();
    let mut t = Table::new(VERIFY_COLUMNS);
    for c in &rep.checks {
        t.push(vec![c.name.clone(), fmt_real(c.value), fmt_real(c.tolerance), c.passed.to_string()]);
    }
    let failed = !rep.passed();
    Ok(Outcome { tables: vec![(cfg.output_path(), t)], summary: serde_json::to_value(&rep).unwrap_or_default(), verify_failed: failed })
}

/// Runs one command without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let work = || match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Propagator => cmd_propagator(cfg),
        Command::Relax => cmd_relax(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Steady => cmd_steady(cfg),
        Command::Interference => cmd_interference(cfg),
        Command::Localization => cmd_localization(cfg),
        Command::Verify => cmd_verify(cfg),
    };
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(work),
        None => work(),
    }
}

fn sidecar(cfg: &RunConfig, table: Option<&Table>, wall: f64, error: Option<ErrorInfo>, summary: serde_json::Value) -> Sidecar {
    Sidecar {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        status: if error.is_some() { "error" } else { "ok" },
        config: serde_json::to_value(cfg).unwrap_or_default(),
        columns: table.map(|t| t.columns.to_vec()).unwrap_or_default(),
        rows: table.map_or(0, |t| t.rows.len()),
        wall_time_s: wall,
        error,
        summary,
    }
}

/// Executes a validated configuration, writes artifacts and returns the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let start = Instant::now();
    let primary = cfg.output_path();
    match execute(cfg) {
        Ok(out) => {
            let wall = start.elapsed().as_secs_f64();
            for (path, table) in &out.tables {
                let written = table.write(path).and_then(|_| sidecar(cfg, Some(table), wall, None, out.summary.clone()).write(&sidecar_path(path)));
                if let Err(e) = written {
                    eprintln!("nhrelax: cannot write {}: {e}", path.display());
                    return 1;
                }
            }
            if out.verify_failed {
                eprintln!("nhrelax: verification failed; see {}", sidecar_path(&primary).display());
                3
            } else {
                0
            }
        }
        Err(err) => {
            eprintln!("nhrelax: {err}");
            if let CliError::Numerical(e) = &err {
                let info = ErrorInfo { name: e.name().to_string(), message: e.to_string() };
                let wall = start.elapsed().as_secs_f64();
                if let Err(w) = sidecar(cfg, None, wall, Some(info), serde_json::Value::Null).write(&sidecar_path(&primary)) {
                    eprintln!("nhrelax: cannot write sidecar: {w}");
                }
            }
            err.exit_code()
        }
    }
}

/// Parses arguments, resolves the configuration and runs it.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match resolve(cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("nhrelax: {e}");
            e.exit_code()
        }
    }
}

/// Reads a JSON configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_ranges() {
        assert_eq!(parse_values("20:180:20").unwrap().len(), 9);
        assert_eq!(parse_values("0.9,0.99,0.999").unwrap(), vec![0.9, 0.99, 0.999]);
        assert!(parse_values("5:1:1").is_err());
        let v = parse_values("0.1:0.3:0.1").unwrap();
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn flags_build_config() {
        let cli = Cli::try_parse_from([
            "nhrelax", "relax", "--model", "hn", "--stats", "boson", "--w", "1", "--kappa", "0.999", "--Gamma", "0.2", "--L", "100",
        ])
        .unwrap();
        let cfg = resolve(cli).unwrap();
        assert_eq!(cfg.command, Command::Relax);
        assert_eq!(cfg.model, ModelSpec::hn(Statistics::Boson, 100, 1.0, 0.999, 0.0, 0.2));
    }

    #[test]
    fn config_errors() {
        let cli = Cli::try_parse_from(["nhrelax", "sweep", "--L", "20"]).unwrap();
        assert_eq!(resolve(cli).unwrap_err().exit_code(), 1);
        let cli = Cli::try_parse_from(["nhrelax", "relax", "--stats", "boson", "--kappa", "0", "--Gamma", "0.5"]).unwrap();
        assert_eq!(resolve(cli).unwrap_err().exit_code(), 1);
        let cli = Cli::try_parse_from(["nhrelax", "sweep", "--axis", "kappa", "--values", "0.5,1.5"]).unwrap();
        assert_eq!(resolve(cli).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = RunConfig::new(Command::Sweep, ModelSpec::hn(Statistics::Fermion, 40, 1.0, 0.9, 0.0, 0.1));
        cfg.axis = Some(SweepAxis::L);
        cfg.values = vec![20.0, 40.0];
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
        assert!(serde_json::from_str::<RunConfig>(r#"{"command":"relax","bogus":1}"#).is_err());
    }
}
