//! Batch runner: resolves a scenario, propagates every requested method and
//! writes trajectory CSVs, distance CSVs and `summary.json`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 propagation divergence,
//! 4 a requested check failed.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::dynamics::{
    default_dt_fs, positivity_monitor, propagate, trace_distance_series, Integrator, TimeGrid, Trajectory,
};
use crate::error::Error;
use crate::generators::{build, gkls_certificate, Generator, GeneratorKind};
use crate::heom::{build_hierarchy, convergence_table, propagate_heom, ConvergenceTable};
use crate::scenarios::{
    parse_scenario, resolve, BoltzmannConstant, Energy, HeomSpec, Method, ReferenceSpec, Scenario, ScenarioSpec, Time,
};
use crate::spectral::ValidityReport;
use crate::thermo::thermo_report;

pub const OUT_ENV: &str = "UNIFIED_QME_OUT";

/// Times at which the covariance residual is reported, in fs.
pub const COVARIANCE_TIMES_FS: [f64; 3] = [10.0, 100.0, 1000.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Gkls,
    Stationarity,
    Covariance,
    Entropy,
    Positivity,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "unified-qme", version, about = "Propagate open-system master equations for a scenario")]
pub struct RunConfig {
    /// Built-in scenario name (paper-fig2, paper-fig3, paper-fig3-full) or a TOML file.
    #[arg(long)]
    pub scenario: String,
    /// Comma-separated methods (redfield, davies, unified, unified_simplified,
    /// nonsecular_davies, heom); defaults to the scenario's list.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub methods: Option<Vec<Method>>,
    /// Output directory for CSV files and summary.json.
    #[arg(long, env = OUT_ENV, default_value = "unified-qme-out")]
    pub out: PathBuf,
    /// Boltzmann constant in cm^-1/K.
    #[arg(long = "kB")]
    pub k_b: Option<f64>,
    /// HEOM truncation depth.
    #[arg(long)]
    pub heom_depth: Option<usize>,
    /// Output time step in fs; defaults to a step resolving the fastest generator.
    #[arg(long)]
    pub dt_fs: Option<f64>,
    /// End time in fs.
    #[arg(long)]
    pub t_max_fs: Option<f64>,
    /// Replaces the reference split by level clustering at this tolerance (cm^-1).
    #[arg(long)]
    pub level_tolerance: Option<f64>,
    /// Use KMS-exact rates for every bath.
    #[arg(long)]
    pub exact_kms: bool,
    /// Comma-separated property checks to run and report.
    #[arg(long, value_delimiter = ',')]
    pub checks: Vec<Check>,
    /// Tolerance for the checks (absolute, in the units of each check).
    #[arg(long, default_value_t = 1e-8)]
    pub check_tol: f64,
}

impl RunConfig {
    pub fn new(scenario: impl Into<String>, out: impl Into<PathBuf>) -> Self {
        Self {
            scenario: scenario.into(),
            methods: None,
            out: out.into(),
            k_b: None,
            heom_depth: None,
            dt_fs: None,
            t_max_fs: None,
            level_tolerance: None,
            exact_kms: false,
            checks: Vec::new(),
            check_tol: 1e-8,
        }
    }
}

#[derive(Debug)]
pub enum RunFailure {
    Config(String),
    Diverged(String),
    ChecksFailed(Vec<String>),
}

impl RunFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunFailure::Config(_) => 2,
            RunFailure::Diverged(_) => 3,
            RunFailure::ChecksFailed(_) => 4,
        }
    }
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunFailure::Config(m) => write!(f, "configuration error: {m}"),
            RunFailure::Diverged(m) => f.write_str(m),
            RunFailure::ChecksFailed(v) => write!(f, "checks failed:\n  {}", v.join("\n  ")),
        }
    }
}

impl From<Error> for RunFailure {
    fn from(e: Error) -> Self {
        match e {
            Error::PropagationDiverged { .. } => RunFailure::Diverged(e.to_string()),
            other => RunFailure::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridEcho {
    pub t0_fs: f64,
    pub dt_fs: f64,
    pub steps: usize,
    pub t_end_fs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermoSummary {
    pub stationarity_residual: Option<f64>,
    pub covariance_residuals: Vec<(f64, f64)>,
    pub min_entropy_production: f64,
    pub flagged_samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub csv: String,
    pub gkls_certificate_min: Option<f64>,
    pub min_eigenvalue: f64,
    pub max_trace_drift: f64,
    pub max_distance_to_reference: Option<f64>,
    pub thermo: Option<ThermoSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: ScenarioSpec,
    pub grid: GridEcho,
    pub integrator: &'static str,
    pub reference_method: Method,
    pub methods: Vec<MethodSummary>,
    pub validity: ValidityReport,
    pub convergence: Option<ConvergenceTable>,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub method: Method,
    pub value: f64,
    pub passed: bool,
}

/// Applies command-line overrides to a scenario.
pub fn apply_overrides(mut spec: ScenarioSpec, cfg: &RunConfig) -> std::result::Result<ScenarioSpec, RunFailure> {
    if let Some(m) = &cfg.methods {
        spec.methods = m.clone();
    }
    if let Some(kb) = cfg.k_b {
        spec.boltzmann = BoltzmannConstant(kb);
    }
    if let Some(l) = cfg.heom_depth {
        spec.heom = HeomSpec { depth: l };
    }
    if let Some(dt) = cfg.dt_fs {
        spec.grid.dt = Some(Time(dt));
    }
    if let Some(t) = cfg.t_max_fs {
        spec.grid.t_max = Time(t);
    }
    if let Some(tol) = cfg.level_tolerance {
        spec.reference = ReferenceSpec { level_tolerance: Some(Energy(tol)), h0: None };
    }
    if cfg.exact_kms {
        spec = spec.with_exact_kms();
    }
    if spec.methods.is_empty() {
        return Err(RunFailure::Config("at least one method is required".into()));
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = spec.methods.iter().find(|m| !seen.insert(**m)) {
        return Err(RunFailure::Config(format!("method '{dup}' listed twice")));
    }
    Ok(spec)
}

enum Outcome {
    Generator(Box<Generator>, Trajectory),
    Heom(Trajectory),
}

impl Outcome {
    fn trajectory(&self) -> &Trajectory {
        match self {
            Outcome::Generator(_, t) | Outcome::Heom(t) => t,
        }
    }
}

fn run_method(s: &Scenario, method: Method, grid: TimeGrid) -> crate::Result<Outcome> {
    match method.generator_kind() {
        Some(kind) => {
            let g = build(kind, &s.split, &s.couplings, &s.baths)?;
            let traj = propagate(&g, &s.rho0, grid, Integrator::ExpmStep)?;
            Ok(Outcome::Generator(Box::new(g), traj))
        }
        None => heom_trajectory(s, s.spec.heom.depth, grid).map(Outcome::Heom),
    }
}

fn heom_trajectory(s: &Scenario, depth: usize, grid: TimeGrid) -> crate::Result<Trajectory> {
    let h = build_hierarchy(&s.hamiltonian, &s.couplings, &s.baths, depth)?;
    propagate_heom(&h, &s.rho0, grid)
}

/// Grid step: the scenario's `dt` if given, else the smallest default over the
/// requested generators (or the unified generator when only HEOM is requested).
fn choose_grid(s: &Scenario) -> crate::Result<TimeGrid> {
    let dt = match s.spec.grid.dt {
        Some(dt) => dt.0,
        None => {
            let mut kinds: Vec<GeneratorKind> = s.spec.methods.iter().filter_map(|m| m.generator_kind()).collect();
            if kinds.is_empty() {
                kinds.push(GeneratorKind::Unified);
            }
            let mut dt = f64::INFINITY;
            for k in kinds {
                dt = dt.min(default_dt_fs(&build(k, &s.split, &s.couplings, &s.baths)?));
            }
            dt
        }
    };
    TimeGrid::covering(s.spec.grid.t_max.0, dt)
}

fn csv_err(e: csv::Error) -> RunFailure {
    RunFailure::Config(format!("cannot write CSV: {e}"))
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> std::result::Result<(), RunFailure> {
    let n = traj.states.first().map_or(0, |s| s.dim());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["t_fs".to_string()];
    for part in ["re", "im"] {
        for i in 0..n {
            for j in 0..n {
                header.push(format!("rho_{part}_{i}_{j}"));
            }
        }
    }
    header.extend(["min_eig".to_string(), "trace".to_string()]);
    w.write_record(&header).map_err(csv_err)?;
    for (t, s) in traj.times().iter().zip(&traj.states) {
        let m = s.matrix();
        let mut row = vec![t.to_string()];
        row.extend((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].re.to_string()));
        row.extend((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].im.to_string()));
        row.push(s.min_eigenvalue().to_string());
        row.push(s.trace().to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| RunFailure::Config(e.to_string()))
}

fn write_columns(path: &Path, header: &[String], columns: &[Vec<f64>]) -> std::result::Result<(), RunFailure> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    let rows = columns.first().map_or(0, Vec::len);
    for r in 0..rows {
        w.write_record(columns.iter().map(|c| c[r].to_string())).map_err(csv_err)?;
    }
    w.flush().map_err(|e| RunFailure::Config(e.to_string()))
}

/// Runs a configuration, writing all outputs to `cfg.out`.
pub fn execute(cfg: &RunConfig) -> std::result::Result<RunSummary, RunFailure> {
    let spec = parse_scenario(&cfg.scenario).map_err(|e| RunFailure::Config(e.to_string()))?;
    let spec = apply_overrides(spec, cfg)?;
    let s = resolve(&spec).map_err(|e| RunFailure::Config(e.to_string()))?;
    let grid = choose_grid(&s).map_err(|e| RunFailure::Config(e.to_string()))?;
    fs::create_dir_all(&cfg.out)
        .map_err(|e| RunFailure::Config(format!("cannot create {}: {e}", cfg.out.display())))?;

    let has_heom = spec.methods.contains(&Method::Heom);
    let (outcomes, extra) = std::thread::scope(|scope| {
        let handles: Vec<_> = spec
            .methods
            .iter()
            .map(|&m| {
                scope.spawn({
                    let s = &s;
                    move || run_method(s, m, grid)
                })
            })
            .collect();
        let extra = has_heom.then(|| scope.spawn(|| heom_trajectory(&s, s.spec.heom.depth + 2, grid)));
        let outcomes: Vec<crate::Result<Outcome>> =
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect();
        (outcomes, extra.map(|h| h.join().expect("worker panicked")))
    });
    let outcomes = outcomes.into_iter().collect::<crate::Result<Vec<_>>>()?;

    let reference_index = spec.methods.iter().position(|&m| m == Method::Heom).unwrap_or(0);
    let reference_method = spec.methods[reference_index];
    let reference = outcomes[reference_index].trajectory();

    let mut summaries = Vec::new();
    let mut checks = Vec::new();
    let mut dist_header = vec!["t_fs".to_string()];
    let mut dist_columns = vec![grid.times()];
    for (&method, outcome) in spec.methods.iter().zip(&outcomes) {
        let traj = outcome.trajectory();
        let file = format!("{}.csv", method.name());
        write_trajectory_csv(&cfg.out.join(&file), traj)?;
        let min_eigenvalue = positivity_monitor(traj).into_iter().fold(f64::INFINITY, f64::min);
        let distance = if method == reference_method {
            None
        } else {
            let d = trace_distance_series(traj, reference)?;
            let worst = d.iter().copied().fold(0.0, f64::max);
            dist_header.push(method.name().to_string());
            dist_columns.push(d);
            Some(worst)
        };
        let (cert, thermo) = match outcome {
            Outcome::Generator(g, traj) => {
                let cert = gkls_certificate(g).min_eigenvalue();
                let report = thermo_report(g, traj, &COVARIANCE_TIMES_FS)?;
                let ep = &report.entropy_production;
                let mut header = vec!["t_fs".to_string(), "sigma".to_string(), "entropy_rate".to_string()];
                header.extend(g.baths.iter().map(|b| format!("heat_{}", b.label)));
                let mut cols = vec![ep.times_fs.clone(), ep.sigma.clone(), ep.entropy_rate.clone()];
                cols.extend(ep.heat_currents.iter().cloned());
                write_columns(&cfg.out.join(format!("entropy_{}.csv", method.name())), &header, &cols)?;
                let summary = ThermoSummary {
                    stationarity_residual: report.stationarity_residual,
                    covariance_residuals: report.covariance_residuals.clone(),
                    min_entropy_production: ep.min_sigma(),
                    flagged_samples: ep.flagged.len(),
                };
                (Some(cert), Some(summary))
            }
            Outcome::Heom(_) => (None, None),
        };
        let kind = method.generator_kind();
        let gkls = kind.is_some_and(GeneratorKind::is_gkls);
        let covariant =
            matches!(kind, Some(GeneratorKind::Davies | GeneratorKind::Unified | GeneratorKind::UnifiedSimplified));
        for &check in &cfg.checks {
            let value = match (check, &thermo) {
                (Check::Gkls, _) if gkls => cert,
                (Check::Stationarity, Some(t)) if gkls => t.stationarity_residual,
                (Check::Covariance, Some(t)) if covariant => {
                    Some(t.covariance_residuals.iter().map(|r| r.1).fold(0.0, f64::max))
                }
                (Check::Entropy, Some(t)) if gkls => Some(t.min_entropy_production),
                (Check::Positivity, _) => Some(min_eigenvalue),
                _ => None,
            };
            if let Some(value) = value {
                let passed = match check {
                    Check::Gkls | Check::Entropy | Check::Positivity => value >= -cfg.check_tol,
                    Check::Stationarity | Check::Covariance => value <= cfg.check_tol,
                };
                checks.push(CheckOutcome { check, method, value, passed });
            }
        }
        summaries.push(MethodSummary {
            method,
            csv: file,
            gkls_certificate_min: cert,
            min_eigenvalue,
            max_trace_drift: traj.max_trace_drift(),
            max_distance_to_reference: distance,
            thermo,
        });
    }
    if dist_columns.len() > 1 {
        write_columns(
            &cfg.out.join(format!("distance_to_{}.csv", reference_method.name())),
            &dist_header,
            &dist_columns,
        )?;
    }

    let convergence = match extra {
        Some(deeper) => {
            let deeper = deeper?;
            let d = spec.heom.depth;
            Some(convergence_table(&[d, d + 2], &[reference.clone(), deeper])?)
        }
        None => None,
    };

    let summary = RunSummary {
        scenario: spec.clone(),
        grid: GridEcho { t0_fs: grid.t0_fs, dt_fs: grid.dt_fs, steps: grid.steps, t_end_fs: grid.t_end() },
        integrator: "expm_step (generators), rk4 (heom)",
        reference_method,
        methods: summaries,
        validity: s.validity.clone(),
        convergence,
        warnings: s.warnings.clone(),
        checks,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| RunFailure::Config(e.to_string()))?;
    fs::write(cfg.out.join("summary.json"), json + "\n")
        .map_err(|e| RunFailure::Config(format!("cannot write summary.json: {e}")))?;

    let failed: Vec<String> = summary
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{:?} on {}: {:.3e}", c.check, c.method, c.value))
        .collect();
    if failed.is_empty() {
        Ok(summary)
    } else {
        Err(RunFailure::ChecksFailed(failed))
    }
}

/// Runs a configuration and returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
