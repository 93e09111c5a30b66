use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use kdvgeo_core::integrators::Stepper;
use kdvgeo_core::kdv::default_initial_nodes;
use kdvgeo_core::spectral::synthesize;
use kdvgeo_core::{KdvModel, SpectralField64, StepDiagnostics64};
use log::{debug, info};

use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::output::{self, sci};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    /// Mass, momentum, energy.
    pub max_drift: [f64; 3],
    pub total_fp_iters: usize,
    pub wall_time: Duration,
}

/// State sampled on the `8N`-node plotting grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl Snapshot {
    pub fn file_name(&self) -> String {
        format!("snapshot_{}.csv", self.t)
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub series: Vec<StepDiagnostics64>,
    pub summary: RunSummary,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SpectralField64,
    pub config_echo: String,
    pub version: &'static str,
}

impl RunReport {
    pub fn invariants_csv(&self) -> String {
        output::invariants_csv(&self.series)
    }

    pub fn report_text(&self, config: &RunConfig) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let _ = writeln!(out, "kdvgeo {}", self.version);
        let _ = writeln!(out, "scheme = {}", config.scheme);
        let _ = writeln!(out, "tableau = {}", config.tableau);
        let kinds: Vec<_> = config.invariants.iter().map(|k| k.name()).collect();
        let _ = writeln!(out, "invariants = {}", kinds.join(", "));
        let _ = writeln!(out, "steps = {}", s.steps);
        let _ = writeln!(out, "t_end = {}", config.problem.t_end);
        let _ = writeln!(out, "max_rel_drift_mass = {}", sci(s.max_drift[0]));
        let _ = writeln!(out, "max_rel_drift_momentum = {}", sci(s.max_drift[1]));
        let _ = writeln!(out, "max_rel_drift_energy = {}", sci(s.max_drift[2]));
        let _ = writeln!(out, "total_fp_iters = {}", s.total_fp_iters);
        let _ = writeln!(out, "boundary_mismatch = {}", sci(config.problem.boundary_mismatch()));
        let _ = writeln!(out, "wall_time_s = {:.3}", s.wall_time.as_secs_f64());
        out
    }

    /// Writes `invariants.csv`, the snapshots, `report.txt` and `config.resolved` into `dir`.
    pub fn write(&self, config: &RunConfig, dir: &Path) -> Result<(), HarnessError> {
        output::ensure_dir(dir)?;
        output::write(dir, "config.resolved", &self.config_echo)?;
        output::write(dir, "invariants.csv", &self.invariants_csv())?;
        for snap in &self.snapshots {
            output::write(dir, &snap.file_name(), &output::xy_csv(output::SNAPSHOT_HEADER, &snap.x, &snap.u))?;
        }
        output::write(dir, "report.txt", &self.report_text(config))
    }
}

/// Integrates `config`, handing every state and record (the initial one included) to `observer`.
pub fn simulate_with(
    config: &RunConfig,
    mut observer: impl FnMut(&SpectralField64, &StepDiagnostics64),
) -> Result<RunReport, HarnessError> {
    config.validate()?;
    let basis = config.basis()?;
    let model = KdvModel::with_nodes(config.problem.params, basis, config.nodes()?)
        .map_err(|e| HarnessError::config(e.to_string()))?;
    let tableau = config.tableau()?;
    let u0 = config.problem.initial_field().map_err(|e| HarnessError::config(e.to_string()))?;
    let stepper = Stepper {
        scheme: config.scheme,
        tableau: &tableau,
        model: &model,
        kinds: &config.invariants,
        settings: config.solver,
    };
    let steps = config.step_count()?;
    let snap_steps = config.snapshot_steps();
    let snap_nodes = default_initial_nodes(&basis);
    info!("{} with {} for {steps} steps of {}", config.scheme, config.tableau, config.problem.step);

    let start = Instant::now();
    let mut series = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let final_state = stepper.integrate_with(&u0, config.problem.step, config.problem.t_end, |u, d| {
        debug!(
            "step {} t={} drift mass={:e} momentum={:e} energy={:e} fp_iters={} rank={}",
            d.step, d.t, d.drift_mass, d.drift_momentum, d.drift_energy, d.fp_iters, d.rank
        );
        for &(k, t) in &snap_steps {
            if k == d.step {
                let g = synthesize(u, snap_nodes).expect("8N nodes exceed the alias-free minimum");
                snapshots.push(Snapshot { t, x: g.positions(), u: g.values().to_vec() });
            }
        }
        series.push(*d);
        observer(u, d);
    })?;
    let wall_time = start.elapsed();

    let mut max_drift = [0.0f64; 3];
    for d in &series {
        for (m, v) in max_drift.iter_mut().zip(d.drifts()) {
            *m = m.max(v);
        }
    }
    let total_fp_iters = series.iter().map(|d| d.fp_iters).sum();
    info!("done in {:.2}s, max drifts {max_drift:?}", wall_time.as_secs_f64());
    Ok(RunReport {
        series,
        summary: RunSummary { steps, max_drift, total_fp_iters, wall_time },
        snapshots,
        final_state,
        config_echo: config.resolved(),
        version: VERSION,
    })
}

pub fn simulate(config: &RunConfig) -> Result<RunReport, HarnessError> {
    simulate_with(config, |_, _| {})
}

/// Runs `config` and writes its outputs into `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunReport, HarnessError> {
    let report = simulate(config)?;
    report.write(config, out)?;
    Ok(report)
}
