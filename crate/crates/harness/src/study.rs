use std::fmt::Write as _;
use std::path::Path;
use std::thread;

use kdvgeo_core::SpectralField64;
use log::info;

use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::output::{self, sci};
use crate::run::simulate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    /// Coefficient-space Euclidean norm of the difference to the reference solution.
    pub error: f64,
    /// `ln(e_prev / e) / ln(h_prev / h)`; `None` on the first row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub reference_h: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(output::CONVERGENCE_HEADER);
        s.push('\n');
        for r in &self.rows {
            let order = r.order.map(sci).unwrap_or_default();
            let _ = writeln!(s, "{},{},{order}", sci(r.h), sci(r.error));
        }
        s
    }
}

fn with_step(base: &RunConfig, h: f64) -> Result<RunConfig, HarnessError> {
    let mut cfg = base.clone();
    cfg.problem.step = h;
    cfg.snapshots.clear();
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `base` at every step size in `steps` and at `reference_h`, concurrently,
/// and tabulates the final-time error of each against the reference run.
pub fn convergence_study(
    base: &RunConfig,
    steps: &[f64],
    reference_h: f64,
) -> Result<ConvergenceTable, HarnessError> {
    if steps.is_empty() {
        return Err(HarnessError::config("convergence study needs at least one step size"));
    }
    let h_min = steps.iter().copied().fold(f64::INFINITY, f64::min);
    if !(reference_h > 0.0 && reference_h < h_min / 5.0) {
        return Err(HarnessError::config(format!(
            "reference step {reference_h} must be positive and below min(steps) / 5 = {}",
            h_min / 5.0
        )));
    }
    let mut configs = Vec::with_capacity(steps.len() + 1);
    configs.push(with_step(base, reference_h)?);
    for &h in steps {
        configs.push(with_step(base, h)?);
    }

    let results: Vec<Result<SpectralField64, HarnessError>> = thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(move || simulate(cfg).map(|r| r.final_state)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });

    let mut finals = Vec::with_capacity(results.len());
    for (cfg, res) in configs.iter().zip(results) {
        let u = res.map_err(|source| HarnessError::StudyAbort {
            h: cfg.problem.step,
            source: Box::new(source),
        })?;
        finals.push(u);
    }
    let reference = &finals[0];
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(steps.len());
    for (&h, u) in steps.iter().zip(&finals[1..]) {
        let error = u.sub(reference).norm();
        let order = rows.last().map(|prev: &ConvergenceRow| (prev.error / error).ln() / (prev.h / h).ln());
        info!("h = {h}: error {error:e}, order {order:?}");
        rows.push(ConvergenceRow { h, error, order });
    }
    Ok(ConvergenceTable { reference_h, rows })
}

/// Runs the study and writes `convergence.csv` and `config.resolved` into `out`.
pub fn run_convergence_study(
    base: &RunConfig,
    steps: &[f64],
    reference_h: f64,
    out: &Path,
) -> Result<ConvergenceTable, HarnessError> {
    let table = convergence_study(base, steps, reference_h)?;
    output::ensure_dir(out)?;
    let mut echo = base.resolved();
    let list: Vec<String> = steps.iter().map(|h| format!("{h:?}")).collect();
    let _ = writeln!(echo, "# study.steps = {}", list.join(", "));
    let _ = writeln!(echo, "# study.reference_h = {reference_h:?}");
    output::write(out, "config.resolved", &echo)?;
    output::write(out, "convergence.csv", &table.to_csv())?;
    Ok(table)
}
