use std::fmt::Write as _;
use std::path::Path;
use std::thread;

use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::output::{self, sci};
use crate::run::{simulate, RunReport};

#[derive(Debug, Clone)]
pub struct ComparisonEntry {
    pub label: String,
    pub config: RunConfig,
    pub report: RunReport,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonReport {
    pub fn entry(&self, label: &str) -> Option<&ComparisonEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    /// Drift series of all runs, interleaved by step.
    pub fn drift_csv(&self) -> String {
        let mut s = String::from(output::COMPARE_DRIFT_HEADER);
        s.push('\n');
        let len = self.entries.first().map_or(0, |e| e.report.series.len());
        for k in 0..len {
            for e in &self.entries {
                let d = &e.report.series[k];
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    e.label,
                    sci(d.t),
                    sci(d.drift_mass),
                    sci(d.drift_momentum),
                    sci(d.drift_energy)
                );
            }
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from(output::COMPARE_SUMMARY_HEADER);
        s.push('\n');
        for e in &self.entries {
            let m = &e.report.summary;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                e.label,
                e.config.scheme,
                e.config.tableau,
                m.steps,
                sci(m.max_drift[0]),
                sci(m.max_drift[1]),
                sci(m.max_drift[2]),
                m.total_fp_iters
            );
        }
        s
    }

    /// Writes the two comparison tables, a combined `config.resolved`, and each
    /// member's full run output into `out/<label>/`.
    pub fn write(&self, out: &Path) -> Result<(), HarnessError> {
        output::ensure_dir(out)?;
        let mut echo = String::new();
        for e in &self.entries {
            let _ = writeln!(echo, "# [{}]", e.label);
            echo.push_str(&e.config.resolved());
            e.report.write(&e.config, &out.join(&e.label))?;
        }
        output::write(out, "config.resolved", &echo)?;
        output::write(out, "compare_drift.csv", &self.drift_csv())?;
        output::write(out, "compare_summary.csv", &self.summary_csv())
    }
}

/// Makes labels unique and filesystem-safe, appending `-2`, `-3`, ... to repeats.
pub fn unique_labels<S: AsRef<str>>(raw: &[S]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(raw.len());
    for r in raw {
        let base: String = r
            .as_ref()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        let base = if base.is_empty() { "run".to_string() } else { base };
        let mut label = base.clone();
        let mut n = 2;
        while out.contains(&label) {
            label = format!("{base}-{n}");
            n += 1;
        }
        out.push(label);
    }
    out
}

/// Runs every config concurrently. All configs must describe the same problem
/// (equation, grid, initial state, step and horizon).
pub fn compare(configs: Vec<(String, RunConfig)>) -> Result<ComparisonReport, HarnessError> {
    let Some((first_label, first)) = configs.first() else {
        return Err(HarnessError::config("compare needs at least one config"));
    };
    for (label, cfg) in &configs[1..] {
        if cfg.problem != first.problem || cfg.nodes()? != first.nodes()? {
            return Err(HarnessError::config(format!(
                "config `{label}` describes a different problem than `{first_label}`"
            )));
        }
    }
    for (_, cfg) in &configs {
        cfg.validate()?;
    }
    let reports: Vec<Result<RunReport, HarnessError>> = thread::scope(|scope| {
        let handles: Vec<_> =
            configs.iter().map(|(_, cfg)| scope.spawn(move || simulate(cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    let mut entries = Vec::with_capacity(configs.len());
    for ((label, config), report) in configs.into_iter().zip(reports) {
        entries.push(ComparisonEntry { label, config, report: report? });
    }
    Ok(ComparisonReport { entries })
}
