//! CSV and report writers. Numbers are printed as `{:.16e}` (17 significant
//! digits), which round-trips every binary64 value.
//!
//! | file | columns |
//! |------|---------|
//! | `invariants.csv` | `t,mass,momentum,energy,rel_drift_mass,rel_drift_momentum,rel_drift_energy,fp_iters,rank` |
//! | `snapshot_<t>.csv` | `x,u` |
//! | `convergence.csv` | `h,error,order` (order empty on the first row) |
//! | `compare_drift.csv` | `label,t,rel_drift_mass,rel_drift_momentum,rel_drift_energy` |
//! | `compare_summary.csv` | `label,scheme,tableau,steps,max_rel_drift_mass,max_rel_drift_momentum,max_rel_drift_energy,total_fp_iters` |

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use kdvgeo_core::StepDiagnostics64;

use crate::error::HarnessError;

pub const INVARIANTS_HEADER: &str =
    "t,mass,momentum,energy,rel_drift_mass,rel_drift_momentum,rel_drift_energy,fp_iters,rank";
pub const SNAPSHOT_HEADER: &str = "x,u";
pub const CONVERGENCE_HEADER: &str = "h,error,order";
pub const COMPARE_DRIFT_HEADER: &str = "label,t,rel_drift_mass,rel_drift_momentum,rel_drift_energy";
pub const COMPARE_SUMMARY_HEADER: &str = "label,scheme,tableau,steps,max_rel_drift_mass,max_rel_drift_momentum,max_rel_drift_energy,total_fp_iters";

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn invariants_csv(series: &[StepDiagnostics64]) -> String {
    let mut s = String::with_capacity(series.len() * 200);
    s.push_str(INVARIANTS_HEADER);
    s.push('\n');
    for d in series {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            sci(d.t),
            sci(d.mass),
            sci(d.momentum),
            sci(d.energy),
            sci(d.drift_mass),
            sci(d.drift_momentum),
            sci(d.drift_energy),
            d.fp_iters,
            d.rank
        );
    }
    s
}

pub fn xy_csv(header: &str, x: &[f64], y: &[f64]) -> String {
    let mut s = String::with_capacity(x.len() * 50);
    s.push_str(header);
    s.push('\n');
    for (a, b) in x.iter().zip(y) {
        let _ = writeln!(s, "{},{}", sci(*a), sci(*b));
    }
    s
}

pub(crate) fn write(dir: &Path, name: &str, contents: &str) -> Result<(), HarnessError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}
