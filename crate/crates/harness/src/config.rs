//! Run configuration in a flat `section.key = value` text format.
//!
//! Blank lines and `#` comments are ignored. Keys:
//!
//! | key | default |
//! |-----|---------|
//! | `problem.alpha`, `problem.nu` | required |
//! | `problem.half_width`, `problem.cutoff` | required |
//! | `problem.step`, `problem.t_end` | required |
//! | `problem.initial` | `two-soliton` (or `coefficients`) |
//! | `problem.k1`, `problem.k2`, `problem.x1`, `problem.x2` | `0.4`, `0.6`, `4`, `15` |
//! | `problem.coefficients` | comma list, required for `coefficients` |
//! | `scheme.name` | required: `plain-rk`, `avf`, `projected-rk` |
//! | `scheme.tableau` | `rk4` |
//! | `scheme.invariants` | `mass, momentum, energy` |
//! | `solver.fp_tol`, `solver.fp_max_iters`, `solver.guard` | `1e-12`, `100`, `1e-10` |
//! | `grid.quadrature_nodes` | `4 (N + 1)` |
//! | `output.snapshots` | empty |
//! | `output.dir` | none; the CLI `--out` takes precedence |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kdvgeo_core::kdv::InitialCondition;
use kdvgeo_core::{
    BasisSpec, ButcherTableau, FunctionalKind, KdvParams, ProblemSetup, Scheme, SolverSettings,
    TwoSolitonParams,
};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSetup<f64>,
    pub scheme: Scheme,
    pub tableau: String,
    pub invariants: Vec<FunctionalKind>,
    pub solver: SolverSettings<f64>,
    pub quadrature_nodes: Option<usize>,
    pub snapshots: Vec<f64>,
    pub output_dir: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "problem.alpha",
    "problem.nu",
    "problem.half_width",
    "problem.cutoff",
    "problem.step",
    "problem.t_end",
    "problem.initial",
    "problem.k1",
    "problem.k2",
    "problem.x1",
    "problem.x2",
    "problem.coefficients",
    "scheme.name",
    "scheme.tableau",
    "scheme.invariants",
    "solver.fp_tol",
    "solver.fp_max_iters",
    "solver.guard",
    "grid.quadrature_nodes",
    "output.snapshots",
    "output.dir",
];

impl RunConfig {
    /// Projected RK4 on the two-soliton reference problem.
    pub fn two_soliton_reference() -> Self {
        Self {
            problem: ProblemSetup::two_soliton_reference(),
            scheme: Scheme::ProjectedRk,
            tableau: "rk4".into(),
            invariants: FunctionalKind::ALL.to_vec(),
            solver: SolverSettings::default(),
            quadrature_nodes: None,
            snapshots: Vec::new(),
            output_dir: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn tableau(&self) -> Result<ButcherTableau<f64>, HarnessError> {
        ButcherTableau::by_name(&self.tableau).map_err(|e| HarnessError::config(e.to_string()))
    }

    pub fn basis(&self) -> Result<BasisSpec<f64>, HarnessError> {
        self.problem.basis().map_err(|e| HarnessError::config(e.to_string()))
    }

    pub fn nodes(&self) -> Result<usize, HarnessError> {
        let basis = self.basis()?;
        Ok(self.quadrature_nodes.unwrap_or_else(|| basis.default_nodes()))
    }

    /// Number of steps to `t_end`.
    pub fn step_count(&self) -> Result<usize, HarnessError> {
        kdvgeo_core::integrators::Stepper::<f64>::step_count(self.problem.step, self.problem.t_end)
            .map_err(|e| HarnessError::config(e.to_string()))
    }

    /// Step indices at which snapshots are written, paired with the requested times.
    pub fn snapshot_steps(&self) -> Vec<(usize, f64)> {
        self.snapshots
            .iter()
            .map(|&t| ((t / self.problem.step).round() as usize, t))
            .collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let p = &self.problem;
        for (name, v) in [("alpha", p.params.alpha), ("nu", p.params.nu)] {
            if !v.is_finite() {
                return Err(HarnessError::config(format!("problem.{name} must be finite")));
            }
        }
        let basis = self.basis()?;
        self.step_count()?;
        if let Some(m) = self.quadrature_nodes {
            if m < basis.min_nodes() {
                return Err(HarnessError::config(format!(
                    "grid.quadrature_nodes = {m} is below the alias-free minimum {}",
                    basis.min_nodes()
                )));
            }
        }
        if let InitialCondition::Coefficients(c) = &p.initial {
            if c.len() != basis.dim() {
                return Err(HarnessError::config(format!(
                    "problem.coefficients has {} entries, expected 2N + 1 = {}",
                    c.len(),
                    basis.dim()
                )));
            }
        }
        self.tableau()?;
        self.solver.validate().map_err(|e| HarnessError::config(e.to_string()))?;
        for &t in &self.snapshots {
            if !(t >= 0.0 && t <= p.t_end) {
                return Err(HarnessError::config(format!(
                    "snapshot time {t} outside [0, {}]",
                    p.t_end
                )));
            }
            let k = (t / p.step).round();
            if (k * p.step - t).abs() > 1e-9 * (1.0 + t) {
                return Err(HarnessError::config(format!(
                    "snapshot time {t} is not a multiple of the step {}",
                    p.step
                )));
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn resolved(&self) -> String {
        let p = &self.problem;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("problem.alpha", fmt_num(p.params.alpha));
        kv("problem.nu", fmt_num(p.params.nu));
        kv("problem.half_width", fmt_num(p.half_width));
        kv("problem.cutoff", p.cutoff.to_string());
        kv("problem.step", fmt_num(p.step));
        kv("problem.t_end", fmt_num(p.t_end));
        match &p.initial {
            InitialCondition::TwoSoliton(tp) => {
                kv("problem.initial", "two-soliton".into());
                kv("problem.k1", fmt_num(tp.k1()));
                kv("problem.k2", fmt_num(tp.k2()));
                kv("problem.x1", fmt_num(tp.x1()));
                kv("problem.x2", fmt_num(tp.x2()));
            }
            InitialCondition::Coefficients(c) => {
                kv("problem.initial", "coefficients".into());
                kv("problem.coefficients", join(c.iter().map(|&x| fmt_num(x))));
            }
        }
        kv("scheme.name", self.scheme.to_string());
        kv("scheme.tableau", self.tableau.clone());
        kv("scheme.invariants", join(self.invariants.iter().map(|k| k.to_string())));
        kv("solver.fp_tol", fmt_num(self.solver.fp_tol));
        kv("solver.fp_max_iters", self.solver.fp_max_iters.to_string());
        kv("solver.guard", fmt_num(self.solver.guard));
        if let Some(m) = self.quadrature_nodes {
            kv("grid.quadrature_nodes", m.to_string());
        }
        kv("output.snapshots", join(self.snapshots.iter().map(|&x| fmt_num(x))));
        if let Some(dir) = &self.output_dir {
            kv("output.dir", dir.display().to_string());
        }
        s
    }
}

/// Shortest representation that parses back to the same binary64 value.
fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| HarnessError::ConfigLine { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(err(format!("unknown key `{key}`")));
            }
            if map.insert(key.clone(), (line_no, value.trim().to_string())).is_some() {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.map.get(key)
    }

    fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>, HarnessError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| HarnessError::ConfigLine {
                line: *line,
                message: format!("cannot parse `{v}` for `{key}`"),
            }),
        }
    }

    fn require<V: FromStr>(&self, key: &str) -> Result<V, HarnessError> {
        self.get(key)?.ok_or_else(|| HarnessError::config(format!("missing required key `{key}`")))
    }

    fn list<V: FromStr>(&self, key: &str) -> Result<Option<Vec<V>>, HarnessError> {
        let Some((line, v)) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|_| HarnessError::ConfigLine {
                    line: *line,
                    message: format!("cannot parse `{s}` in `{key}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

impl FromStr for RunConfig {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let e = Entries::parse(text)?;
        let initial_kind: String = e.get("problem.initial")?.unwrap_or_else(|| "two-soliton".into());
        let initial = match initial_kind.as_str() {
            "two-soliton" => {
                let d = TwoSolitonParams::<f64>::reference();
                let tp = TwoSolitonParams::new(
                    e.get("problem.k1")?.unwrap_or(d.k1()),
                    e.get("problem.k2")?.unwrap_or(d.k2()),
                    e.get("problem.x1")?.unwrap_or(d.x1()),
                    e.get("problem.x2")?.unwrap_or(d.x2()),
                )
                .ok_or_else(|| HarnessError::config("problem.k1 + problem.k2 must be nonzero"))?;
                InitialCondition::TwoSoliton(tp)
            }
            "coefficients" => InitialCondition::Coefficients(
                e.list("problem.coefficients")?
                    .ok_or_else(|| HarnessError::config("missing required key `problem.coefficients`"))?,
            ),
            other => return Err(HarnessError::config(format!("unknown initial condition `{other}`"))),
        };
        let problem = ProblemSetup {
            params: KdvParams::new(e.require("problem.alpha")?, e.require("problem.nu")?),
            half_width: e.require("problem.half_width")?,
            cutoff: e.require("problem.cutoff")?,
            step: e.require("problem.step")?,
            t_end: e.require("problem.t_end")?,
            initial,
        };
        let scheme_name: String = e.require("scheme.name")?;
        let scheme = scheme_name.parse().map_err(HarnessError::Config)?;
        let defaults = SolverSettings::<f64>::default();
        let invariants = match e.raw("scheme.invariants") {
            None => FunctionalKind::ALL.to_vec(),
            Some(_) => e.list("scheme.invariants")?.unwrap_or_default(),
        };
        let cfg = RunConfig {
            problem,
            scheme,
            tableau: e.get("scheme.tableau")?.unwrap_or_else(|| "rk4".into()),
            invariants,
            solver: SolverSettings {
                fp_tol: e.get("solver.fp_tol")?.unwrap_or(defaults.fp_tol),
                fp_max_iters: e.get("solver.fp_max_iters")?.unwrap_or(defaults.fp_max_iters),
                guard: e.get("solver.guard")?.unwrap_or(defaults.guard),
            },
            quadrature_nodes: e.get("grid.quadrature_nodes")?,
            snapshots: e.list("output.snapshots")?.unwrap_or_default(),
            output_dir: e.get::<String>("output.dir")?.map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
problem.alpha = -1
problem.nu = -1
problem.half_width = 40
problem.cutoff = 64
problem.step = 0.005
problem.t_end = 150
scheme.name = projected-rk
";

    #[test]
    fn minimal_config_matches_reference() {
        let cfg: RunConfig = MINIMAL.parse().unwrap();
        assert_eq!(cfg, RunConfig::two_soliton_reference());
        assert_eq!(cfg.step_count().unwrap(), 30_000);
    }

    #[test]
    fn resolved_round_trips() {
        let mut cfg = RunConfig::two_soliton_reference();
        cfg.snapshots = vec![0.0, 80.0, 150.0];
        cfg.invariants = vec![FunctionalKind::Energy, FunctionalKind::Mass];
        cfg.quadrature_nodes = Some(300);
        cfg.solver.fp_tol = 1.0 / 3.0 * 1e-12;
        let back: RunConfig = cfg.resolved().parse().unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.resolved(), cfg.resolved());

        let mut lin = cfg.clone();
        lin.problem.cutoff = 2;
        lin.quadrature_nodes = None;
        lin.problem.initial = InitialCondition::Coefficients(vec![0.0, 0.1, -0.2, 0.3, 1e-300]);
        let back: RunConfig = lin.resolved().parse().unwrap();
        assert_eq!(back, lin);
    }

    #[test]
    fn rejects_bad_input() {
        let with = |extra: &str| format!("{MINIMAL}{extra}\n").parse::<RunConfig>();
        assert!(matches!(with("problem.colour = red"), Err(HarnessError::ConfigLine { .. })));
        assert!(matches!(with("problem.alpha = 2"), Err(HarnessError::ConfigLine { .. })));
        assert!(matches!(with("no equals sign"), Err(HarnessError::ConfigLine { .. })));
        assert!(with("output.snapshots = 151").is_err());
        assert!(with("output.snapshots = 0.0025").is_err());
        assert!(with("scheme.tableau = dopri5").is_err());
        assert!(with("scheme.invariants = mass, angular").is_err());
        assert!(with("grid.quadrature_nodes = 100").is_err());
        assert!(with("solver.fp_tol = -1").is_err());
        assert!(MINIMAL.replace("problem.step = 0.005", "problem.step = 0.007").parse::<RunConfig>().is_err());
        assert!(MINIMAL.replace("scheme.name = projected-rk", "").parse::<RunConfig>().is_err());
        let err = with("problem.initial = coefficients\nproblem.coefficients = 1, 2").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn comments_and_empty_invariants() {
        let cfg: RunConfig = format!("# header\n{MINIMAL}scheme.invariants =   # none\n").parse().unwrap();
        assert!(cfg.invariants.is_empty());
    }
}
