//! Time steppers for the semi-discrete KdV system `u' = D^T dG/du`.
//!
//! * [`rk_step`]: any Butcher tableau; implicit stages are resolved by fixed-point iteration.
//! * [`avf_step`]: the average-vector-field DVD scheme, which preserves mass and energy.
//! * [`projection_step`]: a Runge-Kutta step whose increment is projected onto the
//!   discrete tangent space of the selected invariants, preserving all of them.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::functionals::{FunctionalKind, KdvModel};
use crate::projection::{build_frame, ProjectionError, DEFAULT_DROP_TOL};
use crate::scalar::Real;
use crate::spectral::SpectralField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableauError {
    #[error("tableau needs at least one stage")]
    Empty,
    #[error("tableau arrays disagree on the stage count")]
    Shape,
    #[error("unknown tableau `{0}`")]
    Unknown(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("step size must be positive and finite")]
    InvalidStep,
    #[error("projected step needs at least one invariant")]
    NoInvariants,
    #[error("solver settings invalid: {0}")]
    InvalidSettings(&'static str),
    #[error("state became non-finite")]
    NonFinite,
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("step {step} (t = {t}) failed: {source}")]
    Step { step: usize, t: f64, source: StepError },
    #[error("horizon {t_end} is not a non-negative multiple of the step {h}")]
    Horizon { t_end: f64, h: f64 },
}

/// Coefficients `(A, b, c)` of an `s`-stage Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau<T> {
    name: String,
    a: Vec<Vec<T>>,
    b: Vec<T>,
    c: Vec<T>,
}

impl<T: Real> ButcherTableau<T> {
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<T>>,
        b: Vec<T>,
        c: Vec<T>,
    ) -> Result<Self, TableauError> {
        let s = b.len();
        if s == 0 {
            return Err(TableauError::Empty);
        }
        if a.len() != s || c.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(TableauError::Shape);
        }
        Ok(Self { name: name.into(), a, b, c })
    }

    /// The classical fourth-order method.
    pub fn classical_rk4() -> Self {
        let z = T::zero();
        let half = T::lit(0.5);
        let one = T::one();
        Self::new(
            "rk4",
            vec![
                vec![z, z, z, z],
                vec![half, z, z, z],
                vec![z, half, z, z],
                vec![z, z, one, z],
            ],
            vec![one / T::lit(6.0), T::lit(2.0) / T::lit(6.0), T::lit(2.0) / T::lit(6.0), one / T::lit(6.0)],
            vec![z, half, half, one],
        )
        .expect("static tableau")
    }

    pub fn implicit_midpoint() -> Self {
        let half = T::lit(0.5);
        Self::new("midpoint", vec![vec![half]], vec![T::one()], vec![half]).expect("static tableau")
    }

    pub fn forward_euler() -> Self {
        Self::new("euler", vec![vec![T::zero()]], vec![T::one()], vec![T::zero()])
            .expect("static tableau")
    }

    /// Looks up a shipped tableau: `rk4`, `midpoint` or `euler`.
    pub fn by_name(name: &str) -> Result<Self, TableauError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "rk4" | "classical-rk4" => Ok(Self::classical_rk4()),
            "midpoint" | "implicit-midpoint" => Ok(Self::implicit_midpoint()),
            "euler" | "forward-euler" => Ok(Self::forward_euler()),
            other => Err(TableauError::Unknown(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[Vec<T>] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    /// True when `a_ij = 0` for all `j >= i`.
    pub fn is_explicit(&self) -> bool {
        self.a
            .iter()
            .enumerate()
            .all(|(i, row)| row[i..].iter().all(|&x| x == T::zero()))
    }
}

/// Fixed-point tolerances shared by every implicit solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T> {
    /// Converged when successive iterates differ by at most `fp_tol (1 + |u|)`.
    pub fp_tol: T,
    pub fp_max_iters: usize,
    /// Threshold used by the quotient DVD at near-coincident nodes.
    pub guard: T,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self { fp_tol: T::lit(1e-12), fp_max_iters: 100, guard: T::lit(1e-10) }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn validate(&self) -> Result<(), StepError> {
        if !(self.fp_tol > T::zero() && self.fp_tol.is_finite()) {
            return Err(StepError::InvalidSettings("fp_tol must be positive"));
        }
        if self.fp_max_iters < 1 {
            return Err(StepError::InvalidSettings("fp_max_iters must be at least 1"));
        }
        if !(self.guard > T::zero()) {
            return Err(StepError::InvalidSettings("guard must be positive"));
        }
        Ok(())
    }

    fn threshold(&self, u: &SpectralField<T>) -> T {
        self.fp_tol * (T::one() + u.norm())
    }
}

/// Solver bookkeeping for a single step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepInfo {
    /// Fixed-point iterations used (stage solve plus outer projection loop).
    pub fp_iters: usize,
    /// Retained rank of the projection frame; 0 when no projection is applied.
    pub rank: usize,
}

/// Invariant values and drifts recorded after each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics<T> {
    pub step: usize,
    pub t: T,
    pub mass: T,
    pub momentum: T,
    pub energy: T,
    /// `|H(t) - H(0)| / |H(0)|`, or the absolute drift when `H(0) = 0`.
    pub drift_mass: T,
    pub drift_momentum: T,
    pub drift_energy: T,
    pub fp_iters: usize,
    pub rank: usize,
}

impl<T: Real> StepDiagnostics<T> {
    pub fn invariants(&self) -> [T; 3] {
        [self.mass, self.momentum, self.energy]
    }

    pub fn drifts(&self) -> [T; 3] {
        [self.drift_mass, self.drift_momentum, self.drift_energy]
    }

    pub fn drift(&self, kind: FunctionalKind) -> T {
        match kind {
            FunctionalKind::Mass => self.drift_mass,
            FunctionalKind::Momentum => self.drift_momentum,
            FunctionalKind::Energy => self.drift_energy,
        }
    }

    fn record(step: usize, t: T, values: [T; 3], initial: [T; 3], info: StepInfo) -> Self {
        let drift = |i: usize| {
            let d = (values[i] - initial[i]).abs();
            if initial[i] != T::zero() {
                d / initial[i].abs()
            } else {
                d
            }
        };
        Self {
            step,
            t,
            mass: values[0],
            momentum: values[1],
            energy: values[2],
            drift_mass: drift(0),
            drift_momentum: drift(1),
            drift_energy: drift(2),
            fp_iters: info.fp_iters,
            rank: info.rank,
        }
    }
}

/// `f(u) = D^T (alpha/2 u^2 + nu (D^T)^2 u)`, the Galerkin right-hand side.
pub fn kdv_rhs<T: Real>(model: &KdvModel<T>, u: &SpectralField<T>) -> SpectralField<T> {
    let grad = model.variational_derivative(FunctionalKind::Energy, u);
    model.diff().apply_transpose(&grad)
}

fn check_step<T: Real>(h: T, settings: &SolverSettings<T>) -> Result<(), StepError> {
    if !(h.is_finite() && h > T::zero()) {
        return Err(StepError::InvalidStep);
    }
    settings.validate()
}

/// One Runge-Kutta step of size `h`.
pub fn rk_step<T: Real>(
    tab: &ButcherTableau<T>,
    model: &KdvModel<T>,
    u: &SpectralField<T>,
    h: T,
    settings: &SolverSettings<T>,
) -> Result<(SpectralField<T>, StepInfo), StepError> {
    check_step(h, settings)?;
    let (slopes, iters) = if tab.is_explicit() {
        (explicit_slopes(tab, model, u, h), 0)
    } else {
        implicit_slopes(tab, model, u, h, settings)?
    };
    let mut next = u.clone();
    for (&b, k) in tab.b().iter().zip(&slopes) {
        if b != T::zero() {
            next.axpy(h * b, k);
        }
    }
    if !next.is_finite() {
        return Err(StepError::NonFinite);
    }
    Ok((next, StepInfo { fp_iters: iters, rank: 0 }))
}

fn stage_value<T: Real>(
    u: &SpectralField<T>,
    row: &[T],
    slopes: &[SpectralField<T>],
    h: T,
) -> SpectralField<T> {
    let mut stage = u.clone();
    for (&a, k) in row.iter().zip(slopes) {
        if a != T::zero() {
            stage.axpy(h * a, k);
        }
    }
    stage
}

fn explicit_slopes<T: Real>(
    tab: &ButcherTableau<T>,
    model: &KdvModel<T>,
    u: &SpectralField<T>,
    h: T,
) -> Vec<SpectralField<T>> {
    let mut slopes: Vec<SpectralField<T>> = Vec::with_capacity(tab.stages());
    for row in tab.a() {
        let stage = stage_value(u, &row[..slopes.len()], &slopes, h);
        slopes.push(kdv_rhs(model, &stage));
    }
    slopes
}

fn implicit_slopes<T: Real>(
    tab: &ButcherTableau<T>,
    model: &KdvModel<T>,
    u: &SpectralField<T>,
    h: T,
    settings: &SolverSettings<T>,
) -> Result<(Vec<SpectralField<T>>, usize), StepError> {
    let f0 = kdv_rhs(model, u);
    let mut slopes = vec![f0; tab.stages()];
    let mut stages = vec![u.clone(); tab.stages()];
    let threshold = settings.threshold(u);
    let mut residual = T::infinity();
    for iter in 1..=settings.fp_max_iters {
        let next: Vec<_> = tab.a().iter().map(|row| stage_value(u, row, &slopes, h)).collect();
        residual = next
            .iter()
            .zip(&stages)
            .map(|(a, b)| a.sub(b).norm())
            .fold(T::zero(), T::max);
        stages = next;
        slopes = stages.iter().map(|s| kdv_rhs(model, s)).collect();
        if !residual.is_finite() {
            break;
        }
        if residual <= threshold {
            return Ok((slopes, iter));
        }
    }
    Err(StepError::NonConvergence {
        iterations: settings.fp_max_iters,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// One step of the average-vector-field scheme
/// `(u+ - u) / h = D^T dvd_avf(energy)(u+, u)`.
///
/// The dispersive term is treated implicitly by exact 2x2 block solves
/// `(I - h nu/2 (D^T)^3) u+ = (I + h nu/2 (D^T)^3) u + h D^T N(u+, u)`; the
/// nonlinear part `N = alpha/6 (u+^2 + u+ u + u^2)` is lagged and iterated.
pub fn avf_step<T: Real>(
    model: &KdvModel<T>,
    u: &SpectralField<T>,
    h: T,
    settings: &SolverSettings<T>,
) -> Result<(SpectralField<T>, StepInfo), StepError> {
    if !(h.is_finite() && h != T::zero()) {
        return Err(StepError::InvalidStep);
    }
    settings.validate()?;
    let diff = model.diff();
    let grid = model.grid();
    let shift = h * model.params().nu / T::lit(2.0);
    let sixth_alpha = model.params().alpha / T::lit(6.0);

    let mut base = u.clone();
    base.axpy(shift, &diff.apply_derivative(u, 3));
    let old = grid.synthesize_values(u.coeffs());
    let threshold = settings.threshold(u);

    let mut current = u.clone();
    let mut residual = T::infinity();
    for iter in 1..=settings.fp_max_iters {
        let new = grid.synthesize_values(current.coeffs());
        let quad: Vec<T> = new
            .iter()
            .zip(&old)
            .map(|(&a, &b)| sixth_alpha * ((a * a + b * b) + a * b))
            .collect();
        let nonlinear = SpectralField::from_vec_unchecked(*model.basis(), grid.analyze_values(&quad));
        let mut rhs = base.clone();
        rhs.axpy(h, &diff.apply_transpose(&nonlinear));
        let next = diff.solve_shifted_cube(shift, &rhs);
        residual = next.sub(&current).norm();
        current = next;
        if !residual.is_finite() {
            break;
        }
        if residual <= threshold {
            return Ok((current, StepInfo { fp_iters: iter, rank: 0 }));
        }
    }
    Err(StepError::NonConvergence {
        iterations: settings.fp_max_iters,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// One projected Runge-Kutta step.
///
/// With `y` the underlying Runge-Kutta result, solves
/// `w = u + P(w, u) (y - u)` by fixed-point iteration starting from `w = y`,
/// where `P(w, u)` projects onto the orthogonal complement of the AVF DVDs of
/// `kinds` at `(w, u)`.
pub fn projection_step<T: Real>(
    tab: &ButcherTableau<T>,
    model: &KdvModel<T>,
    kinds: &[FunctionalKind],
    u: &SpectralField<T>,
    h: T,
    settings: &SolverSettings<T>,
) -> Result<(SpectralField<T>, StepInfo), StepError> {
    if kinds.is_empty() {
        return Err(StepError::NoInvariants);
    }
    let (y, rk_info) = rk_step(tab, model, u, h, settings)?;
    let increment = y.sub(u);
    let threshold = settings.threshold(u);
    let drop_tol = T::lit(DEFAULT_DROP_TOL);

    let mut current = y;
    let mut residual = T::infinity();
    for iter in 1..=settings.fp_max_iters {
        let directions: Vec<_> = kinds.iter().map(|&k| model.dvd_avf(k, &current, u)).collect();
        let frame = build_frame(&directions, drop_tol)?;
        let next = u.add(&frame.project_tangent(&increment));
        residual = next.sub(&current).norm();
        current = next;
        if !residual.is_finite() {
            break;
        }
        if residual <= threshold {
            let info = StepInfo { fp_iters: rk_info.fp_iters + iter, rank: frame.retained_rank() };
            return Ok((current, info));
        }
    }
    Err(StepError::NonConvergence {
        iterations: settings.fp_max_iters,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    PlainRk,
    Avf,
    ProjectedRk,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::PlainRk => "plain-rk",
            Self::Avf => "avf",
            Self::ProjectedRk => "projected-rk",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain-rk" => Ok(Self::PlainRk),
            "avf" => Ok(Self::Avf),
            "projected-rk" => Ok(Self::ProjectedRk),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

/// Everything needed to advance a state, bundled for the run loop.
#[derive(Debug, Clone)]
pub struct Stepper<'a, T> {
    pub scheme: Scheme,
    pub tableau: &'a ButcherTableau<T>,
    pub model: &'a KdvModel<T>,
    pub kinds: &'a [FunctionalKind],
    pub settings: SolverSettings<T>,
}

/// Initial record plus one record per step.
pub type Trajectory<T> = Vec<(SpectralField<T>, StepDiagnostics<T>)>;

impl<'a, T: Real> Stepper<'a, T> {
    pub fn step(&self, u: &SpectralField<T>, h: T) -> Result<(SpectralField<T>, StepInfo), StepError> {
        match self.scheme {
            Scheme::PlainRk => rk_step(self.tableau, self.model, u, h, &self.settings),
            Scheme::ProjectedRk if self.kinds.is_empty() => {
                rk_step(self.tableau, self.model, u, h, &self.settings)
            }
            Scheme::ProjectedRk => {
                projection_step(self.tableau, self.model, self.kinds, u, h, &self.settings)
            }
            Scheme::Avf => {
                check_step(h, &self.settings)?;
                avf_step(self.model, u, h, &self.settings)
            }
        }
    }

    /// Number of steps of size `h` covering `[0, t_end]`.
    pub fn step_count(h: T, t_end: T) -> Result<usize, IntegrateError> {
        let err = || IntegrateError::Horizon {
            t_end: t_end.to_f64().unwrap_or(f64::NAN),
            h: h.to_f64().unwrap_or(f64::NAN),
        };
        if !(h > T::zero() && h.is_finite() && t_end >= T::zero() && t_end.is_finite()) {
            return Err(err());
        }
        let n = (t_end / h).round();
        if (n * h - t_end).abs() > T::lit(1e-9) * (T::one() + t_end) {
            return Err(err());
        }
        n.to_usize().ok_or_else(err)
    }

    /// Steps from `t = 0` to `t_end`, passing every record (including the initial one) to `observer`.
    /// Returns the final state.
    pub fn integrate_with(
        &self,
        u0: &SpectralField<T>,
        h: T,
        t_end: T,
        mut observer: impl FnMut(&SpectralField<T>, &StepDiagnostics<T>),
    ) -> Result<SpectralField<T>, IntegrateError> {
        let steps = Self::step_count(h, t_end)?;
        let initial = self.model.invariants(u0);
        observer(u0, &StepDiagnostics::record(0, T::zero(), initial, initial, StepInfo::default()));
        let mut u = u0.clone();
        for k in 1..=steps {
            let t = T::from_count(k) * h;
            let (next, info) = self.step(&u, h).map_err(|source| IntegrateError::Step {
                step: k,
                t: t.to_f64().unwrap_or(f64::NAN),
                source,
            })?;
            u = next;
            let diag = StepDiagnostics::record(k, t, self.model.invariants(&u), initial, info);
            observer(&u, &diag);
        }
        Ok(u)
    }

    pub fn integrate(
        &self,
        u0: &SpectralField<T>,
        h: T,
        t_end: T,
    ) -> Result<Trajectory<T>, IntegrateError> {
        let mut out = Vec::new();
        self.integrate_with(u0, h, t_end, |u, d| out.push((u.clone(), *d)))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::KdvParams;
    use crate::spectral::BasisSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(n: usize, alpha: f64, nu: f64) -> KdvModel<f64> {
        KdvModel::new(KdvParams::new(alpha, nu), BasisSpec::new(40.0, n).unwrap())
    }

    fn random_field(rng: &mut ChaCha8Rng, m: &KdvModel<f64>) -> SpectralField<f64> {
        let b = *m.basis();
        SpectralField::new(b, (0..b.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn shipped_tableaux_are_consistent() {
        for tab in [
            ButcherTableau::<f64>::classical_rk4(),
            ButcherTableau::implicit_midpoint(),
            ButcherTableau::forward_euler(),
        ] {
            let sum_b: f64 = tab.b().iter().sum();
            assert!((sum_b - 1.0).abs() <= 1e-14, "{}", tab.name());
            for (row, &c) in tab.a().iter().zip(tab.c()) {
                assert!((row.iter().sum::<f64>() - c).abs() <= 1e-14);
            }
        }
        assert!(ButcherTableau::<f64>::classical_rk4().is_explicit());
        assert!(!ButcherTableau::<f64>::implicit_midpoint().is_explicit());
        assert_eq!(ButcherTableau::<f64>::by_name("RK4").unwrap().stages(), 4);
        assert!(ButcherTableau::<f64>::by_name("dopri").is_err());
        assert_eq!(
            ButcherTableau::<f64>::new("bad", vec![vec![0.0]], vec![1.0, 0.0], vec![0.0]),
            Err(TableauError::Shape)
        );
    }

    #[test]
    fn rhs_examples() {
        let m = model(6, -1.0, -1.0);
        let b = *m.basis();
        assert_eq!(kdv_rhs(&m, &SpectralField::zeros(b)).norm(), 0.0);
        // constants only pick up quadrature rounding in the higher modes
        let c = SpectralField::basis_vector(b, 0).unwrap().scale(3.0);
        assert!(kdv_rhs(&m, &c).norm() <= 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_field(&mut rng, &m);
        assert_eq!(kdv_rhs(&m, &u).coeffs()[0], 0.0);
    }

    #[test]
    fn trivial_equation_leaves_state_unchanged() {
        let m = model(4, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_field(&mut rng, &m);
        let s = SolverSettings::default();
        for tab in [ButcherTableau::classical_rk4(), ButcherTableau::implicit_midpoint()] {
            let (next, _) = rk_step(&tab, &m, &u, 0.1, &s).unwrap();
            assert_eq!(next, u);
        }
    }

    #[test]
    fn rk4_matches_taylor_of_linear_flow() {
        // alpha = 0: u' = nu (D^T)^3 u, so one RK4 step is the degree-4 Taylor
        // polynomial of exp(h nu (D^T)^3) applied to u
        let nu = -1.0;
        let m = model(8, 0.0, nu);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_field(&mut rng, &m);
        let h = 0.05;
        let (step, _) =
            rk_step(&ButcherTableau::classical_rk4(), &m, &u, h, &SolverSettings::default()).unwrap();
        let mut term = u.clone();
        let mut taylor = u.clone();
        for k in 1..=4 {
            term = m.diff().apply_derivative(&term, 3).scale(h * nu / k as f64);
            taylor.axpy(1.0, &term);
        }
        for (a, b) in step.coeffs().iter().zip(taylor.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }

        // and the exact rotation agrees to O(h^5)
        let exact = exact_linear(&m, &u, h * nu);
        let err = step.sub(&exact).norm();
        let kmax = m.basis().wavenumber(8).powi(3) * h;
        assert!(err <= kmax.powi(5) / 120.0 * u.norm() * 1.01);
    }

    // exp(s (D^T)^3) acting blockwise as a rotation by s kappa^3
    fn exact_linear(m: &KdvModel<f64>, u: &SpectralField<f64>, s: f64) -> SpectralField<f64> {
        let b = *m.basis();
        let mut c = u.coeffs().to_vec();
        for mode in 1..=b.cutoff() {
            // (D^T)^3 on a block is kappa^3 J, so exp(s kappa^3 J) = [[cos, sin], [-sin, cos]]
            let th = s * b.wavenumber(mode).powi(3);
            let (si, ci) = (c[2 * mode - 1], c[2 * mode]);
            c[2 * mode - 1] = th.cos() * si + th.sin() * ci;
            c[2 * mode] = -th.sin() * si + th.cos() * ci;
        }
        SpectralField::new(b, c).unwrap()
    }

    #[test]
    fn implicit_midpoint_converges_on_mild_problem() {
        let m = model(4, -1.0, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_field(&mut rng, &m).scale(0.2);
        let (next, info) =
            rk_step(&ButcherTableau::implicit_midpoint(), &m, &u, 0.01, &SolverSettings::default())
                .unwrap();
        assert!(info.fp_iters >= 2);
        // midpoint preserves the quadratic momentum
        assert!((next.dot(&next) - u.dot(&u)).abs() < 1e-11);
    }

    #[test]
    fn implicit_stage_failure_is_reported() {
        let m = model(64, -1.0, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_field(&mut rng, &m);
        let err = rk_step(&ButcherTableau::implicit_midpoint(), &m, &u, 0.1, &SolverSettings::default())
            .unwrap_err();
        assert!(matches!(err, StepError::NonConvergence { iterations: 100, .. }));
    }

    #[test]
    fn rejects_bad_step_and_settings() {
        let m = model(2, -1.0, -1.0);
        let u = SpectralField::zeros(*m.basis());
        let tab = ButcherTableau::classical_rk4();
        let s = SolverSettings::default();
        assert_eq!(rk_step(&tab, &m, &u, 0.0, &s).unwrap_err(), StepError::InvalidStep);
        assert_eq!(rk_step(&tab, &m, &u, f64::NAN, &s).unwrap_err(), StepError::InvalidStep);
        let bad = SolverSettings { fp_max_iters: 0, ..s };
        assert!(matches!(rk_step(&tab, &m, &u, 0.1, &bad), Err(StepError::InvalidSettings(_))));
        assert_eq!(
            projection_step(&tab, &m, &[], &u, 0.1, &s).unwrap_err(),
            StepError::NoInvariants
        );
    }

    #[test]
    fn avf_fixed_points() {
        let m = model(8, -1.0, -1.0);
        let b = *m.basis();
        let s = SolverSettings::default();
        let (z, _) = avf_step(&m, &SpectralField::zeros(b), 0.01, &s).unwrap();
        assert_eq!(z.norm(), 0.0);
        let c = SpectralField::basis_vector(b, 0).unwrap().scale(1.3);
        let (next, _) = avf_step(&m, &c, 0.01, &s).unwrap();
        assert_eq!(next.coeffs()[0], c.coeffs()[0]);
        assert!(next.sub(&c).norm() <= 1e-16);
    }

    #[test]
    fn avf_conserves_energy_and_mass() {
        let m = model(8, -1.0, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = random_field(&mut rng, &m);
        let (next, _) = avf_step(&m, &u, 1e-2, &SolverSettings::default()).unwrap();
        for kind in [FunctionalKind::Energy, FunctionalKind::Mass] {
            let (a, b) = (m.evaluate(kind, &u), m.evaluate(kind, &next));
            assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()), "{kind}: {a} -> {b}");
        }
    }

    #[test]
    fn avf_is_time_symmetric() {
        let m = model(16, -1.0, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_field(&mut rng, &m);
        let s = SolverSettings::default();
        let (fwd, _) = avf_step(&m, &u, 0.02, &s).unwrap();
        let (back, _) = avf_step(&m, &fwd, -0.02, &s).unwrap();
        assert!(back.sub(&u).max_abs() <= 10.0 * s.fp_tol * (1.0 + u.norm()));
    }

    #[test]
    fn mass_only_projection_touches_constant_mode() {
        let m = model(8, -1.0, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_field(&mut rng, &m);
        let tab = ButcherTableau::forward_euler();
        let s = SolverSettings::default();
        let (y, _) = rk_step(&tab, &m, &u, 0.01, &s).unwrap();
        let (w, info) = projection_step(&tab, &m, &[FunctionalKind::Mass], &u, 0.01, &s).unwrap();
        assert_eq!(info.rank, 1);
        let (m0, m1) = (m.evaluate(FunctionalKind::Mass, &u), m.evaluate(FunctionalKind::Mass, &w));
        assert!((m0 - m1).abs() <= 1e-12);
        for (a, b) in w.coeffs()[1..].iter().zip(&y.coeffs()[1..]) {
            assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn projected_step_preserves_all_three() {
        let m = model(16, -1.0, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_field(&mut rng, &m).scale(0.5);
        let s = SolverSettings::default();
        let (w, info) = projection_step(
            &ButcherTableau::classical_rk4(),
            &m,
            &FunctionalKind::ALL,
            &u,
            0.005,
            &s,
        )
        .unwrap();
        assert_eq!(info.rank, 3);
        for kind in FunctionalKind::ALL {
            let (a, b) = (m.evaluate(kind, &u), m.evaluate(kind, &w));
            assert!((a - b).abs() <= 10.0 * s.fp_tol * (1.0 + a.abs()), "{kind}: {a} -> {b}");
        }
    }

    #[test]
    fn zero_state_projection_drops_degenerate_directions() {
        let m = model(4, -1.0, -1.0);
        let u = SpectralField::zeros(*m.basis());
        let (w, info) = projection_step(
            &ButcherTableau::classical_rk4(),
            &m,
            &FunctionalKind::ALL,
            &u,
            0.01,
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(w.norm(), 0.0);
        assert_eq!(info.rank, 1);
    }

    #[test]
    fn integrate_zero_horizon_and_bad_horizon() {
        let m = model(4, -1.0, -1.0);
        let tab = ButcherTableau::classical_rk4();
        let stepper = Stepper {
            scheme: Scheme::ProjectedRk,
            tableau: &tab,
            model: &m,
            kinds: &FunctionalKind::ALL,
            settings: SolverSettings::default(),
        };
        let u = SpectralField::basis_vector(*m.basis(), 1).unwrap();
        let traj = stepper.integrate(&u, 0.01, 0.0).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj[0].1.drifts(), [0.0; 3]);
        assert!(matches!(stepper.integrate(&u, 0.3, 1.0), Err(IntegrateError::Horizon { .. })));
        assert_eq!(Stepper::<f64>::step_count(0.005, 10.0).unwrap(), 2000);
    }

    #[test]
    fn empty_invariant_set_is_plain_rk() {
        let m = model(8, -1.0, -1.0);
        let tab = ButcherTableau::classical_rk4();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = random_field(&mut rng, &m).scale(0.3);
        let mk = |scheme| Stepper {
            scheme,
            tableau: &tab,
            model: &m,
            kinds: &[],
            settings: SolverSettings::default(),
        };
        let a = mk(Scheme::PlainRk).integrate(&u, 0.01, 0.2).unwrap();
        let b = mk(Scheme::ProjectedRk).integrate(&u, 0.01, 0.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::PlainRk, Scheme::Avf, Scheme::ProjectedRk] {
            assert_eq!(s.name().parse::<Scheme>(), Ok(s));
        }
        assert!("leapfrog".parse::<Scheme>().is_err());
    }
}
