//! Mass, momentum and energy of the KdV equation, their variational
//! derivatives, and two discrete variational derivatives (DVDs).
//!
//! A DVD of a functional `H` is a two-point map `g(u, v)` with
//! `H[u] - H[v] = <g(u, v), u - v>` and `g(u, u) = dH/du`. All quantities are
//! represented in coefficient space, where the `L2` pairing is the Euclidean
//! dot product.

use std::fmt;
use std::str::FromStr;

use crate::scalar::{self, Real};
use crate::spectral::{BasisSpec, DiffMatrix, GridField, SpectralError, SpectralField, SpectralGrid};

/// Coefficients of `u_t = alpha u u_x + nu u_xxx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdvParams<T> {
    pub alpha: T,
    pub nu: T,
}

impl<T: Real> KdvParams<T> {
    pub fn new(alpha: T, nu: T) -> Self {
        Self { alpha, nu }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionalKind {
    /// `int u dx`
    Mass,
    /// `1/2 int u^2 dx`
    Momentum,
    /// `int (alpha/6 u^3 - nu/2 u_x^2) dx`
    Energy,
}

impl FunctionalKind {
    pub const ALL: [FunctionalKind; 3] = [Self::Mass, Self::Momentum, Self::Energy];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mass => "mass",
            Self::Momentum => "momentum",
            Self::Energy => "energy",
        }
    }
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mass" => Ok(Self::Mass),
            "momentum" => Ok(Self::Momentum),
            "energy" => Ok(Self::Energy),
            other => Err(format!("unknown invariant `{other}`")),
        }
    }
}

/// The semi-discrete KdV model: parameters, quadrature grid and differentiation operator.
///
/// Nonlinear terms are formed on the quadrature grid and analyzed back to
/// coefficients, i.e. they are Galerkin-projected into the truncated space.
#[derive(Debug, Clone)]
pub struct KdvModel<T> {
    params: KdvParams<T>,
    grid: SpectralGrid<T>,
    diff: DiffMatrix<T>,
}

impl<T: Real> KdvModel<T> {
    /// Model with the default `4 (N + 1)` quadrature nodes.
    pub fn new(params: KdvParams<T>, basis: BasisSpec<T>) -> Self {
        Self {
            params,
            grid: SpectralGrid::with_default_nodes(basis),
            diff: DiffMatrix::new(basis),
        }
    }

    pub fn with_nodes(
        params: KdvParams<T>,
        basis: BasisSpec<T>,
        nodes: usize,
    ) -> Result<Self, SpectralError> {
        Ok(Self { params, grid: SpectralGrid::new(basis, nodes)?, diff: DiffMatrix::new(basis) })
    }

    pub fn params(&self) -> &KdvParams<T> {
        &self.params
    }

    pub fn basis(&self) -> &BasisSpec<T> {
        self.grid.basis()
    }

    pub fn grid(&self) -> &SpectralGrid<T> {
        &self.grid
    }

    pub fn diff(&self) -> &DiffMatrix<T> {
        &self.diff
    }

    /// `sqrt(2l) e_0`, the coefficients of the constant function 1.
    pub fn mass_direction(&self) -> SpectralField<T> {
        let mut c = vec![T::zero(); self.basis().dim()];
        c[0] = (T::lit(2.0) * self.basis().half_width()).sqrt();
        SpectralField::from_vec_unchecked(*self.basis(), c)
    }

    pub fn evaluate(&self, kind: FunctionalKind, u: &SpectralField<T>) -> T {
        match kind {
            FunctionalKind::Mass => self.mass_direction().dot(u),
            FunctionalKind::Momentum => T::lit(0.5) * u.dot(u),
            FunctionalKind::Energy => {
                let vals = self.grid.synthesize_values(u.coeffs());
                let cubic: T = vals.iter().map(|&x| x * x * x).sum::<T>() * self.grid.weight();
                let ux = self.diff.apply_transpose(u);
                self.params.alpha / T::lit(6.0) * cubic - self.params.nu / T::lit(2.0) * ux.dot(&ux)
            }
        }
    }

    /// `[mass, momentum, energy]`.
    pub fn invariants(&self, u: &SpectralField<T>) -> [T; 3] {
        FunctionalKind::ALL.map(|k| self.evaluate(k, u))
    }

    /// Galerkin projection of the variational derivative into the truncated space.
    pub fn variational_derivative(&self, kind: FunctionalKind, u: &SpectralField<T>) -> SpectralField<T> {
        match kind {
            FunctionalKind::Mass => self.mass_direction(),
            FunctionalKind::Momentum => u.clone(),
            FunctionalKind::Energy => {
                let half_alpha = self.params.alpha / T::lit(2.0);
                let vals = self.grid.synthesize_values(u.coeffs());
                let sq: Vec<T> = vals.iter().map(|&x| half_alpha * x * x).collect();
                let mut out =
                    SpectralField::from_vec_unchecked(*self.basis(), self.grid.analyze_values(&sq));
                out.axpy(self.params.nu, &self.diff.apply_derivative(u, 2));
                out
            }
        }
    }

    /// Average-vector-field DVD, `int_0^1 dH/du[xi u + (1 - xi) v] dxi`.
    ///
    /// Symmetric in `(u, v)` bit for bit.
    pub fn dvd_avf(&self, kind: FunctionalKind, u: &SpectralField<T>, v: &SpectralField<T>) -> SpectralField<T> {
        match kind {
            FunctionalKind::Mass => self.mass_direction(),
            FunctionalKind::Momentum => u.zip_with(v, |a, b| (a + b) / T::lit(2.0)),
            FunctionalKind::Energy => {
                let sixth_alpha = self.params.alpha / T::lit(6.0);
                let us = self.grid.synthesize_values(u.coeffs());
                let vs = self.grid.synthesize_values(v.coeffs());
                let quad: Vec<T> = us
                    .iter()
                    .zip(&vs)
                    .map(|(&a, &b)| sixth_alpha * ((a * a + b * b) + a * b))
                    .collect();
                let mut out =
                    SpectralField::from_vec_unchecked(*self.basis(), self.grid.analyze_values(&quad));
                let sum = u.add(v);
                out.axpy(self.params.nu / T::lit(2.0), &self.diff.apply_derivative(&sum, 2));
                out
            }
        }
    }

    /// Pointwise quotient DVD of the energy density on the quadrature grid,
    /// `(G[u] - G[v]) / (u - v)`.
    ///
    /// At nodes where `|u - v| < guard` the AVF limit value is used instead, so
    /// the DVD identity only holds exactly when no node is guarded.
    pub fn dvd_quotient(&self, u: &SpectralField<T>, v: &SpectralField<T>, guard: T) -> GridField<T> {
        let KdvParams { alpha, nu } = self.params;
        let (two, six) = (T::lit(2.0), T::lit(6.0));
        let synth = |f: &SpectralField<T>| self.grid.synthesize_values(f.coeffs());
        let (us, vs) = (synth(u), synth(v));
        let (ux, vx) = (synth(&self.diff.apply_transpose(u)), synth(&self.diff.apply_transpose(v)));
        let (uxx, vxx) = (synth(&self.diff.apply_derivative(u, 2)), synth(&self.diff.apply_derivative(v, 2)));
        let values = (0..us.len())
            .map(|m| {
                let (a, b) = (us[m], vs[m]);
                let cubic = alpha / six * ((a * a + b * b) + a * b);
                let diff = a - b;
                if diff.abs() < guard {
                    cubic + nu / two * (uxx[m] + vxx[m])
                } else {
                    cubic - nu / two * (ux[m] * ux[m] - vx[m] * vx[m]) / diff
                }
            })
            .collect();
        GridField::new(*self.basis(), values).expect("model grid satisfies node bound")
    }

    /// Default guard for [`Self::dvd_quotient`], `1e-10 (1 + max |u|)` on the grid.
    pub fn default_guard(&self, u: &SpectralField<T>) -> T {
        let vals = self.grid.synthesize_values(u.coeffs());
        T::lit(1e-10) * (T::one() + scalar::max_abs(&vals))
    }
}
