//! Orthogonal projection onto the discrete tangent space, the orthogonal
//! complement of the span of a set of discrete variational derivatives.
//!
//! The production route orthonormalizes the directions by modified
//! Gram-Schmidt ([`build_frame`]). [`project_via_gram`] forms
//! `P = G (G^T G)^{-1} G^T` from the normal equations and is kept as an
//! independent cross-check.

use thiserror::Error;

use crate::scalar::Real;
use crate::spectral::SpectralField;

/// Gram matrices with a condition estimate above this are rejected by the normal-equations route.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Default relative residual below which an input direction counts as dependent.
pub const DEFAULT_DROP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("no input directions")]
    NoInputs,
    #[error("input directions live on different bases")]
    BasisMismatch,
    #[error("drop tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("Gram matrix is numerically rank deficient (condition estimate {condition:e}); use an orthonormal frame instead")]
    RankDeficient { condition: f64 },
}

/// Orthonormal basis of the span of the retained input directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionFrame<T> {
    directions: Vec<SpectralField<T>>,
    dropped: Vec<usize>,
    input_count: usize,
}

impl<T: Real> ProjectionFrame<T> {
    pub fn directions(&self) -> &[SpectralField<T>] {
        &self.directions
    }

    pub fn retained_rank(&self) -> usize {
        self.directions.len()
    }

    /// Indices of inputs discarded as numerically dependent (or zero).
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    /// `sum_i <v, w_i> w_i`.
    pub fn project_onto_span(&self, v: &SpectralField<T>) -> SpectralField<T> {
        let mut out = SpectralField::zeros(*v.basis());
        for w in &self.directions {
            out.axpy(v.dot(w), w);
        }
        out
    }

    /// `v - sum_i <v, w_i> w_i`.
    pub fn project_tangent(&self, v: &SpectralField<T>) -> SpectralField<T> {
        v.sub(&self.project_onto_span(v))
    }
}

/// Orthonormalizes `inputs` by modified Gram-Schmidt with one reorthogonalization pass.
///
/// An input whose residual falls below `drop_tol` times its original norm is
/// dropped. All-zero inputs give an empty frame, whose tangent projector is the identity.
pub fn build_frame<T: Real>(
    inputs: &[SpectralField<T>],
    drop_tol: T,
) -> Result<ProjectionFrame<T>, ProjectionError> {
    let first = inputs.first().ok_or(ProjectionError::NoInputs)?;
    if inputs.iter().any(|f| f.basis() != first.basis()) {
        return Err(ProjectionError::BasisMismatch);
    }
    if !(drop_tol > T::zero()) {
        return Err(ProjectionError::InvalidTolerance(drop_tol.to_f64().unwrap_or(f64::NAN)));
    }

    let mut directions: Vec<SpectralField<T>> = Vec::with_capacity(inputs.len());
    let mut dropped = Vec::new();
    for (idx, input) in inputs.iter().enumerate() {
        let original = input.norm();
        if original == T::zero() {
            dropped.push(idx);
            continue;
        }
        let mut w = input.clone();
        for _pass in 0..2 {
            for q in &directions {
                let c = w.dot(q);
                w.axpy(-c, q);
            }
        }
        let residual = w.norm();
        if residual < drop_tol * original {
            dropped.push(idx);
            continue;
        }
        directions.push(w.scale(T::one() / residual));
    }
    Ok(ProjectionFrame { directions, dropped, input_count: inputs.len() })
}

/// `P v` with `P = G (G^T G)^{-1} G^T` the orthogonal projector onto `span(inputs)`.
pub fn project_via_gram<T: Real>(
    inputs: &[SpectralField<T>],
    v: &SpectralField<T>,
) -> Result<SpectralField<T>, ProjectionError> {
    let normal = NormalEquations::new(inputs)?;
    Ok(normal.project(v))
}

/// Dense projector `G (G^T G)^{-1} G^T`, for cross-checks.
pub fn gram_projector_matrix<T: Real>(
    inputs: &[SpectralField<T>],
) -> Result<Vec<Vec<T>>, ProjectionError> {
    let normal = NormalEquations::new(inputs)?;
    let dim = inputs[0].dim();
    let basis = *inputs[0].basis();
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let e = SpectralField::basis_vector(basis, j).expect("index within basis");
        cols.push(normal.project(&e));
    }
    Ok((0..dim).map(|i| (0..dim).map(|j| cols[j].coeffs()[i]).collect()).collect())
}

struct NormalEquations<T> {
    columns: Vec<SpectralField<T>>,
    // lower Cholesky factor of the Gram matrix, row-major n x n
    chol: Vec<T>,
}

impl<T: Real> NormalEquations<T> {
    fn new(inputs: &[SpectralField<T>]) -> Result<Self, ProjectionError> {
        let first = inputs.first().ok_or(ProjectionError::NoInputs)?;
        if inputs.iter().any(|f| f.basis() != first.basis()) {
            return Err(ProjectionError::BasisMismatch);
        }
        // unit columns: the projector is unchanged and the condition estimate ignores scale
        let mut columns = Vec::with_capacity(inputs.len());
        for f in inputs {
            let n = f.norm();
            if n == T::zero() {
                return Err(ProjectionError::RankDeficient { condition: f64::INFINITY });
            }
            columns.push(f.scale(T::one() / n));
        }
        let n = columns.len();
        let mut chol = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = columns[i].dot(&columns[j]);
                for k in 0..j {
                    s = s - chol[i * n + k] * chol[j * n + k];
                }
                if i == j {
                    if !(s > T::zero()) {
                        return Err(ProjectionError::RankDeficient { condition: f64::INFINITY });
                    }
                    chol[i * n + i] = s.sqrt();
                } else {
                    chol[i * n + j] = s / chol[j * n + j];
                }
            }
        }
        let diag = (0..n).map(|i| chol[i * n + i]);
        let (lo, hi) = diag.fold((T::infinity(), T::zero()), |(lo, hi), d| (lo.min(d), hi.max(d)));
        let condition = ((hi / lo) * (hi / lo)).to_f64().unwrap_or(f64::INFINITY);
        if condition > MAX_GRAM_CONDITION {
            return Err(ProjectionError::RankDeficient { condition });
        }
        Ok(Self { columns, chol })
    }

    fn project(&self, v: &SpectralField<T>) -> SpectralField<T> {
        let n = self.columns.len();
        let rhs: Vec<T> = self.columns.iter().map(|g| g.dot(v)).collect();
        // forward then backward substitution with L L^T
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let s = (0..i).fold(rhs[i], |s, k| s - self.chol[i * n + k] * y[k]);
            y[i] = s / self.chol[i * n + i];
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let s = (i + 1..n).fold(y[i], |s, k| s - self.chol[k * n + i] * x[k]);
            x[i] = s / self.chol[i * n + i];
        }
        let mut out = SpectralField::zeros(*v.basis());
        for (g, &c) in self.columns.iter().zip(&x) {
            out.axpy(c, g);
        }
        out
    }
}
