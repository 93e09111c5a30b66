//! Orthonormal trigonometric basis on `[-l, l]`, coefficient/grid transforms,
//! uniform-node quadrature and the skew differentiation operator.
//!
//! Coefficients are ordered `(cos 0; sin 1, cos 1; sin 2, cos 2; ...)` so that
//! mode `k` occupies indices `2k - 1` (sine) and `2k` (cosine). With the phase
//! `theta = (x + l) * pi / l` the basis functions are
//!
//! ```text
//! w_0(x)      = sqrt(1 / (2l))
//! w_{2k-1}(x) = sqrt(1 / l) * sin(k * theta)
//! w_{2k}(x)   = sqrt(1 / l) * cos(k * theta)
//! ```
//!
//! and they are orthonormal in `L2[-l, l]`.

use thiserror::Error;

use crate::scalar::{self, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("domain half-width must be positive and finite, got {0}")]
    InvalidHalfWidth(f64),
    #[error("frequency cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("{nodes} quadrature nodes is below the minimum {min} for cutoff {cutoff}")]
    TooFewNodes { nodes: usize, min: usize, cutoff: usize },
    #[error("grid fields live on different bases or node counts")]
    GridMismatch,
}

/// Truncated basis: half-width `l` and frequency cutoff `N`, spanning `2N + 1` functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec<T> {
    half_width: T,
    cutoff: usize,
}

impl<T: Real> BasisSpec<T> {
    pub fn new(half_width: T, cutoff: usize) -> Result<Self, SpectralError> {
        if !(half_width.is_finite() && half_width > T::zero()) {
            return Err(SpectralError::InvalidHalfWidth(
                half_width.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if cutoff < 1 {
            return Err(SpectralError::InvalidCutoff(cutoff));
        }
        Ok(Self { half_width, cutoff })
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Number of coefficients, `2N + 1`.
    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    /// Angular wavenumber `k * pi / l` of mode `k`.
    pub fn wavenumber(&self, mode: usize) -> T {
        T::from_count(mode) * T::PI() / self.half_width
    }

    /// Smallest node count for which cubic products of fields are integrated exactly.
    pub fn min_nodes(&self) -> usize {
        3 * self.cutoff + 2
    }

    /// Default quadrature node count, `4 (N + 1)`.
    pub fn default_nodes(&self) -> usize {
        4 * (self.cutoff + 1)
    }

    fn check_index(&self, j: usize) -> Result<(), SpectralError> {
        if j < self.dim() {
            Ok(())
        } else {
            Err(SpectralError::IndexOutOfRange { index: j, dim: self.dim() })
        }
    }
}

/// Evaluates the basis function `w_j` at position `x`.
pub fn basis_eval<T: Real>(spec: &BasisSpec<T>, j: usize, x: T) -> Result<T, SpectralError> {
    spec.check_index(j)?;
    Ok(eval_unchecked(spec, j, x))
}

fn eval_unchecked<T: Real>(spec: &BasisSpec<T>, j: usize, x: T) -> T {
    let l = spec.half_width;
    if j == 0 {
        return (T::one() / (T::lit(2.0) * l)).sqrt();
    }
    let mode = j.div_ceil(2);
    let phase = T::from_count(mode) * (x + l) * T::PI() / l;
    let amp = (T::one() / l).sqrt();
    if j % 2 == 1 {
        amp * phase.sin()
    } else {
        amp * phase.cos()
    }
}

/// Coefficient vector of a function in the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    basis: BasisSpec<T>,
    coeffs: Vec<T>,
}

impl<T: Real> SpectralField<T> {
    pub fn new(basis: BasisSpec<T>, coeffs: Vec<T>) -> Result<Self, SpectralError> {
        if coeffs.len() != basis.dim() {
            return Err(SpectralError::LengthMismatch {
                expected: basis.dim(),
                found: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(SpectralError::NonFinite(i));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zeros(basis: BasisSpec<T>) -> Self {
        Self { basis, coeffs: vec![T::zero(); basis.dim()] }
    }

    /// The unit coefficient vector `e_j`.
    pub fn basis_vector(basis: BasisSpec<T>, j: usize) -> Result<Self, SpectralError> {
        basis.check_index(j)?;
        let mut f = Self::zeros(basis);
        f.coeffs[j] = T::one();
        Ok(f)
    }

    pub(crate) fn from_vec_unchecked(basis: BasisSpec<T>, coeffs: Vec<T>) -> Self {
        debug_assert_eq!(coeffs.len(), basis.dim());
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> &BasisSpec<T> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Coefficient-space dot product; equals the `L2` inner product by Parseval.
    pub fn dot(&self, other: &Self) -> T {
        self.check_same(other);
        scalar::dot(&self.coeffs, &other.coeffs)
    }

    pub fn norm(&self) -> T {
        scalar::norm(&self.coeffs)
    }

    pub fn max_abs(&self) -> T {
        scalar::max_abs(&self.coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|a| a * factor)
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: T, other: &Self) {
        self.check_same(other);
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = *a + factor * b;
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_vec_unchecked(self.basis, self.coeffs.iter().map(|&a| f(a)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        self.check_same(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect();
        Self::from_vec_unchecked(self.basis, coeffs)
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "fields on different bases");
    }
}

/// Function values at the uniform nodes `x_m = -l + 2 l m / M`, `m = 0..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    basis: BasisSpec<T>,
    values: Vec<T>,
}

impl<T: Real> GridField<T> {
    pub fn new(basis: BasisSpec<T>, values: Vec<T>) -> Result<Self, SpectralError> {
        check_nodes(&basis, values.len())?;
        Ok(Self { basis, values })
    }

    /// Samples `f` at the `nodes` uniform positions.
    pub fn from_fn(
        basis: BasisSpec<T>,
        nodes: usize,
        f: impl Fn(T) -> T,
    ) -> Result<Self, SpectralError> {
        check_nodes(&basis, nodes)?;
        let values = (0..nodes).map(|m| f(node_position(&basis, nodes, m))).collect();
        Ok(Self { basis, values })
    }

    pub fn basis(&self) -> &BasisSpec<T> {
        &self.basis
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn positions(&self) -> Vec<T> {
        (0..self.values.len())
            .map(|m| node_position(&self.basis, self.values.len(), m))
            .collect()
    }

    /// Quadrature weight `2l / M` shared by all nodes.
    pub fn weight(&self) -> T {
        node_weight(&self.basis, self.values.len())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self, SpectralError> {
        if self.basis != other.basis || self.values.len() != other.values.len() {
            return Err(SpectralError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { basis: self.basis, values })
    }
}

fn check_nodes<T: Real>(basis: &BasisSpec<T>, nodes: usize) -> Result<(), SpectralError> {
    if nodes < basis.min_nodes() {
        return Err(SpectralError::TooFewNodes {
            nodes,
            min: basis.min_nodes(),
            cutoff: basis.cutoff(),
        });
    }
    Ok(())
}

fn node_position<T: Real>(basis: &BasisSpec<T>, nodes: usize, m: usize) -> T {
    let l = basis.half_width();
    -l + T::lit(2.0) * l * T::from_count(m) / T::from_count(nodes)
}

fn node_weight<T: Real>(basis: &BasisSpec<T>, nodes: usize) -> T {
    T::lit(2.0) * basis.half_width() / T::from_count(nodes)
}

/// Uniform-weight quadrature of `f * g` over `[-l, l]`.
///
/// Exact for trigonometric integrands whose combined frequency is below `M`.
pub fn inner_product<T: Real>(f: &GridField<T>, g: &GridField<T>) -> Result<T, SpectralError> {
    if f.basis != g.basis || f.values.len() != g.values.len() {
        return Err(SpectralError::GridMismatch);
    }
    Ok(f.weight() * scalar::dot(&f.values, &g.values))
}

/// Precomputed basis table for repeated transforms at a fixed node count.
///
/// Transforms are direct sums, `O(dim * M)` each.
#[derive(Debug, Clone)]
pub struct SpectralGrid<T> {
    basis: BasisSpec<T>,
    nodes: usize,
    // row-major, one row of `dim` basis values per node
    table: Vec<T>,
}

impl<T: Real> SpectralGrid<T> {
    pub fn new(basis: BasisSpec<T>, nodes: usize) -> Result<Self, SpectralError> {
        check_nodes(&basis, nodes)?;
        let dim = basis.dim();
        let mut table = Vec::with_capacity(nodes * dim);
        for m in 0..nodes {
            let x = node_position(&basis, nodes, m);
            table.extend((0..dim).map(|j| eval_unchecked(&basis, j, x)));
        }
        Ok(Self { basis, nodes, table })
    }

    pub fn with_default_nodes(basis: BasisSpec<T>) -> Self {
        Self::new(basis, basis.default_nodes()).expect("default node count is admissible")
    }

    pub fn basis(&self) -> &BasisSpec<T> {
        &self.basis
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn weight(&self) -> T {
        node_weight(&self.basis, self.nodes)
    }

    pub fn positions(&self) -> Vec<T> {
        (0..self.nodes).map(|m| node_position(&self.basis, self.nodes, m)).collect()
    }

    pub fn synthesize(&self, u: &SpectralField<T>) -> GridField<T> {
        GridField { basis: self.basis, values: self.synthesize_values(u.coeffs()) }
    }

    pub(crate) fn synthesize_values(&self, coeffs: &[T]) -> Vec<T> {
        let dim = self.basis.dim();
        assert_eq!(coeffs.len(), dim, "coefficient length does not match basis");
        self.table.chunks_exact(dim).map(|row| scalar::dot(row, coeffs)).collect()
    }

    /// Projects grid samples onto the basis by quadrature.
    pub fn analyze(&self, g: &GridField<T>) -> Result<SpectralField<T>, SpectralError> {
        if g.basis != self.basis || g.values.len() != self.nodes {
            return Err(SpectralError::GridMismatch);
        }
        Ok(SpectralField::from_vec_unchecked(self.basis, self.analyze_values(&g.values)))
    }

    pub(crate) fn analyze_values(&self, values: &[T]) -> Vec<T> {
        let dim = self.basis.dim();
        assert_eq!(values.len(), self.nodes, "grid length does not match node count");
        let mut out = vec![T::zero(); dim];
        for (row, &v) in self.table.chunks_exact(dim).zip(values) {
            for (o, &b) in out.iter_mut().zip(row) {
                *o = *o + b * v;
            }
        }
        let w = self.weight();
        out.iter_mut().for_each(|o| *o = *o * w);
        out
    }
}

/// `values[m] = sum_j coeffs[j] * w_j(x_m)` on `nodes` uniform nodes.
pub fn synthesize<T: Real>(u: &SpectralField<T>, nodes: usize) -> Result<GridField<T>, SpectralError> {
    Ok(SpectralGrid::new(u.basis, nodes)?.synthesize(u))
}

/// Quadrature projection of grid samples onto the basis.
pub fn analyze<T: Real>(g: &GridField<T>) -> Result<SpectralField<T>, SpectralError> {
    SpectralGrid::new(g.basis, g.values.len())?.analyze(g)
}

/// The block-diagonal skew matrix `D` with `w' = D w`.
///
/// `D = diag(0, (pi/l) 1 J, (pi/l) 2 J, ...)` with `J = [[0, 1], [-1, 0]]`.
/// Since `u_x = w^T D^T u`, coefficient-space differentiation is `D^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffMatrix<T> {
    basis: BasisSpec<T>,
}

impl<T: Real> DiffMatrix<T> {
    pub fn new(basis: BasisSpec<T>) -> Self {
        Self { basis }
    }

    pub fn basis(&self) -> &BasisSpec<T> {
        &self.basis
    }

    /// `D u`.
    pub fn apply(&self, u: &SpectralField<T>) -> SpectralField<T> {
        self.blockwise(u, false, |k, s, c| (k * c, -k * s))
    }

    /// `D^T u`, the coefficients of `d/dx` of the field.
    pub fn apply_transpose(&self, u: &SpectralField<T>) -> SpectralField<T> {
        self.blockwise(u, false, |k, s, c| (-k * c, k * s))
    }

    /// `(D^T)^order u`, the coefficients of the `order`-th derivative.
    pub fn apply_derivative(&self, u: &SpectralField<T>, order: u32) -> SpectralField<T> {
        // (D^T)^order restricted to a mode block is k^order times a rotation by order * 90 deg
        let quarter = order % 4;
        self.blockwise(u, order == 0, |k, s, c| {
            let f = k.powi(order as i32);
            match quarter {
                0 => (f * s, f * c),
                1 => (-f * c, f * s),
                2 => (-f * s, -f * c),
                _ => (f * c, -f * s),
            }
        })
    }

    /// Solves `(I - shift * (D^T)^3) x = rhs` block by block.
    ///
    /// On mode `k` the operator is `[[1, -a], [a, 1]]` with `a = shift * kappa^3`,
    /// which is always invertible.
    pub fn solve_shifted_cube(&self, shift: T, rhs: &SpectralField<T>) -> SpectralField<T> {
        self.blockwise(rhs, true, |k, s, c| {
            let a = shift * k * k * k;
            let det = T::one() + a * a;
            ((s + a * c) / det, (c - a * s) / det)
        })
    }

    /// Dense `D`, for cross-checks only.
    pub fn dense(&self) -> Vec<Vec<T>> {
        let dim = self.basis.dim();
        let mut d = vec![vec![T::zero(); dim]; dim];
        for mode in 1..=self.basis.cutoff() {
            let k = self.basis.wavenumber(mode);
            let (s, c) = (2 * mode - 1, 2 * mode);
            d[s][c] = k;
            d[c][s] = -k;
        }
        d
    }

    fn blockwise(
        &self,
        u: &SpectralField<T>,
        keep_constant: bool,
        op: impl Fn(T, T, T) -> (T, T),
    ) -> SpectralField<T> {
        assert_eq!(u.dim(), self.basis.dim(), "field does not match operator basis");
        let src = u.coeffs();
        let mut out = vec![T::zero(); src.len()];
        for mode in 1..=self.basis.cutoff() {
            let k = self.basis.wavenumber(mode);
            let (s, c) = (2 * mode - 1, 2 * mode);
            let (ns, nc) = op(k, src[s], src[c]);
            out[s] = ns;
            out[c] = nc;
        }
        if keep_constant {
            out[0] = src[0];
        }
        SpectralField::from_vec_unchecked(self.basis, out)
    }
}

/// `(D^T)^order u`.
pub fn apply_derivative<T: Real>(u: &SpectralField<T>, order: u32) -> SpectralField<T> {
    DiffMatrix::new(u.basis).apply_derivative(u, order)
}
