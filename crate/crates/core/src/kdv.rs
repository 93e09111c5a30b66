//! Problem definitions: the two-soliton initial condition, run setups and
//! peak diagnostics for soliton profiles.

use crate::functionals::KdvParams;
use crate::scalar::Real;
use crate::spectral::{BasisSpec, GridField, SpectralError, SpectralField, SpectralGrid};

/// Wave numbers and phase offsets of the two-soliton profile, with
/// `theta_i = k_i x + x_i` and `a^2 = ((k1 - k2) / (k1 + k2))^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSolitonParams<T> {
    k1: T,
    k2: T,
    x1: T,
    x2: T,
    amplitude: T,
}

impl<T: Real> TwoSolitonParams<T> {
    /// Returns `None` when `k1 + k2 = 0`.
    pub fn new(k1: T, k2: T, x1: T, x2: T) -> Option<Self> {
        if k1 + k2 == T::zero() {
            return None;
        }
        Some(Self { k1, k2, x1, x2, amplitude: T::one() })
    }

    /// `k1 = 0.4, k2 = 0.6, x1 = 4, x2 = 15`.
    pub fn reference() -> Self {
        Self::new(T::lit(0.4), T::lit(0.6), T::lit(4.0), T::lit(15.0)).expect("k1 + k2 != 0")
    }

    /// Scales the profile; used to build degenerate test states.
    pub fn with_amplitude(mut self, amplitude: T) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn k1(&self) -> T {
        self.k1
    }

    pub fn k2(&self) -> T {
        self.k2
    }

    pub fn x1(&self) -> T {
        self.x1
    }

    pub fn x2(&self) -> T {
        self.x2
    }

    pub fn a_squared(&self) -> T {
        let r = (self.k1 - self.k2) / (self.k1 + self.k2);
        r * r
    }
}

/// Evaluates
/// `12 [k1^2 e1 + k2^2 e2 + 2 (k2 - k1)^2 e12 + a^2 (k2^2 e1 + k1^2 e2) e12] / (1 + e1 + e2 + a^2 e12)^2`
/// with `e1 = exp(theta_1)`, `e2 = exp(theta_2)`, `e12 = e1 e2`.
///
/// All exponentials are rescaled by `exp(-max(0, theta_1, theta_2, theta_1 + theta_2))`
/// so the evaluation cannot overflow.
pub fn two_soliton_initial<T: Real>(tp: &TwoSolitonParams<T>, x: T) -> T {
    let t1 = tp.k1 * x + tp.x1;
    let t2 = tp.k2 * x + tp.x2;
    let t12 = t1 + t2;
    let shift = T::zero().max(t1).max(t2).max(t12);
    let a2 = tp.a_squared();
    let (k1s, k2s) = (tp.k1 * tp.k1, tp.k2 * tp.k2);
    let dk = tp.k2 - tp.k1;

    let denom = (-shift).exp() + (t1 - shift).exp() + (t2 - shift).exp() + a2 * (t12 - shift).exp();
    // numerator scaled by exp(-2 shift); every exponent below is at most 2 shift
    let two_shift = shift + shift;
    let numer = k1s * (t1 - two_shift).exp()
        + k2s * (t2 - two_shift).exp()
        + T::lit(2.0) * dk * dk * (t12 - two_shift).exp()
        + a2 * (k2s * (t1 + t12 - two_shift).exp() + k1s * (t2 + t12 - two_shift).exp());
    tp.amplitude * T::lit(12.0) * numer / (denom * denom)
}

/// Samples the profile on `nodes` uniform nodes and analyzes it into the basis.
pub fn project_initial<T: Real>(
    tp: &TwoSolitonParams<T>,
    spec: BasisSpec<T>,
    nodes: usize,
) -> Result<SpectralField<T>, SpectralError> {
    let grid = SpectralGrid::new(spec, nodes)?;
    let g = GridField::from_fn(spec, nodes, |x| two_soliton_initial(tp, x))?;
    grid.analyze(&g)
}

/// Default sampling density for [`project_initial`], `8N` nodes.
pub fn default_initial_nodes<T: Real>(spec: &BasisSpec<T>) -> usize {
    8 * spec.cutoff()
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition<T> {
    TwoSoliton(TwoSolitonParams<T>),
    Coefficients(Vec<T>),
}

/// A complete KdV run definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSetup<T> {
    pub params: KdvParams<T>,
    pub half_width: T,
    pub cutoff: usize,
    pub step: T,
    pub t_end: T,
    pub initial: InitialCondition<T>,
}

impl<T: Real> ProblemSetup<T> {
    /// Two solitons on `[-40, 40]` with `alpha = nu = -1`, `N = 64`, `h = 0.005`, `t in [0, 150]`.
    pub fn two_soliton_reference() -> Self {
        Self {
            params: KdvParams::new(-T::one(), -T::one()),
            half_width: T::lit(40.0),
            cutoff: 64,
            step: T::lit(0.005),
            t_end: T::lit(150.0),
            initial: InitialCondition::TwoSoliton(TwoSolitonParams::reference()),
        }
    }

    pub fn basis(&self) -> Result<BasisSpec<T>, SpectralError> {
        BasisSpec::new(self.half_width, self.cutoff)
    }

    pub fn initial_field(&self) -> Result<SpectralField<T>, SpectralError> {
        let basis = self.basis()?;
        match &self.initial {
            InitialCondition::TwoSoliton(tp) => {
                project_initial(tp, basis, default_initial_nodes(&basis))
            }
            InitialCondition::Coefficients(c) => SpectralField::new(basis, c.clone()),
        }
    }

    /// `|u0(-l) - u0(l)|`, the jump of the periodic extension of the initial profile.
    pub fn boundary_mismatch(&self) -> T {
        match &self.initial {
            InitialCondition::TwoSoliton(tp) => (two_soliton_initial(tp, -self.half_width)
                - two_soliton_initial(tp, self.half_width))
            .abs(),
            InitialCondition::Coefficients(_) => T::zero(),
        }
    }
}

/// A local maximum of a periodic grid profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub position: T,
    pub height: T,
    /// Grid node of the discrete maximum.
    pub node: usize,
}

/// Local maxima above `min_height`, treating the grid as periodic.
///
/// Each discrete maximum is refined by fitting a parabola through it and its
/// two neighbours. Sorted by position in `[-l, l)`.
pub fn find_peaks<T: Real>(g: &GridField<T>, min_height: T) -> Vec<Peak<T>> {
    let v = g.values();
    let n = v.len();
    let l = g.basis().half_width();
    let dx = g.weight();
    let mut peaks = Vec::new();
    for i in 0..n {
        let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
        if !(b > a && b >= c && b > min_height) {
            continue;
        }
        let curv = a - T::lit(2.0) * b + c;
        let offset = if curv < T::zero() { T::lit(0.5) * (a - c) / curv } else { T::zero() };
        let height = b - T::lit(0.25) * (a - c) * offset;
        let mut position = -l + dx * (T::from_count(i) + offset);
        if position < -l {
            position = position + l + l;
        } else if position >= l {
            position = position - l - l;
        }
        peaks.push(Peak { position, height, node: i });
    }
    peaks.sort_by(|p, q| p.position.partial_cmp(&q.position).expect("finite positions"));
    peaks
}

/// Lowest grid value on the periodic arc from `from` to `to` (inclusive, increasing node index).
pub fn trough_between<T: Real>(g: &GridField<T>, from: &Peak<T>, to: &Peak<T>) -> T {
    let v = g.values();
    let n = v.len();
    let span = (to.node + n - from.node) % n;
    (0..=span).map(|k| v[(from.node + k) % n]).fold(T::infinity(), T::min)
}

/// Whether two adjacent peaks form a single hump: the trough between them
/// stays above half the lower peak height, so they are not resolved at half maximum.
pub fn peaks_merged<T: Real>(g: &GridField<T>, a: &Peak<T>, b: &Peak<T>) -> bool {
    let (left, right) = if a.node <= b.node { (a, b) } else { (b, a) };
    let trough = trough_between(g, left, right);
    trough > T::lit(0.5) * left.height.min(right.height)
}
