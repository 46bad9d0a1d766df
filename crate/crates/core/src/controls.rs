//! Admissible controls as finite Fourier coefficient vectors, their energies,
//! and the bilinear pairing `(u, v) -> z(1)` through a matrix representation.
//!
//! The two agents use dual trigonometric conventions so that the pairing
//! matrix of the Heisenberg plant comes out diagonal:
//!
//! ```text
//! u(t) = sqrt(2) * sum_k [ a_{2k-1} sin(2 pi k t) + a_{2k} cos(2 pi k t) ]
//! v(t) = sqrt(2) * sum_k [ -b_{2k-1} cos(2 pi k t) + b_{2k} sin(2 pi k t) ]
//! ```
//!
//! With those conventions the plant output after one unit round is
//! `sum_k (a_{2k-1} b_{2k-1} + a_{2k} b_{2k}) / (pi k)`, i.e. the diagonal map
//! with entries `1 / (pi * ceil(k/2))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix, DEFAULT_RANK_TOL};

/// Which agent a control belongs to; the role fixes the trigonometric basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
}

/// A control in the span of the paired sine/cosine basis, stored as its
/// coefficient vector. Energy over one round is the squared coefficient norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    pub role: Role,
    coeffs: Vec<f64>,
}

impl ControlSignal {
    pub fn new(role: Role, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("control needs at least one coefficient".into()));
        }
        if !coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("control coefficients must be finite".into()));
        }
        Ok(ControlSignal { role, coeffs })
    }

    /// The all-zero control of length 1.
    pub fn zero(role: Role) -> Self {
        ControlSignal { role, coeffs: vec![0.0] }
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Point evaluation at `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        let mut acc = 0.0;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let k = (idx / 2 + 1) as f64;
            let phase = 2.0 * PI * k * t;
            let basis = match (self.role, idx % 2) {
                (Role::Alice, 0) => phase.sin(),
                (Role::Alice, 1) => phase.cos(),
                (Role::Bob, 0) => -phase.cos(),
                (Role::Bob, 1) => phase.sin(),
                _ => unreachable!(),
            };
            acc += c * basis;
        }
        std::f64::consts::SQRT_2 * acc
    }

    /// Control energy over one round: the sum of squared coefficients, equal
    /// to the quadrature of `eval^2` over `[0, 1]`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Coefficient-vector Euclidean norm.
    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }
}

/// How a [`BilinearMap`]'s matrix is to be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// An arbitrary finite truncation; the stored matrix is all there is.
    Generic,
    /// The diagonal Heisenberg-plant representation with entries
    /// `1 / (pi * ceil(k/2))`; extends past the stored truncation.
    DiagonalBh,
}

/// Matrix representation of a bilinear input-output functional over the
/// paired control bases.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearMap {
    repr: Matrix,
    kind: MapKind,
    declared_norm: Option<f64>,
}

/// Diagonal entry `1 / (pi * ceil(k/2))` of the Heisenberg representation,
/// `k` zero-based.
#[inline]
pub fn bh_sigma(k: usize) -> f64 {
    1.0 / (PI * (k / 2 + 1) as f64)
}

impl BilinearMap {
    /// Wrap a square matrix as a generic representation.
    pub fn new_generic(repr: Matrix, declared_norm: Option<f64>) -> Result<Self> {
        if !repr.is_square() {
            return Err(Error::InvalidInput("map representation must be square".into()));
        }
        Ok(BilinearMap { repr, kind: MapKind::Generic, declared_norm })
    }

    /// The `l x l` truncation of the Heisenberg representation.
    ///
    /// ```
    /// use ccx_core::controls::BilinearMap;
    /// use std::f64::consts::PI;
    ///
    /// let f = BilinearMap::fb(4);
    /// let s = f.sigmas();
    /// assert!((s[0] - 1.0 / PI).abs() < 1e-15);
    /// assert!((s[3] - 1.0 / (2.0 * PI)).abs() < 1e-15);
    /// ```
    pub fn fb(l: usize) -> Self {
        assert!(l >= 1, "truncation dimension must be at least 1");
        let repr = Matrix::from_fn(l, l, |i, j| if i == j { bh_sigma(i) } else { 0.0 });
        BilinearMap { repr, kind: MapKind::DiagonalBh, declared_norm: Some(1.0 / PI) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.repr.rows()
    }

    #[inline]
    pub fn kind(&self) -> MapKind {
        self.kind
    }

    #[inline]
    pub fn repr(&self) -> &Matrix {
        &self.repr
    }

    #[inline]
    pub fn declared_norm(&self) -> Option<f64> {
        self.declared_norm
    }

    /// Singular values of the stored truncation, descending. Analytic for the
    /// diagonal Heisenberg kind.
    pub fn sigmas(&self) -> Vec<f64> {
        match self.kind {
            MapKind::DiagonalBh => (0..self.dim()).map(bh_sigma).collect(),
            MapKind::Generic => svd(&self.repr).expect("finite map").singular_values,
        }
    }

    /// `sigma_k` (zero-based) of the full map: defined for every `k` for the
    /// Heisenberg kind, and only up to the truncation otherwise.
    pub fn sigma(&self, k: usize) -> Option<f64> {
        match self.kind {
            MapKind::DiagonalBh => Some(bh_sigma(k)),
            MapKind::Generic => self.sigmas().get(k).copied(),
        }
    }

    /// Largest singular value.
    pub fn sigma_max(&self) -> f64 {
        match self.kind {
            MapKind::DiagonalBh => 1.0 / PI,
            MapKind::Generic => self.sigmas()[0],
        }
    }

    /// Rank of the represented functional: unbounded for the Heisenberg kind,
    /// numerical rank of the truncation otherwise.
    pub fn rank(&self) -> Option<usize> {
        match self.kind {
            MapKind::DiagonalBh => None,
            MapKind::Generic => Some(crate::linalg::numerical_rank(&self.repr, DEFAULT_RANK_TOL)),
        }
    }

    /// Leading principal minors up to the rank are nonsingular.
    pub fn is_regular(&self) -> bool {
        match self.kind {
            MapKind::DiagonalBh => true,
            MapKind::Generic => {
                let r = crate::linalg::numerical_rank(&self.repr, DEFAULT_RANK_TOL);
                let scale = self.repr.max_abs().max(1.0);
                (1..=r).all(|j| {
                    let minor = self.repr.leading_block(j);
                    let sigma = svd(&minor).expect("finite minor").singular_values;
                    sigma[j - 1] > 1e-12 * scale
                })
            }
        }
    }

    /// Diagonal with positive, non-increasing entries.
    pub fn is_strongly_regular(&self) -> bool {
        if self.kind == MapKind::DiagonalBh {
            return true;
        }
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.repr[(i, j)] != 0.0 {
                    return false;
                }
            }
        }
        (0..n).all(|i| self.repr[(i, i)] > 0.0)
            && (1..n).all(|i| self.repr[(i - 1, i - 1)] >= self.repr[(i, i)])
    }

    /// True iff every singular value of the stored truncation stays within the
    /// declared operator norm (`sigma_i <= norm + 1e-12`).
    pub fn norm_bound_check(&self) -> Result<bool> {
        let bound = self
            .declared_norm
            .ok_or_else(|| Error::InvalidInput("map has no declared norm".into()))?;
        Ok(self.sigmas().iter().all(|&s| s <= bound + 1e-12))
    }
}

/// Plant output `u^T F v` after one round, zero-padding the shorter
/// coefficient vector. For the diagonal Heisenberg kind the series extends
/// past the stored truncation, so any coefficient lengths are accepted.
///
/// ```
/// use ccx_core::controls::{pair_output, BilinearMap, ControlSignal, Role};
/// use std::f64::consts::PI;
///
/// let u = ControlSignal::new(Role::Alice, vec![1.0]).unwrap();
/// let v = ControlSignal::new(Role::Bob, vec![1.0]).unwrap();
/// let z = pair_output(&u, &v, &BilinearMap::fb(2));
/// assert!((z - 1.0 / PI).abs() < 1e-15);
/// ```
pub fn pair_output(u: &ControlSignal, v: &ControlSignal, f: &BilinearMap) -> f64 {
    assert_eq!(u.role, Role::Alice, "first argument must be an Alice control");
    assert_eq!(v.role, Role::Bob, "second argument must be a Bob control");
    match f.kind {
        MapKind::DiagonalBh => {
            let n = u.len().min(v.len());
            (0..n).map(|i| u.coeffs[i] * v.coeffs[i] * bh_sigma(i)).sum()
        }
        MapKind::Generic => {
            assert!(
                u.len() <= f.dim() && v.len() <= f.dim(),
                "coefficient vectors exceed the map truncation"
            );
            let mut acc = 0.0;
            for (i, &a) in u.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, &b) in v.coeffs.iter().enumerate() {
                    acc += a * f.repr[(i, j)] * b;
                }
            }
            acc
        }
    }
}

/// Composite Simpson quadrature of `g` over `[0, 1]` with `2 * half_intervals`
/// panels. Used to cross-check coefficient energies against the time domain.
pub fn simpson_unit_interval(g: impl Fn(f64) -> f64, half_intervals: usize) -> f64 {
    let n = 2 * half_intervals.max(1);
    let h = 1.0 / n as f64;
    let mut acc = g(0.0) + g(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    acc * h / 3.0
}
