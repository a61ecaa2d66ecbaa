//! Truncated `|j, m=0⟩` rotor basis and the operators living on it.
//!
//! Indices are 0-based: row `j` is the rotational level `j = 0, 1, …, dim-1`.
//! Every operator here is the exact projection `P O P` of the corresponding
//! infinite-dimensional operator onto the first `dim` levels.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{cabs, cre, Real, C};
use crate::propagator::KickKind;

/// Default dimension of the large reference basis used for "exact" propagation.
pub const DEFAULT_N_EXACT: usize = 40;

/// Control-subspace dimension `N` and reference-basis dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub n_control: usize,
    pub n_exact: usize,
}

impl BasisSpec {
    pub fn new(n_control: usize, n_exact: usize) -> Result<Self> {
        if n_control < 2 {
            return Err(Error::config("n_control", "must be at least 2"));
        }
        if n_exact <= n_control {
            return Err(Error::config(
                "n_exact",
                format!("must exceed n_control ({n_exact} <= {n_control})"),
            ));
        }
        Ok(Self { n_control, n_exact })
    }

    pub fn with_control(n_control: usize) -> Result<Self> {
        Self::new(n_control, DEFAULT_N_EXACT)
    }
}

/// Dense Hermitian matrix on the truncated rotor basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorOperator<T: Real> {
    matrix: DMatrix<C<T>>,
}

impl<T: Real> RotorOperator<T> {
    /// Wraps a matrix after checking it is square and Hermitian to `1e-12`.
    pub fn from_matrix(matrix: DMatrix<C<T>>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "operator must have dimension >= 1",
            });
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > T::tol(1e-12) {
            return Err(Error::NotHermitian {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_real_symmetric(matrix: DMatrix<T>) -> Self {
        let sym = (&matrix + matrix.transpose()) * T::lit(0.5);
        Self {
            matrix: sym.map(cre),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C<T>> {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C<T> {
        self.matrix[(row, col)]
    }

    /// Top-left `dim × dim` block (the projection onto fewer levels).
    pub fn block(&self, dim: usize) -> Result<Self> {
        if dim == 0 || dim > self.dim() {
            return Err(Error::InvalidDimension {
                dim,
                reason: "block must fit inside the operator",
            });
        }
        Ok(Self {
            matrix: self.matrix.view((0, 0), (dim, dim)).into_owned(),
        })
    }

    /// Sorted eigenvalues.
    pub fn spectrum(&self) -> Vec<T> {
        let mut values: Vec<T> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
        values
    }
}

pub(crate) fn hermitian_deviation<T: Real>(m: &DMatrix<C<T>>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = cabs(m[(i, j)] - m[(j, i)].conj());
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Normalized complex amplitude vector over `|j, m=0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorState<T: Real> {
    amplitudes: DVector<C<T>>,
}

impl<T: Real> RotorState<T> {
    /// Accepts amplitudes whose Euclidean norm is 1 to within `1e-12`.
    pub fn from_amplitudes(amplitudes: DVector<C<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "state must have dimension >= 1",
            });
        }
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotNormalized {
                norm: norm.as_f64(),
            });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: DVector<C<T>>) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || norm <= T::zero() || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm: norm.as_f64(),
            });
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::normalized(DVector::from_iterator(
            coefficients.len(),
            coefficients.iter().map(|&c| cre(T::lit(c))),
        ))
    }

    /// The rotational eigenstate `|j, m=0⟩` in a `dim`-level basis.
    pub fn level(dim: usize, j: usize) -> Result<Self> {
        if j >= dim {
            return Err(Error::InvalidDimension {
                dim,
                reason: "level index must be below the dimension",
            });
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[j] = C::new(T::one(), T::zero());
        Ok(Self { amplitudes })
    }

    /// Rotor ground state `|0, 0⟩`.
    pub fn ground(dim: usize) -> Result<Self> {
        Self::level(dim, 0)
    }

    /// Result of a unitary map; skips the norm check.
    pub(crate) fn from_unitary_image(amplitudes: DVector<C<T>>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C<T>> {
        &self.amplitudes
    }

    pub fn amplitude(&self, j: usize) -> C<T> {
        self.amplitudes[j]
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    /// Population of level `j`.
    pub fn population(&self, j: usize) -> T {
        self.amplitudes[j].norm_sqr()
    }

    /// Population in levels `j >= from`.
    pub fn population_above(&self, from: usize) -> T {
        self.amplitudes
            .iter()
            .skip(from)
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<C<T>> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Applies a matrix assumed unitary.
    pub fn apply(&self, unitary: &DMatrix<C<T>>) -> Result<Self> {
        check_dims(unitary.ncols(), self.dim())?;
        Ok(Self::from_unitary_image(unitary * &self.amplitudes))
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidDimension {
            dim,
            reason: "basis dimension must be >= 1",
        })
    } else {
        Ok(())
    }
}

/// Rotational energy `j(j+1)` of level `j` (units of `B`).
pub fn level_energy<T: Real>(j: usize) -> T {
    T::lit((j * (j + 1)) as f64)
}

/// `⟨j|cosθ|j+1⟩ = (j+1)/√((2j+1)(2j+3))` for `m = 0`.
pub fn cos_coupling<T: Real>(j: usize) -> T {
    let j = j as f64;
    T::lit((j + 1.0) / ((2.0 * j + 1.0) * (2.0 * j + 3.0)).sqrt())
}

fn real_cos<T: Real>(dim: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim.saturating_sub(1) {
        let d = cos_coupling::<T>(j);
        m[(j, j + 1)] = d;
        m[(j + 1, j)] = d;
    }
    m
}

/// `J²` restricted to `dim` levels: `diag(0, 2, 6, …)`.
pub fn build_j2<T: Real>(dim: usize) -> Result<RotorOperator<T>> {
    check_dim(dim)?;
    Ok(RotorOperator::from_real_symmetric(DMatrix::from_diagonal(
        &DVector::from_iterator(dim, (0..dim).map(level_energy::<T>)),
    )))
}

/// Projected `cosθ`: tridiagonal, zero diagonal.
pub fn build_cos<T: Real>(dim: usize) -> Result<RotorOperator<T>> {
    check_dim(dim)?;
    Ok(RotorOperator::from_real_symmetric(real_cos(dim)))
}

/// Projected `cos^power θ`, exact: the block of the `cosθ` power built on
/// `dim + power/2` levels, so no intermediate level is lost.
pub fn build_cos_power<T: Real>(dim: usize, power: u32) -> Result<RotorOperator<T>> {
    check_dim(dim)?;
    let big = dim + power as usize / 2;
    let c = real_cos::<T>(big);
    let mut acc = DMatrix::<T>::identity(big, big);
    for _ in 0..power {
        acc = &acc * &c;
    }
    Ok(RotorOperator::from_real_symmetric(
        acc.view((0, 0), (dim, dim)).into_owned(),
    ))
}

/// Projected `cos²θ` (pentadiagonal).
pub fn build_cos2<T: Real>(dim: usize) -> Result<RotorOperator<T>> {
    build_cos_power(dim, 2)
}

/// Projected `sin²2θ = 4(cos²θ − cos⁴θ)`.
pub fn build_sin2_2theta<T: Real>(dim: usize) -> Result<RotorOperator<T>> {
    let c2 = build_cos_power::<T>(dim, 2)?;
    let c4 = build_cos_power::<T>(dim, 4)?;
    Ok(RotorOperator {
        matrix: (c2.matrix - c4.matrix) * cre(T::lit(4.0)),
    })
}

/// Matrix of `σ_θ = sinθ ∂/∂θ`, from `[J², cosθ] = 2(σ_θ + cosθ)`.
///
/// Not Hermitian (it is real with `σ + σᵀ = −2 cos²θ + …`), so it is returned
/// as a bare matrix.
pub fn build_sigma_theta<T: Real>(dim: usize) -> Result<DMatrix<C<T>>> {
    check_dim(dim)?;
    let c = real_cos::<T>(dim);
    let half = T::lit(0.5);
    Ok(DMatrix::from_fn(dim, dim, |j, k| {
        let gap = level_energy::<T>(j) - level_energy::<T>(k);
        cre((half * gap - T::one()) * c[(j, k)])
    }))
}

/// The controlled observable for a kick kind: `cosθ` or `cos²θ`.
pub fn observable<T: Real>(kind: KickKind, dim: usize) -> Result<RotorOperator<T>> {
    match kind {
        KickKind::Orientation => build_cos(dim),
        KickKind::Alignment => build_cos2(dim),
    }
}

/// `⟨ψ|O|ψ⟩` for a normalized state.
pub fn expectation<T: Real>(state: &RotorState<T>, op: &RotorOperator<T>) -> Result<T> {
    check_dims(op.dim(), state.dim())?;
    let norm = state.norm();
    if (norm - T::one()).abs() > T::tol(1e-9) {
        return Err(Error::NotNormalized {
            norm: norm.as_f64(),
        });
    }
    Ok(quadratic_form(state.amplitudes(), op.matrix()).re)
}

/// `⟨ψ|M|ψ⟩` for any square matrix, without checks.
pub(crate) fn quadratic_form<T: Real>(psi: &DVector<C<T>>, m: &DMatrix<C<T>>) -> C<T> {
    psi.dotc(&(m * psi))
}

/// Moves a state to another basis size. Enlarging zero-pads; truncating
/// renormalizes and reports the discarded population as `leak`.
pub fn embed_or_truncate<T: Real>(state: &RotorState<T>, new_dim: usize) -> Result<(RotorState<T>, T)> {
    check_dim(new_dim)?;
    let old = state.dim();
    if new_dim >= old {
        let mut amplitudes = DVector::zeros(new_dim);
        amplitudes.rows_mut(0, old).copy_from(state.amplitudes());
        return Ok((RotorState { amplitudes }, T::zero()));
    }
    let kept = state.amplitudes().rows(0, new_dim).into_owned();
    let leak = state.population_above(new_dim);
    Ok((RotorState::normalized(kept)?, leak))
}
