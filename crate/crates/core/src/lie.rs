//! Controllability and fixed-point algebra: the Lie closure of `{iH₀, iH_I}`,
//! the space spanned by `adⁿ(H₀, O)`, and the equally-spaced-spectrum test.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::{build_j2, check_dims, observable, RotorOperator};
use crate::error::{Error, Result};
use crate::num::{cabs, Real, C};
use crate::propagator::{commutator, KickKind};

/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

const SPACING_TOL: f64 = 1e-9;

/// `i·adⁿ(H₀, O)` for `n = 1..=depth`, where `ad⁰ = H₀` and
/// `adⁿ = [adⁿ⁻¹, O]`.
pub fn ad_sequence<T: Real>(h0: &RotorOperator<T>, obs: &RotorOperator<T>, depth: usize) -> Result<Vec<DMatrix<C<T>>>> {
    check_dims(h0.dim(), obs.dim())?;
    if depth < 1 {
        return Err(Error::Empty("ad-sequence depth"));
    }
    let i = C::new(T::zero(), T::one());
    let mut current = h0.matrix().clone();
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        current = commutator(&current, obs.matrix());
        out.push(&current * i);
    }
    Ok(out)
}

fn flatten<T: Real>(m: &DMatrix<C<T>>) -> DVector<T> {
    let n = m.len();
    DVector::from_fn(2 * n, |k, _| if k < n { m[k].re } else { m[k - n].im })
}

fn count_above<T: Real>(sv: &DVector<T>, rel: f64) -> usize {
    let top = sv.iter().fold(T::zero(), |m, &v| m.max(v));
    if top == T::zero() {
        return 0;
    }
    let cut = top * T::tol(rel);
    sv.iter().filter(|&&v| v > cut).count()
}

fn singular_values<T: Real>(matrices: &[DMatrix<C<T>>]) -> Result<DVector<T>> {
    let first = matrices.first().ok_or(Error::Empty("matrix list"))?;
    let shape = first.shape();
    if matrices.iter().any(|m| m.shape() != shape) {
        return Err(Error::ShapeMismatch);
    }
    let columns: Vec<DVector<T>> = matrices
        .iter()
        .map(flatten)
        .filter_map(|v| {
            let n = v.norm();
            (n > T::zero()).then(|| v / n)
        })
        .collect();
    if columns.is_empty() {
        return Ok(DVector::zeros(0));
    }
    Ok(DMatrix::from_columns(&columns).singular_values())
}

/// Dimension of the real span of `matrices`, each read as the real vector of
/// its real parts followed by its imaginary parts. Columns are normalized and
/// singular values above `1e-10·σ_max` are counted; the count must not change
/// when the threshold is moved by a factor of ten either way.
pub fn real_span_rank<T: Real>(matrices: &[DMatrix<C<T>>]) -> Result<usize> {
    let sv = singular_values(matrices)?;
    let rank = count_above(&sv, RANK_TOL);
    let low = count_above(&sv, RANK_TOL * 10.0);
    let high = count_above(&sv, RANK_TOL / 10.0);
    if low != rank || high != rank {
        return Err(Error::UnstableRank { low, high });
    }
    Ok(rank)
}

/// Dimension of the space spanned by `adⁿ(H₀, O)`, `n ≥ 1`.
///
/// The terms are generated Arnoldi-style: each new commutator is taken of
/// the latest orthonormalized direction, which spans the same space as the
/// raw sequence without its growing ill-conditioning. The depth grows until
/// no new direction appears or `n²` terms are reached; the final count is
/// confirmed by [`real_span_rank`].
pub fn dim_v<T: Real>(h0: &RotorOperator<T>, obs: &RotorOperator<T>, n: usize) -> Result<usize> {
    check_dims(n, h0.dim())?;
    check_dims(n, obs.dim())?;
    let i = C::new(T::zero(), T::one());
    let mut span = SpanBasis::new();
    let mut next = commutator(h0.matrix(), obs.matrix()) * i;
    for _ in 0..n * n {
        if !span.insert(next) {
            break;
        }
        next = commutator(span.directions.last().expect("just inserted"), obs.matrix());
    }
    if span.directions.is_empty() {
        return Ok(0);
    }
    real_span_rank(&span.directions)
}

/// Incrementally orthonormalized real basis of a matrix span.
struct SpanBasis<T: Real> {
    vectors: Vec<DVector<T>>,
    /// Orthonormal directions as matrices.
    directions: Vec<DMatrix<C<T>>>,
}

impl<T: Real> SpanBasis<T> {
    fn new() -> Self {
        Self {
            vectors: Vec::new(),
            directions: Vec::new(),
        }
    }

    /// Adds `m` if it has a component outside the current span. Applies
    /// Gram-Schmidt twice for stability.
    fn insert(&mut self, m: DMatrix<C<T>>) -> bool {
        let raw = flatten(&m);
        let scale = raw.norm();
        if scale == T::zero() {
            return false;
        }
        let mut v = raw / scale;
        for _ in 0..2 {
            for b in &self.vectors {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let rest = v.norm();
        if rest <= T::tol(1e-8) {
            return false;
        }
        let v = v / rest;
        let half = v.len() / 2;
        self.directions
            .push(DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
                let k = r + c * m.nrows();
                C::new(v[k], v[k + half])
            }));
        self.vectors.push(v);
        true
    }

    fn residual(&self, m: &DMatrix<C<T>>) -> T {
        let raw = flatten(m);
        let scale = raw.norm();
        if scale == T::zero() {
            return T::zero();
        }
        let mut v = raw / scale;
        for b in &self.vectors {
            let c = b.dot(&v);
            v -= b * c;
        }
        v.norm()
    }
}

fn closure_span<T: Real>(h0: &RotorOperator<T>, h_int: &RotorOperator<T>) -> Result<SpanBasis<T>> {
    check_dims(h0.dim(), h_int.dim())?;
    let i = C::new(T::zero(), T::one());
    let mut span = SpanBasis::new();
    span.insert(h0.matrix() * i);
    span.insert(h_int.matrix() * i);
    let mut checked = 0;
    loop {
        let before = span.directions.len();
        for a in checked..before {
            for b in 0..a {
                let c = commutator(&span.directions[a], &span.directions[b]);
                span.insert(c);
            }
        }
        checked = before;
        if span.directions.len() == before {
            break;
        }
    }
    Ok(span)
}

/// Real dimension of the Lie algebra generated by `iH₀` and `iH_I`. The system
/// is completely controllable when this equals `n²`.
pub fn lie_closure_dim<T: Real>(h0: &RotorOperator<T>, h_int: &RotorOperator<T>, n: usize) -> Result<usize> {
    check_dims(n, h0.dim())?;
    let span = closure_span(h0, h_int)?;
    real_span_rank(&span.directions)
}

/// Largest distance of any `i·adⁿ` (`n ≤ depth`) from the Lie closure, after
/// normalization. Hermitian members are compared as `i·adⁿ`'s skew form.
pub fn ad_residual_in_closure<T: Real>(
    h0: &RotorOperator<T>,
    h_int: &RotorOperator<T>,
    obs: &RotorOperator<T>,
    depth: usize,
) -> Result<T> {
    let span = closure_span(h0, h_int)?;
    let i = C::new(T::zero(), T::one());
    Ok(ad_sequence(h0, obs, depth)?.into_iter().fold(T::zero(), |m, a| {
        let hermitian = (&a - a.adjoint()).iter().fold(T::zero(), |x, z| x.max(cabs(*z)))
            < (&a + a.adjoint()).iter().fold(T::zero(), |x, z| x.max(cabs(*z)));
        let skew = if hermitian { a * i } else { a };
        m.max(span.residual(&skew))
    }))
}

/// True when two distinct pairs of levels share the same gap to `1e-9`.
pub fn equally_spaced<T: Real>(spectrum: &[T]) -> bool {
    let mut values = spectrum.to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
    let mut gaps = Vec::new();
    for p in 0..values.len() {
        for q in 0..p {
            gaps.push(values[p] - values[q]);
        }
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gap"));
    let tol = T::tol(SPACING_TOL);
    gaps.windows(2).any(|w| w[1] - w[0] <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LieReport {
    pub n: usize,
    pub kind: Option<KickKind>,
    pub dim_closure: usize,
    pub dim_v: usize,
    pub max_dim_v: usize,
    pub controllable: bool,
    pub unique_eigen_fixed_points: bool,
    pub equally_spaced_spectrum: bool,
    /// False when the kick generator differs from the observable, in which
    /// case `unique_eigen_fixed_points` lies outside the proven setting.
    pub hypotheses_hold: bool,
}

/// Full report for arbitrary `H₀`, kick generator and observable.
pub fn lie_report_for<T: Real>(
    h0: &RotorOperator<T>,
    h_int: &RotorOperator<T>,
    obs: &RotorOperator<T>,
) -> Result<LieReport> {
    let n = h0.dim();
    check_dims(n, h_int.dim())?;
    check_dims(n, obs.dim())?;
    let dim_closure = lie_closure_dim(h0, h_int, n)?;
    let dim_v = dim_v(h0, obs, n)?;
    let max_dim_v = n * (n - 1);
    let gap = (h_int.matrix() - obs.matrix())
        .iter()
        .fold(T::zero(), |m, z| m.max(cabs(*z)));
    Ok(LieReport {
        n,
        kind: None,
        dim_closure,
        dim_v,
        max_dim_v,
        controllable: dim_closure == n * n,
        unique_eigen_fixed_points: dim_v == max_dim_v,
        equally_spaced_spectrum: equally_spaced(&obs.spectrum()),
        hypotheses_hold: gap <= T::tol(1e-12),
    })
}

/// Report for the rotor with `H₀ = J²` and `H_I = O` of the given kind.
pub fn lie_report(kind: KickKind, n: usize) -> Result<LieReport> {
    let h0 = build_j2::<f64>(n)?;
    let obs = observable::<f64>(kind, n)?;
    let mut report = lie_report_for(&h0, &obs, &obs)?;
    report.kind = Some(kind);
    Ok(report)
}
