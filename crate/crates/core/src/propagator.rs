//! Field-free rotation, sudden kicks and piecewise propagation of kick trains.
//!
//! Time is the rescaled `s = t/τ`; the field-free Hamiltonian is `εJ²` with
//! `ε = τB`, so the free motion has period `π/ε` in `s` and one rotational
//! period corresponds to `t/T_rot = εs/π`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{
    check_dims, level_energy, observable, quadratic_form, RotorOperator, RotorState,
};
use crate::error::{Error, Result};
use crate::num::{cabs, cis, Real, C};
use crate::target::TargetState;

/// Which interaction a kick couples through, and which observable it controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KickKind {
    /// Permanent-dipole (half-cycle pulse) kick `exp(iA cosθ)`, observable `cosθ`.
    Orientation,
    /// Polarizability kick `exp(iA cos²θ)`, observable `cos²θ`.
    Alignment,
}

impl KickKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KickKind::Orientation => "orientation",
            KickKind::Alignment => "alignment",
        }
    }
}

impl std::str::FromStr for KickKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "orientation" => Ok(KickKind::Orientation),
            "alignment" => Ok(KickKind::Alignment),
            other => Err(format!("unknown kick kind `{other}`")),
        }
    }
}

/// One sudden pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickEvent<T> {
    /// Rescaled time of the kick.
    pub s_time: T,
    /// Dimensionless pulse area `A`.
    pub area: T,
    pub kind: KickKind,
}

impl<T: Real> KickEvent<T> {
    pub fn new(s_time: T, area: T, kind: KickKind) -> Result<Self> {
        if !area.is_finite() || area == T::zero() {
            return Err(Error::InvalidKick(format!("area must be finite and nonzero, got {area}")));
        }
        if !s_time.is_finite() || s_time < T::zero() {
            return Err(Error::InvalidKick(format!("time must be >= 0, got {s_time}")));
        }
        Ok(Self { s_time, area, kind })
    }

    pub fn t_over_trot(&self, epsilon: T) -> T {
        t_over_trot(self.s_time, epsilon)
    }
}

/// Free-evolution period `π/ε` in rescaled time.
pub fn rotational_period<T: Real>(epsilon: T) -> T {
    T::pi() / epsilon
}

/// Converts rescaled time to fractions of the rotational period.
pub fn t_over_trot<T: Real>(s: T, epsilon: T) -> T {
    epsilon * s / T::pi()
}

/// Atomic-unit conversion factors.
pub mod units {
    /// Picoseconds per atomic unit of time.
    pub const PS_PER_AU_TIME: f64 = 2.418_884_326_585_7e-5;
    /// V/cm per atomic unit of electric field.
    pub const V_PER_CM_PER_AU_FIELD: f64 = 5.142_206_747_632_9e9;
    /// Atomic units of dipole per debye.
    pub const AU_PER_DEBYE: f64 = 0.393_430_269_8;
    /// Hartree per cm⁻¹.
    pub const HARTREE_PER_INV_CM: f64 = 4.556_335_252_912e-6;
}

/// Sampled physical pulse, all quantities in atomic units.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalPulse<T> {
    /// Field amplitude `f(τs)` on a uniform grid over `s ∈ [0, 1]`.
    pub envelope: Vec<T>,
    pub duration: T,
    pub b_rot: T,
    pub mu0: T,
    pub delta_alpha: T,
    pub alpha_perp: T,
    /// Upper bound on `ε = τB` accepted as "sudden".
    pub max_epsilon: T,
}

impl<T: Real> PhysicalPulse<T> {
    pub fn epsilon(&self) -> T {
        self.duration * self.b_rot
    }

    pub fn validate(&self) -> Result<()> {
        if self.envelope.len() < 3 {
            return Err(Error::TooFewSamples(self.envelope.len()));
        }
        if self.envelope.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPulse("non-finite envelope sample".into()));
        }
        if self.duration <= T::zero() || self.b_rot <= T::zero() {
            return Err(Error::InvalidPulse("duration and B must be positive".into()));
        }
        let eps = self.epsilon();
        if eps >= self.max_epsilon {
            return Err(Error::NotSudden {
                epsilon: eps.as_f64(),
                limit: self.max_epsilon.as_f64(),
            });
        }
        Ok(())
    }
}

/// Composite Simpson rule on uniformly spaced samples over `[0, 1]`; an odd
/// interval count closes with Simpson's 3/8 rule on the last three intervals.
pub(crate) fn simpson_unit<T: Real>(y: &[T]) -> T {
    let intervals = y.len() - 1;
    let h = T::one() / T::lit(intervals as f64);
    let third = T::lit(1.0 / 3.0);
    let simpson = |ys: &[T]| -> T {
        let mut acc = ys[0] + ys[ys.len() - 1];
        for (i, v) in ys.iter().enumerate().take(ys.len() - 1).skip(1) {
            acc += *v * if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        }
        acc * h * third
    };
    if intervals.is_multiple_of(2) {
        return simpson(y);
    }
    if intervals == 1 {
        return (y[0] + y[1]) * h * T::lit(0.5);
    }
    let split = intervals - 3;
    let head = if split > 0 { simpson(&y[..=split]) } else { T::zero() };
    let tail = &y[split..];
    head + (tail[0] + T::lit(3.0) * (tail[1] + tail[2]) + tail[3]) * h * T::lit(3.0 / 8.0)
}

/// Dimensionless kick strength: `A_o = ∫₀¹ μ₀τf ds` or `A_a = ∫₀¹ Δατf²/2 ds`.
pub fn pulse_area<T: Real>(pulse: &PhysicalPulse<T>, kind: KickKind) -> Result<T> {
    pulse.validate()?;
    let integrand: Vec<T> = match kind {
        KickKind::Orientation => pulse
            .envelope
            .iter()
            .map(|&f| pulse.mu0 * pulse.duration * f)
            .collect(),
        KickKind::Alignment => pulse
            .envelope
            .iter()
            .map(|&f| pulse.delta_alpha * pulse.duration * f * f * T::lit(0.5))
            .collect(),
    };
    Ok(simpson_unit(&integrand))
}

/// Diagonal free propagator `exp(−iεJ²Δs)`; `delta_s` may be negative.
pub(crate) fn free_phases<T: Real>(dim: usize, epsilon: T, delta_s: T) -> DVector<C<T>> {
    // j(j+1) is even, so the phase only depends on εΔs modulo π.
    let x = epsilon * delta_s;
    let reduced = x - T::pi() * (x / T::pi()).floor();
    DVector::from_iterator(dim, (0..dim).map(|j| cis(-level_energy::<T>(j) * reduced)))
}

pub(crate) fn evolve_unchecked<T: Real>(state: &RotorState<T>, epsilon: T, delta_s: T) -> RotorState<T> {
    let phases = free_phases(state.dim(), epsilon, delta_s);
    RotorState::from_unitary_image(state.amplitudes().component_mul(&phases))
}

/// Field-free rotation over `delta_s ≥ 0`.
pub fn free_evolve<T: Real>(state: &RotorState<T>, epsilon: T, delta_s: T) -> Result<RotorState<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidStep(epsilon.as_f64()));
    }
    if !(delta_s >= T::zero()) || !delta_s.is_finite() {
        return Err(Error::InvalidStep(delta_s.as_f64()));
    }
    Ok(evolve_unchecked(state, epsilon, delta_s))
}

/// Spectral factorization of a Hermitian interaction, reusable for any area.
#[derive(Debug, Clone)]
pub struct KickUnitary<T: Real> {
    eigenvalues: DVector<T>,
    eigenvectors: DMatrix<C<T>>,
}

impl<T: Real> KickUnitary<T> {
    pub fn new(h_int: &RotorOperator<T>) -> Result<Self> {
        let eig = nalgebra::SymmetricEigen::try_new(h_int.matrix().clone(), T::default_epsilon(), 0)
            .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    /// `exp(iA·H)` as `V diag(e^{iAλ}) V†`.
    pub fn matrix(&self, area: T) -> DMatrix<C<T>> {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= cis(area * self.eigenvalues[k]);
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// `U = exp(iA·h_int)` built from the Hermitian eigendecomposition.
pub fn kick_unitary<T: Real>(h_int: &RotorOperator<T>, area: T) -> Result<DMatrix<C<T>>> {
    Ok(KickUnitary::new(h_int)?.matrix(area))
}

/// Kick unitaries keyed by (kind, area) for one basis dimension.
pub(crate) struct KickCache<T: Real> {
    dim: usize,
    factors: Vec<(KickKind, KickUnitary<T>)>,
    unitaries: Vec<(KickKind, T, DMatrix<C<T>>)>,
}

impl<T: Real> KickCache<T> {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            dim,
            factors: Vec::new(),
            unitaries: Vec::new(),
        }
    }

    pub(crate) fn unitary(&mut self, kind: KickKind, area: T) -> Result<&DMatrix<C<T>>> {
        if let Some(pos) = self
            .unitaries
            .iter()
            .position(|(k, a, _)| *k == kind && *a == area)
        {
            return Ok(&self.unitaries[pos].2);
        }
        if !self.factors.iter().any(|(k, _)| *k == kind) {
            let op = observable::<T>(kind, self.dim)?;
            self.factors.push((kind, KickUnitary::new(&op)?));
        }
        let factor = &self.factors.iter().find(|(k, _)| *k == kind).expect("inserted").1;
        let u = factor.matrix(area);
        self.unitaries.push((kind, area, u));
        Ok(&self.unitaries.last().expect("pushed").2)
    }

    pub(crate) fn apply(&mut self, state: &RotorState<T>, kind: KickKind, area: T) -> Result<RotorState<T>> {
        let u = self.unitary(kind, area)?;
        state.apply(u)
    }
}

fn check_schedule<T: Real>(kicks: &[KickEvent<T>]) -> Result<()> {
    for (i, k) in kicks.iter().enumerate() {
        KickEvent::new(k.s_time, k.area, k.kind)?;
        if i > 0 && k.s_time < kicks[i - 1].s_time {
            return Err(Error::UnsortedKicks { index: i });
        }
    }
    Ok(())
}

/// State at time `s_end`, starting from `initial` at `s_start` and applying
/// every kick with `s_start <= s_time <= s_end`. A kick exactly at `s_end` is
/// applied.
pub fn propagate_state<T: Real>(
    initial: &RotorState<T>,
    kicks: &[KickEvent<T>],
    epsilon: T,
    s_start: T,
    s_end: T,
) -> Result<RotorState<T>> {
    check_schedule(kicks)?;
    if !(epsilon > T::zero()) || !(s_end >= s_start) {
        return Err(Error::InvalidStep((s_end - s_start).as_f64()));
    }
    let mut cache = KickCache::new(initial.dim());
    let mut state = initial.clone();
    let mut now = s_start;
    for kick in kicks.iter().filter(|k| k.s_time >= s_start && k.s_time <= s_end) {
        state = evolve_unchecked(&state, epsilon, kick.s_time - now);
        state = cache.apply(&state, kick.kind, kick.area)?;
        now = kick.s_time;
    }
    Ok(evolve_unchecked(&state, epsilon, s_end - now))
}

/// One sample of a propagated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample<T> {
    pub s: T,
    pub t_over_trot: T,
    pub expectation: T,
    /// `|⟨χ|ψ⟩|²` when a target was supplied.
    pub projection_sq: Option<T>,
    pub norm: T,
    /// Population outside the control subspace (zero in control mode).
    pub leakage: T,
}

/// Sampled time series of a kick train.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub epsilon: T,
    pub samples: Vec<TrajectorySample<T>>,
    pub kicks: Vec<KickEvent<T>>,
    pub final_state: RotorState<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn max_leakage(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |m, s| if s.leakage > m { s.leakage } else { m })
    }

    pub fn max_norm_error(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| {
            let e = (s.norm - T::one()).abs();
            if e > m {
                e
            } else {
                m
            }
        })
    }

    /// Largest `|⟨O⟩_self − ⟨O⟩_other|` over samples with `s <= until`.
    pub fn max_expectation_gap(&self, other: &Self, until: T) -> Result<T> {
        check_dims(self.samples.len(), other.samples.len())?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .filter(|(a, _)| a.s <= until)
            .fold(T::zero(), |m, (a, b)| {
                let d = (a.expectation - b.expectation).abs();
                if d > m {
                    d
                } else {
                    m
                }
            }))
    }
}

/// What to record while propagating.
#[derive(Debug, Clone)]
pub struct PropagationOptions<'a, T: Real> {
    /// Observable whose expectation is sampled.
    pub observable: KickKind,
    /// Optional target (its dimension may be smaller than the state's).
    pub target: Option<&'a TargetState<T>>,
    /// Control-subspace dimension used for leakage; `None` disables it.
    pub control_dim: Option<usize>,
    /// Sampling step in `s`.
    pub step: T,
}

impl<'a, T: Real> PropagationOptions<'a, T> {
    /// Samples `per_period` points per free-evolution period.
    pub fn per_period(observable: KickKind, epsilon: T, per_period: usize) -> Self {
        Self {
            observable,
            target: None,
            control_dim: None,
            step: rotational_period(epsilon) / T::lit(per_period as f64),
        }
    }
}

/// Default sampling density of trajectories.
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 4096;

/// Alternates free evolution and kicks in time order and records the chosen
/// observables. `initial` is the state at `s = 0`; the uniform sampling grid
/// starts at the first kick (or `s = 0`)
/// and runs one full period `π/ε` past the last kick. A grid point that
/// coincides with a kick sees the post-kick state.
pub fn propagate_schedule<T: Real>(
    initial: &RotorState<T>,
    kicks: &[KickEvent<T>],
    epsilon: T,
    options: &PropagationOptions<'_, T>,
) -> Result<Trajectory<T>> {
    check_schedule(kicks)?;
    if !(options.step > T::zero()) || !options.step.is_finite() {
        return Err(Error::InvalidStep(options.step.as_f64()));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidStep(epsilon.as_f64()));
    }
    let dim = initial.dim();
    let obs = observable::<T>(options.observable, dim)?;
    let target = match options.target {
        Some(t) => Some(crate::basis::embed_or_truncate(&t.state, dim)?.0),
        None => None,
    };
    let start = kicks.first().map_or(T::zero(), |k| k.s_time);
    let end = kicks.last().map_or(T::zero(), |k| k.s_time) + rotational_period(epsilon);
    let count = ((end - start) / options.step).floor().to_usize().unwrap_or(0) + 1;

    let mut cache = KickCache::new(dim);
    let mut anchor = initial.clone();
    let mut anchor_time = T::zero();
    let mut next_kick = 0;
    let mut samples = Vec::with_capacity(count);
    for k in 0..count {
        let s = start + options.step * T::lit(k as f64);
        while next_kick < kicks.len() && kicks[next_kick].s_time <= s {
            let kick = kicks[next_kick];
            anchor = evolve_unchecked(&anchor, epsilon, kick.s_time - anchor_time);
            anchor = cache.apply(&anchor, kick.kind, kick.area)?;
            anchor_time = kick.s_time;
            next_kick += 1;
        }
        let psi = evolve_unchecked(&anchor, epsilon, s - anchor_time);
        let norm = psi.norm();
        samples.push(TrajectorySample {
            s,
            t_over_trot: t_over_trot(s, epsilon),
            expectation: quadratic_form(psi.amplitudes(), obs.matrix()).re,
            projection_sq: target
                .as_ref()
                .map(|t| t.amplitudes().dotc(psi.amplitudes()).norm_sqr()),
            norm,
            leakage: options
                .control_dim
                .filter(|&n| n < dim)
                .map_or(T::zero(), |n| psi.population_above(n)),
        });
    }
    let final_state = propagate_state(initial, kicks, epsilon, T::zero(), end)?;
    Ok(Trajectory {
        epsilon,
        samples,
        kicks: kicks.to_vec(),
        final_state,
    })
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_error<T: Real>(u: &DMatrix<C<T>>) -> T {
    let id = DMatrix::<C<T>>::identity(u.nrows(), u.ncols());
    (u.adjoint() * u - id).iter().fold(T::zero(), |m, z| {
        let n = cabs(*z);
        if n > m {
            n
        } else {
            m
        }
    })
}

pub(crate) fn commutator<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> DMatrix<C<T>> {
    a * b - b * a
}

/// Largest entry magnitude.
pub fn max_abs<T: Real>(m: &DMatrix<C<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let n = cabs(*z);
        if n > acc {
            n
        } else {
            acc
        }
    })
}
