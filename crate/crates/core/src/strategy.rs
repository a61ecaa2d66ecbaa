//! Closed-loop kick timing: S1 kicks at maxima of `⟨O⟩`, S2 at maxima of the
//! projection on the target state.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{
    build_cos, build_cos2, build_j2, build_sin2_2theta, check_dims, cos_coupling, observable, quadratic_form,
    RotorOperator, RotorState,
};
use crate::error::{Error, Result};
use crate::num::{cabs, Real, C};
use crate::propagator::{
    commutator, evolve_unchecked, rotational_period, KickCache, KickEvent, KickKind, KickUnitary,
};
use crate::search::{
    find_maximum, Extremum, ExpectationSignal, MaximaMode, ProjectionSignal, SEARCH_GRID,
};
use crate::target::{self, TargetState};

pub const DEFAULT_EPSILON: f64 = 0.03;
pub const DEFAULT_N_CONTROL: usize = 5;
pub const DEFAULT_MAX_KICKS: usize = 15;
pub const DEFAULT_STOP_GAIN: f64 = 1e-3;

/// Threshold on `|d⟨O⟩/ds|` and on commutator expectations used to decide
/// that a state sits at an extremum or in the fixed-point set.
pub const STATIONARY_TOL: f64 = 1e-8;

/// Default kick area: `1` for orientation, `1.5` for alignment.
pub fn default_area(kind: KickKind) -> f64 {
    match kind {
        KickKind::Orientation => 1.0,
        KickKind::Alignment => 1.5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Kick when the observable peaks.
    #[serde(alias = "s1")]
    S1,
    /// Kick when the projection on the target state peaks.
    #[serde(alias = "s2")]
    S2,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::S1 => "S1",
            Scheme::S2 => "S2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig<T> {
    pub scheme: Scheme,
    pub maxima_mode: MaximaMode,
    pub kick_kind: KickKind,
    pub area: T,
    pub epsilon: T,
    pub n_control: usize,
    pub max_kicks: usize,
    /// A kick raising `⟨O⟩` by less than this is discarded and the run stops.
    pub stop_gain: T,
}

impl<T: Real> StrategyConfig<T> {
    /// S1 with global maxima and the default parameters for `kind`.
    pub fn new(kind: KickKind) -> Self {
        Self {
            scheme: Scheme::S1,
            maxima_mode: MaximaMode::GlobalInPeriod,
            kick_kind: kind,
            area: T::lit(default_area(kind)),
            epsilon: T::lit(DEFAULT_EPSILON),
            n_control: DEFAULT_N_CONTROL,
            max_kicks: DEFAULT_MAX_KICKS,
            stop_gain: T::lit(DEFAULT_STOP_GAIN),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_kicks < 1 {
            return Err(Error::config("max_kicks", "must be at least 1"));
        }
        if !(self.stop_gain >= T::zero()) || !self.stop_gain.is_finite() {
            return Err(Error::config("stop_gain", "must be finite and non-negative"));
        }
        if self.area == T::zero() || !self.area.is_finite() {
            return Err(Error::config("area", "must be finite and nonzero"));
        }
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(Error::config("epsilon", "must be finite and positive"));
        }
        if self.n_control < 2 {
            return Err(Error::config("n_control", "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxKicks,
    GainBelowThreshold,
    FixedPoint,
}

/// Record of a closed-loop run.
#[derive(Debug, Clone)]
pub struct StrategyRun<T: Real> {
    pub kicks: Vec<KickEvent<T>>,
    /// `⟨O⟩` at each kick instant (unchanged by the kick).
    pub values: Vec<T>,
    /// `|⟨χ|ψ⟩|²` at each kick instant.
    pub projections: Vec<T>,
    /// `⟨O⟩` at the selected maximum after the last kick.
    pub final_value: T,
    pub final_projection: T,
    /// Time of that maximum.
    pub final_s: T,
    pub final_state: RotorState<T>,
    pub converged: bool,
    pub stop: StopReason,
    /// Index (ascending spectrum) of the eigenvector the run ended on, if any.
    pub fixed_point_label: Option<usize>,
}

impl<T: Real> StrategyRun<T> {
    /// Delays between successive kicks in units of the rotational period.
    pub fn delays_over_trot(&self, epsilon: T) -> Vec<T> {
        self.kicks
            .windows(2)
            .map(|w| (w[1].s_time - w[0].s_time) / rotational_period(epsilon))
            .collect()
    }
}

fn grid_step<T: Real>(epsilon: T) -> T {
    rotational_period(epsilon) / T::lit(SEARCH_GRID as f64)
}

/// Next maximum of `⟨O⟩(s)` during free evolution, with `s` measured from the
/// current instant.
pub fn next_extremum<T: Real>(
    state: &RotorState<T>,
    obs: &RotorOperator<T>,
    epsilon: T,
    mode: MaximaMode,
) -> Result<Extremum<T>> {
    let signal = ExpectationSignal::new(state, obs, epsilon)?;
    let coarse = find_maximum(&signal, epsilon, mode)?;
    Ok(signal.polish(coarse, grid_step(epsilon)))
}

/// Next maximum of `|⟨χ|ψ(s)⟩|²`.
pub fn next_projection_max<T: Real>(
    state: &RotorState<T>,
    target: &TargetState<T>,
    epsilon: T,
    mode: MaximaMode,
) -> Result<Extremum<T>> {
    let signal = ProjectionSignal::new(state, &target.state, epsilon)?;
    find_maximum(&signal, epsilon, mode)
}

fn projection<T: Real>(chi: &RotorState<T>, psi: &RotorState<T>) -> T {
    chi.amplitudes().dotc(psi.amplitudes()).norm_sqr()
}

/// Runs S1 or S2 from `initial`, which must live in the `n_control` basis.
///
/// The first kick is applied at `s = 0`. After each kick the next maximum of
/// the scheme's signal is located and the state is evolved there; the gain is
/// `⟨O⟩` at that maximum minus `⟨O⟩` at the kick. A kick whose gain falls
/// below `stop_gain` is undone and the run ends as converged; so does a run
/// whose signal becomes stationary.
pub fn run_strategy<T: Real>(config: &StrategyConfig<T>, initial: &RotorState<T>) -> Result<StrategyRun<T>> {
    config.validate()?;
    check_dims(config.n_control, initial.dim())?;
    let obs = observable::<T>(config.kick_kind, config.n_control)?;
    let chi = target::target_state(&obs, target::Extremum::Maximize)?;
    let mut cache = KickCache::new(config.n_control);

    let mut state = initial.clone();
    let mut s = T::zero();
    let mut value = quadratic_form(state.amplitudes(), obs.matrix()).re;
    let mut kicks = Vec::new();
    let mut values = Vec::new();
    let mut projections = Vec::new();
    let mut stop = StopReason::MaxKicks;

    while kicks.len() < config.max_kicks {
        let kicked = cache.apply(&state, config.kick_kind, config.area)?;
        let next = match config.scheme {
            Scheme::S1 => next_extremum(&kicked, &obs, config.epsilon, config.maxima_mode),
            Scheme::S2 => next_projection_max(&kicked, &chi, config.epsilon, config.maxima_mode),
        };
        let next = match next {
            Ok(e) => e,
            Err(Error::StationarySignal) => {
                stop = StopReason::FixedPoint;
                break;
            }
            Err(e) => return Err(e),
        };
        let moved = evolve_unchecked(&kicked, config.epsilon, next.s);
        let new_value = quadratic_form(moved.amplitudes(), obs.matrix()).re;
        if new_value - value < config.stop_gain {
            stop = StopReason::GainBelowThreshold;
            break;
        }
        kicks.push(KickEvent::new(s, config.area, config.kick_kind)?);
        values.push(value);
        projections.push(projection(&chi.state, &state));
        state = moved;
        s += next.s;
        value = new_value;
    }

    let fixed_point_label = match classify_fixed_point(&state, &obs, &build_j2(config.n_control)?, &[config.area])? {
        FixedPointVerdict::Eigenvector { index } => Some(index),
        _ => None,
    };
    Ok(StrategyRun {
        kicks,
        values,
        projections,
        final_value: value,
        final_projection: projection(&chi.state, &state),
        final_s: s,
        final_state: state,
        converged: stop != StopReason::MaxKicks,
        stop,
        fixed_point_label,
    })
}

/// Basis in which the post-kick slope is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlopeSpace {
    /// Closed forms valid for the untruncated rotor.
    Infinite,
    /// Truncated basis of the state's dimension, boundary term included.
    Finite,
}

/// `iε⟨M⟩` for an anti-Hermitian `M`, as a real number.
fn i_eps_expect<T: Real>(state: &RotorState<T>, m: &DMatrix<C<T>>, epsilon: T) -> T {
    -(quadratic_form(state.amplitudes(), m).im * epsilon)
}

/// `d⟨O⟩/ds` immediately after a kick of `area` applied to `state`, which
/// must be at a free-evolution extremum of `⟨O⟩`.
///
/// In the infinite space the result is `2εA(1 − ⟨cos²θ⟩)` for orientation and
/// `2εA⟨sin²2θ⟩` for alignment. In the finite space the orientation slope
/// picks up the boundary term `B = −(N²/(2N−1))|a_{N−1}|²` and its second
/// order partner; alignment uses the commutator expansion to second order in
/// `A`. The residual pre-kick slope is added in both cases.
pub fn post_kick_slope<T: Real>(
    state: &RotorState<T>,
    area: T,
    kind: KickKind,
    space: SlopeSpace,
    epsilon: T,
) -> Result<T> {
    if area == T::zero() {
        return Ok(T::zero());
    }
    let n = state.dim();
    let obs = observable::<T>(kind, n)?;
    let x = commutator(build_j2::<T>(n)?.matrix(), obs.matrix());
    let pre = i_eps_expect(state, &x, epsilon);
    if pre.abs() > T::tol(STATIONARY_TOL) {
        return Err(Error::NotAtExtremum { slope: pre.as_f64() });
    }
    let two = T::lit(2.0);
    let expect = |op: &RotorOperator<T>| quadratic_form(state.amplitudes(), op.matrix()).re;
    let kick = match (space, kind) {
        (SlopeSpace::Infinite, KickKind::Orientation) => two * epsilon * area * (T::one() - expect(&build_cos2(n)?)),
        (SlopeSpace::Infinite, KickKind::Alignment) => two * epsilon * area * expect(&build_sin2_2theta(n)?),
        (SlopeSpace::Finite, KickKind::Orientation) => {
            let c = build_cos::<T>(n)?;
            let c2 = c.matrix() * c.matrix();
            let nn = T::lit(n as f64);
            let kappa = nn * nn / (two * nn - T::one());
            let last = state.amplitude(n - 1);
            let prev = state.amplitude(n - 2);
            let boundary = -kappa * last.norm_sqr();
            let first = two * epsilon * area * (T::one() - quadratic_form(state.amplitudes(), &c2).re + boundary);
            let second = two * epsilon * area * area * kappa * cos_coupling::<T>(n - 2) * (last.conj() * prev).im;
            first + second
        }
        (SlopeSpace::Finite, KickKind::Alignment) => {
            let o = obs.matrix();
            let ox = commutator(o, &x);
            let oox = commutator(o, &ox);
            let first = epsilon * area * quadratic_form(state.amplitudes(), &ox).re;
            let second = i_eps_expect(state, &oox, epsilon) * area * area / -two;
            first + second
        }
    };
    Ok(pre + kick)
}

/// Membership of a state in the fixed-point set of the strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum FixedPointVerdict {
    /// Eigenvector of the observable; `index` counts the ascending spectrum.
    Eigenvector { index: usize },
    /// Satisfies the fixed-point conditions without being an eigenvector.
    NonEigenvectorMember,
    NotFixed,
}

/// Checks `⟨ψ|[H₀, O]|ψ⟩ = 0` and `⟨ψ|U_A†[H₀, O]U_A|ψ⟩ = 0` for each sampled
/// area (kick generated by `obs`), each to [`STATIONARY_TOL`].
pub fn classify_fixed_point<T: Real>(
    state: &RotorState<T>,
    obs: &RotorOperator<T>,
    h0: &RotorOperator<T>,
    area_samples: &[T],
) -> Result<FixedPointVerdict> {
    check_dims(obs.dim(), state.dim())?;
    check_dims(h0.dim(), state.dim())?;
    let x = commutator(h0.matrix(), obs.matrix());
    let tol = T::tol(STATIONARY_TOL);
    if cabs(quadratic_form(state.amplitudes(), &x)) > tol {
        return Ok(FixedPointVerdict::NotFixed);
    }
    let kick = KickUnitary::new(obs)?;
    for &a in area_samples {
        let kicked = kick.matrix(a) * state.amplitudes();
        if cabs(quadratic_form(&kicked, &x)) > tol {
            return Ok(FixedPointVerdict::NotFixed);
        }
    }
    let psi = state.amplitudes();
    let mean = quadratic_form(psi, obs.matrix()).re;
    let residual = (obs.matrix() * psi - psi * C::new(mean, T::zero())).norm();
    if residual > tol {
        return Ok(FixedPointVerdict::NonEigenvectorMember);
    }
    let spectrum = obs.spectrum();
    let index = (0..spectrum.len())
        .min_by(|&a, &b| {
            (spectrum[a] - mean)
                .abs()
                .partial_cmp(&(spectrum[b] - mean).abs())
                .expect("finite eigenvalue")
        })
        .expect("nonempty spectrum");
    Ok(FixedPointVerdict::Eigenvector { index })
}
