//! Kinematically optimal target states and their field-free lifetimes.

use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::{observable, quadratic_form, RotorOperator, RotorState};
use crate::error::{Error, Result};
use crate::num::{cabs, Real, C};
use crate::propagator::{rotational_period, KickKind};
use crate::search::{ExpectationSignal, Signal};

/// Default threshold for the duration of a high-efficiency window.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Minimal spectral gap for a usable extremal eigenvalue.
pub const DEGENERACY_GAP: f64 = 1e-8;

const DURATION_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Maximize,
    Minimize,
}

/// Extremal eigenvector `χ` of a projected observable together with its
/// eigenvalue, the kinematic bound.
#[derive(Debug, Clone)]
pub struct TargetState<T: Real> {
    pub state: RotorState<T>,
    pub bound: T,
    pub extremum: Extremum,
    pub observable_kind: Option<KickKind>,
    /// Set for closed-form approximations that are not exact eigenvectors.
    pub approximate: bool,
    observable: RotorOperator<T>,
}

impl<T: Real> TargetState<T> {
    pub fn observable(&self) -> &RotorOperator<T> {
        &self.observable
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    /// `‖Oχ − bound·χ‖`.
    pub fn eigen_residual(&self) -> T {
        let psi = self.state.amplitudes();
        (self.observable.matrix() * psi - psi * C::new(self.bound, T::zero())).norm()
    }
}

/// Rotates the phase so the largest-magnitude coefficient is real positive.
/// The earliest index wins among coefficients of equal magnitude.
fn fix_phase<T: Real>(v: &DVector<C<T>>) -> DVector<C<T>> {
    let peak = v.iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
    let slack = T::tol(1e-12);
    let lead = v
        .iter()
        .find(|z| cabs(**z) >= peak - slack)
        .copied()
        .unwrap_or(C::new(T::one(), T::zero()));
    let phase = lead.conj() / C::new(cabs(lead), T::zero());
    v * phase
}

/// Top (or bottom) eigenvector of `obs`.
pub fn target_state<T: Real>(obs: &RotorOperator<T>, extremum: Extremum) -> Result<TargetState<T>> {
    let eig = SymmetricEigen::try_new(obs.matrix().clone(), T::default_epsilon(), 0)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let n = obs.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalue")
    });
    let (pick, neighbour) = match extremum {
        Extremum::Maximize => (order[n - 1], n.checked_sub(2).map(|i| order[i])),
        Extremum::Minimize => (order[0], order.get(1).copied()),
    };
    let bound = eig.eigenvalues[pick];
    if let Some(other) = neighbour {
        let gap = (bound - eig.eigenvalues[other]).abs();
        if gap <= T::tol(DEGENERACY_GAP) {
            return Err(Error::DegenerateExtremum { gap: gap.as_f64() });
        }
    }
    let v = fix_phase(&eig.eigenvectors.column(pick).into_owned());
    Ok(TargetState {
        state: RotorState::normalized(v)?,
        bound,
        extremum,
        observable_kind: None,
        approximate: false,
        observable: obs.clone(),
    })
}

/// Target for the orientation (`cosθ`) or alignment (`cos²θ`) observable
/// projected on the `n` lowest levels.
pub fn target_for<T: Real>(kind: KickKind, n: usize, extremum: Extremum) -> Result<TargetState<T>> {
    let mut t = target_state(&observable::<T>(kind, n)?, extremum)?;
    t.observable_kind = Some(kind);
    Ok(t)
}

/// Closed-form orientation target obtained with all couplings set to `1/2`:
/// `c_j = √(2/(n+1))·sin(π(j+1)/(n+1))`, bound `cos(π/(n+1))`.
pub fn analytic_orientation_target<T: Real>(n: usize) -> Result<TargetState<T>> {
    if n < 2 {
        return Err(Error::InvalidDimension {
            dim: n,
            reason: "analytic target needs at least two levels",
        });
    }
    let pi = T::pi();
    let np1 = T::lit((n + 1) as f64);
    let scale = (T::lit(2.0) / np1).sqrt();
    let v = DVector::from_fn(n, |j, _| {
        C::new(scale * (pi * T::lit((j + 1) as f64) / np1).sin(), T::zero())
    });
    Ok(TargetState {
        state: RotorState::normalized(v)?,
        bound: (pi / np1).cos(),
        extremum: Extremum::Maximize,
        observable_kind: Some(KickKind::Orientation),
        approximate: true,
        observable: observable(KickKind::Orientation, n)?,
    })
}

fn bisect_crossing<T: Real, S: Signal<T>>(f: &S, threshold: T, mut inside: T, mut outside: T) -> T {
    for _ in 0..80 {
        let mid = (inside + outside) * T::lit(0.5);
        if f.value(mid) > threshold {
            inside = mid;
        } else {
            outside = mid;
        }
        if (outside - inside).abs() <= T::default_epsilon() * (T::one() + mid.abs()) {
            break;
        }
    }
    (inside + outside) * T::lit(0.5)
}

/// Fraction of the rotational period during which the freely evolving target
/// keeps `⟨O⟩` above `threshold`, counting only the contiguous window around
/// `s = 0`.
///
/// A target whose expectation never drops below the threshold (a stationary
/// eigenstate of `J²`) yields `1`.
pub fn duration_above<T: Real>(target: &TargetState<T>, epsilon: T, threshold: T) -> Result<T> {
    let value0 = quadratic_form(target.state.amplitudes(), target.observable.matrix()).re;
    if threshold >= value0 {
        return Err(Error::ThresholdAboveBound {
            threshold: threshold.as_f64(),
            bound: value0.as_f64(),
        });
    }
    let f = ExpectationSignal::new(&target.state, &target.observable, epsilon)?;
    let period = rotational_period(epsilon);
    let h = period / T::lit(DURATION_GRID as f64);
    let at = |k: usize| h * T::lit(k as f64);

    let forward = (1..=DURATION_GRID).find(|&k| f.value(at(k)) <= threshold);
    let Some(kf) = forward else {
        return Ok(T::one());
    };
    let backward = (1..=DURATION_GRID)
        .find(|&k| f.value(-at(k)) <= threshold)
        .expect("a forward crossing implies a backward one by periodicity");
    let s_plus = bisect_crossing(&f, threshold, at(kf - 1), at(kf));
    let s_minus = bisect_crossing(&f, threshold, -at(backward - 1), -at(backward));
    Ok((s_plus - s_minus) / period)
}

/// One point of the efficiency/duration curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyDurationPoint {
    pub n: usize,
    pub efficiency: f64,
    pub duration_fraction: f64,
}

/// Kinematic bound and threshold-`0.5` duration of the maximizing target for
/// each basis size. Durations are in units of the rotational period and do
/// not depend on `ε`.
pub fn efficiency_duration_scan(
    kind: KickKind,
    ns: impl IntoIterator<Item = usize>,
) -> Result<Vec<EfficiencyDurationPoint>> {
    ns.into_iter()
        .map(|n| {
            let t = target_for::<f64>(kind, n, Extremum::Maximize)?;
            Ok(EfficiencyDurationPoint {
                n,
                efficiency: t.bound,
                duration_fraction: duration_above(&t, 0.03, DEFAULT_THRESHOLD)?,
            })
        })
        .collect()
}
