//! Maximum search on free-evolution signals.
//!
//! Under field-free rotation every quantity of interest is a finite sum of
//! harmonics `e^{iε(E_j − E_k)s}`, so signals are stored in that closed form
//! and evaluated exactly at any `s`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis::{check_dims, level_energy, RotorOperator, RotorState};
use crate::error::{Error, Result};
use crate::num::{cis, Real, C};
use crate::propagator::rotational_period;

/// Number of coarse grid points per period before refinement.
pub const SEARCH_GRID: usize = 2048;

/// Refinement stops once the bracket is narrower than this fraction of `π/ε`.
pub const REFINE_FRACTION: f64 = 1e-9;

/// Which maximum of the post-kick signal is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximaMode {
    /// Largest value over one full period after the kick.
    GlobalInPeriod,
    /// First interior local maximum after the kick.
    FirstLocalAfterKick,
}

impl MaximaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MaximaMode::GlobalInPeriod => "global_in_period",
            MaximaMode::FirstLocalAfterKick => "first_local_after_kick",
        }
    }
}

/// Real function of rescaled time.
pub trait Signal<T: Real> {
    fn value(&self, s: T) -> T;
}

impl<T: Real, F: Fn(T) -> T> Signal<T> for F {
    fn value(&self, s: T) -> T {
        self(s)
    }
}

/// `⟨ψ(s)|O|ψ(s)⟩` for a freely rotating state.
#[derive(Debug, Clone)]
pub struct ExpectationSignal<T: Real> {
    constant: T,
    harmonics: Vec<(T, C<T>)>,
}

impl<T: Real> ExpectationSignal<T> {
    pub fn new(state: &RotorState<T>, op: &RotorOperator<T>, epsilon: T) -> Result<Self> {
        check_dims(op.dim(), state.dim())?;
        let a = state.amplitudes();
        let m = op.matrix();
        let n = state.dim();
        let mut constant = T::zero();
        let mut harmonics = Vec::new();
        for j in 0..n {
            constant += (a[j].conj() * m[(j, j)] * a[j]).re;
            for k in (j + 1)..n {
                let c = a[j].conj() * m[(j, k)] * a[k];
                if c.norm_sqr() > T::zero() {
                    let omega = epsilon * (level_energy::<T>(j) - level_energy::<T>(k));
                    harmonics.push((omega, c * T::lit(2.0)));
                }
            }
        }
        Ok(Self {
            constant,
            harmonics,
        })
    }

    /// Time derivative at `s`.
    pub fn derivative(&self, s: T) -> T {
        self.harmonics.iter().fold(T::zero(), |acc, &(w, c)| {
            let z = c * cis(w * s) * C::new(T::zero(), w);
            acc + z.re
        })
    }

    /// Second time derivative at `s`.
    pub fn curvature(&self, s: T) -> T {
        self.harmonics
            .iter()
            .fold(T::zero(), |acc, &(w, c)| acc - w * w * (c * cis(w * s)).re)
    }

    /// Newton iterations on the derivative, kept only while they stay within
    /// `radius` of `start` and do not lower the value.
    pub fn polish(&self, start: Extremum<T>, radius: T) -> Extremum<T> {
        let mut best = start;
        for _ in 0..4 {
            let curv = self.curvature(best.s);
            if !(curv < T::zero()) {
                break;
            }
            let s = best.s - self.derivative(best.s) / curv;
            if (s - start.s).abs() > radius || !(s > T::zero()) {
                break;
            }
            let value = self.value(s);
            if value + T::tol(1e-14) < best.value {
                break;
            }
            best = Extremum { s, value };
        }
        best
    }
}

impl<T: Real> Signal<T> for ExpectationSignal<T> {
    fn value(&self, s: T) -> T {
        self.harmonics
            .iter()
            .fold(self.constant, |acc, &(w, c)| acc + (c * cis(w * s)).re)
    }
}

/// `|⟨χ|ψ(s)⟩|²` for a freely rotating state and a fixed target.
#[derive(Debug, Clone)]
pub struct ProjectionSignal<T: Real> {
    weights: DVector<C<T>>,
    rates: DVector<T>,
}

impl<T: Real> ProjectionSignal<T> {
    pub fn new(state: &RotorState<T>, target: &RotorState<T>, epsilon: T) -> Result<Self> {
        check_dims(target.dim(), state.dim())?;
        let n = state.dim();
        Ok(Self {
            weights: DVector::from_iterator(
                n,
                (0..n).map(|j| target.amplitude(j).conj() * state.amplitude(j)),
            ),
            rates: DVector::from_iterator(n, (0..n).map(|j| epsilon * level_energy::<T>(j))),
        })
    }
}

impl<T: Real> Signal<T> for ProjectionSignal<T> {
    fn value(&self, s: T) -> T {
        self.weights
            .iter()
            .zip(self.rates.iter())
            .fold(C::new(T::zero(), T::zero()), |acc, (&w, &r)| acc + w * cis(-r * s))
            .norm_sqr()
    }
}

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub s: T,
    pub value: T,
}

/// Golden-section maximization of `f` on `[a, b]` down to a bracket of width
/// `tol`; the endpoints are compared against the interior result.
pub fn golden_section_max<T: Real, S: Signal<T> + ?Sized>(f: &S, a: T, b: T, tol: T) -> Extremum<T> {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f.value(x1);
    let mut f2 = f.value(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f.value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f.value(x1);
        }
    }
    let mid = (lo + hi) * T::lit(0.5);
    let mut best = Extremum {
        s: mid,
        value: f.value(mid),
    };
    for x in [a, b] {
        let v = f.value(x);
        if v > best.value {
            best = Extremum { s: x, value: v };
        }
    }
    best
}

/// Searches `(0, π/ε]` for the maximum selected by `mode`.
///
/// A coarse scan on [`SEARCH_GRID`] points is refined by golden section in
/// the bracketing grid cells. Equal maxima resolve to the earliest one. A
/// signal that is constant over the period is reported as
/// [`Error::StationarySignal`].
pub fn find_maximum<T: Real, S: Signal<T> + ?Sized>(signal: &S, epsilon: T, mode: MaximaMode) -> Result<Extremum<T>> {
    let period = rotational_period(epsilon);
    let n = SEARCH_GRID;
    let h = period / T::lit(n as f64);
    let grid: Vec<T> = (0..=n).map(|k| signal.value(h * T::lit(k as f64))).collect();

    let (lo, hi) = grid[1..]
        .iter()
        .fold((grid[0], grid[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo <= T::tol(1e-12) * (T::one() + hi.abs()) {
        return Err(Error::StationarySignal);
    }

    let tol = period * T::lit(REFINE_FRACTION);
    let refine = |k: usize, span: usize| {
        let a = h * T::lit(k.saturating_sub(1) as f64);
        let b = h * T::lit((k + span).min(n) as f64);
        golden_section_max(signal, a, b, tol)
    };

    if mode == MaximaMode::FirstLocalAfterKick {
        let slope = |k: usize| grid[k + 1] - grid[k - 1];
        for k in 1..n - 1 {
            if slope(k) > T::zero() && slope(k + 1) <= T::zero() {
                let best = refine(k, 2);
                if best.s > T::zero() {
                    return Ok(best);
                }
            }
        }
    }

    let tie = T::tol(1e-12) * (T::one() + hi.abs());
    let k = (1..=n)
        .find(|&k| grid[k] >= hi - tie)
        .expect("maximum is attained on the grid");
    let mut best = refine(k, 1);
    if best.s <= T::zero() {
        // The bracket touches s = 0 only when k = 1; the kick instant itself is
        // excluded from the window.
        best = golden_section_max(signal, h * T::lit(0.5), h * T::lit(2.0), tol);
    }
    Ok(best)
}
