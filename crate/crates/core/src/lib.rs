//! Pulse-train control of a quantum rigid rotor in the sudden-kick limit.
//!
//! The core is generic over the scalar type (see [`Real`]); the aliases at the
//! crate root fix it to `f64`, which is what the experiments use.

// `!(x > 0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod experiments;
pub mod lie;
pub mod num;
pub mod propagator;
pub mod search;
pub mod strategy;
pub mod target;

pub use basis::{
    build_cos, build_cos2, build_j2, embed_or_truncate, expectation, observable, BasisSpec, DEFAULT_N_EXACT,
};
pub use error::{Error, Result};
pub use lie::{ad_sequence, dim_v, equally_spaced, lie_closure_dim, lie_report, real_span_rank, LieReport};
pub use num::{Real, C};
pub use propagator::{
    free_evolve, kick_unitary, propagate_schedule, propagate_state, pulse_area, KickKind, PropagationOptions,
};
pub use search::MaximaMode;
pub use strategy::{
    classify_fixed_point, next_extremum, next_projection_max, post_kick_slope, run_strategy, FixedPointVerdict,
    Scheme, SlopeSpace,
};
pub use target::{analytic_orientation_target, duration_above, efficiency_duration_scan, target_state, Extremum};

pub type RotorOperator = basis::RotorOperator<f64>;
pub type RotorState = basis::RotorState<f64>;
pub type KickEvent = propagator::KickEvent<f64>;
pub type PhysicalPulse = propagator::PhysicalPulse<f64>;
pub type Trajectory = propagator::Trajectory<f64>;
pub type TargetState = target::TargetState<f64>;
pub type StrategyConfig = strategy::StrategyConfig<f64>;
pub type StrategyRun = strategy::StrategyRun<f64>;

pub type RotorOperatorF32 = basis::RotorOperator<f32>;
pub type RotorStateF32 = basis::RotorState<f32>;
