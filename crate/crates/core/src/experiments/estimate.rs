//! Short-delay estimates of the time between S1 orientation kicks and the
//! long orientation train used to check them.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{build_cos, build_cos2, build_cos_power, build_j2, build_sigma_theta, embed_or_truncate, RotorState};
use crate::error::{Error, Result};
use crate::num::C;
use crate::propagator::{propagate_schedule, KickKind, PropagationOptions, Trajectory, DEFAULT_SAMPLES_PER_PERIOD};
use crate::strategy::{run_strategy, StrategyConfig, StrategyRun};
use crate::target::{target_for, Extremum};

use super::output::{join, write_json, write_kicks, write_table, write_trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    General,
    LargeA,
    SmallA,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Regime::General),
            "large_a" | "large-a" => Ok(Regime::LargeA),
            "small_a" | "small-a" => Ok(Regime::SmallA),
            _ => Err(Error::config("regime", "expected general, large_a or small_a")),
        }
    }
}

/// Expectation values entering the delay estimate, taken in the state
/// before the kick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayMoments {
    pub cos2: f64,
    /// `Re⟨cosθ J²⟩`.
    pub cos_j2: f64,
    /// `⟨cosθ − cos³θ⟩`.
    pub cos_minus_cos3: f64,
    /// `Im⟨σ_θ cosθ⟩`.
    pub im_sigma_cos: f64,
}

impl DelayMoments {
    /// Moments of `state` after embedding it in a basis of at least `n_exact`
    /// levels; all products are built one level larger so no intermediate
    /// level is cut.
    pub fn of(state: &RotorState<f64>, n_exact: usize) -> Result<Self> {
        let n = n_exact.max(state.dim());
        let (psi, _) = embed_or_truncate(state, n)?;
        let a = psi.amplitudes();
        let big = n + 1;
        let block = |m: DMatrix<C<f64>>| m.view((0, 0), (n, n)).into_owned();
        let c_big = build_cos::<f64>(big)?.into_matrix();
        let cos_j2 = block(&c_big * build_j2::<f64>(big)?.into_matrix());
        let sigma_cos = block(build_sigma_theta::<f64>(big)? * &c_big);
        let c1 = build_cos::<f64>(n)?.into_matrix();
        let c3 = build_cos_power::<f64>(n, 3)?.into_matrix();
        let q = |m: &DMatrix<C<f64>>| a.dotc(&(m * a));
        Ok(Self {
            cos2: q(build_cos2::<f64>(n)?.matrix()).re,
            cos_j2: q(&cos_j2).re,
            cos_minus_cos3: q(&(c1 - c3)).re,
            im_sigma_cos: q(&sigma_cos).im,
        })
    }

    /// `4Re⟨cosθJ²⟩ − 8A·Im⟨σ_θcosθ⟩ + 4A²⟨cosθ − cos³θ⟩`, the curvature
    /// factor of `⟨cosθ⟩(s)` right after a kick.
    pub fn curvature_factor(&self, area: f64) -> f64 {
        4.0 * self.cos_j2 - 8.0 * area * self.im_sigma_cos + 4.0 * area * area * self.cos_minus_cos3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayEstimate {
    pub regime: Regime,
    pub delta_s: f64,
    pub delta_t_over_trot: f64,
    /// Predicted rise of `⟨cosθ⟩` between the two maxima.
    pub delta_gain: f64,
    pub denominator: f64,
    pub moments: DelayMoments,
}

/// Delay to the next maximum of `⟨cosθ⟩` after an orientation kick of `area`
/// applied to `state`, from a second-order expansion in the delay.
///
/// `General` keeps the full curvature factor; `SmallA` keeps its `A⁰` term
/// (`Δs = k_<A` in units of the period) and `LargeA` its `A²` term
/// (`Δs ∝ 1/A`).
pub fn interpulse_estimate(
    state: &RotorState<f64>,
    area: f64,
    epsilon: f64,
    regime: Regime,
    n_exact: usize,
) -> Result<DelayEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::config("epsilon", "must be positive"));
    }
    let m = DelayMoments::of(state, n_exact)?;
    let denominator = match regime {
        Regime::General => m.curvature_factor(area),
        Regime::SmallA => 4.0 * m.cos_j2,
        Regime::LargeA => 4.0 * area * area * m.cos_minus_cos3,
    };
    if denominator.abs() < 1e-12 {
        return Err(Error::EstimateUndefined { denominator });
    }
    let lift = 1.0 - m.cos2;
    let delta_s = 2.0 * area * lift / (epsilon * denominator);
    Ok(DelayEstimate {
        regime,
        delta_s,
        delta_t_over_trot: epsilon * delta_s / std::f64::consts::PI,
        delta_gain: 2.0 * area * area * lift * lift / denominator,
        denominator,
        moments: m,
    })
}

/// Parameters of the long orientation train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub n_kicks: usize,
    pub area: f64,
    pub epsilon: f64,
    /// Basis the train runs in.
    pub n_exact: usize,
    /// Size of the subspace whose target feeds the estimate.
    pub n_control: usize,
    /// Top levels of the basis whose population counts as leakage.
    pub edge_levels: usize,
    pub sampling_per_period: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_kicks: 30,
            area: 1.0,
            epsilon: 0.01,
            n_exact: crate::basis::DEFAULT_N_EXACT,
            n_control: 5,
            edge_levels: 4,
            sampling_per_period: DEFAULT_SAMPLES_PER_PERIOD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub config: TrainConfig,
    pub run: StrategyRun<f64>,
    /// Successive kick delays over the rotational period.
    pub delays: Vec<f64>,
    pub last_ten_mean: f64,
    pub first_ten_mean: f64,
    /// Small-area estimate from the `n_control` target.
    pub estimate: DelayEstimate,
    /// Largest population in the top `edge_levels` levels along the trajectory.
    pub edge_leakage: f64,
    pub trajectory: Trajectory<f64>,
}

impl TrainResult {
    pub fn delays_shrink(&self) -> bool {
        self.last_ten_mean < self.first_ten_mean
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// S1 orientation train at global maxima, run in the full `n_exact` basis
/// with no gain cutoff.
pub fn fig9_train(config: TrainConfig) -> Result<TrainResult> {
    if config.n_kicks < 11 {
        return Err(Error::config("n_kicks", "needs at least 11 kicks for ten delays"));
    }
    if config.edge_levels == 0 || config.edge_levels >= config.n_exact {
        return Err(Error::config("edge_levels", "must be inside the basis"));
    }
    let mut strategy = StrategyConfig::<f64>::new(KickKind::Orientation);
    strategy.area = config.area;
    strategy.epsilon = config.epsilon;
    strategy.n_control = config.n_exact;
    strategy.max_kicks = config.n_kicks;
    strategy.stop_gain = 0.0;
    let run = run_strategy(&strategy, &RotorState::ground(config.n_exact)?)?;
    let delays = run.delays_over_trot(config.epsilon);
    if delays.len() < 10 {
        return Err(Error::Empty("train stopped before ten delays"));
    }

    let chi = target_for::<f64>(KickKind::Orientation, config.n_control, Extremum::Maximize)?;
    let estimate = interpulse_estimate(&chi.state, config.area, config.epsilon, Regime::SmallA, config.n_exact)?;

    let mut options = PropagationOptions::per_period(KickKind::Orientation, config.epsilon, config.sampling_per_period);
    options.target = Some(&chi);
    options.control_dim = Some(config.n_exact - config.edge_levels);
    let trajectory = propagate_schedule(&RotorState::ground(config.n_exact)?, &run.kicks, config.epsilon, &options)?;

    Ok(TrainResult {
        config,
        last_ten_mean: mean(&delays[delays.len() - 10..]),
        first_ten_mean: mean(&delays[..10]),
        delays,
        estimate,
        edge_leakage: trajectory.max_leakage(),
        run,
        trajectory,
    })
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    preset: &'a str,
    kick_count: usize,
    final_efficiency: f64,
    converged: bool,
    max_leakage: f64,
    last_ten_mean_delay: f64,
    estimate_delay: f64,
    delays_shrink: bool,
}

/// Writes trajectory, kicks, delays and summary for a train.
pub fn write_train(result: &TrainResult, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
    let traj = join(dir, name, "trajectory.csv");
    write_trajectory(&traj, &result.trajectory)?;
    let kicks = join(dir, name, "kicks.csv");
    write_kicks(&kicks, &result.run.kicks, &result.run.values, result.config.epsilon)?;
    let delays = join(dir, name, "delays.csv");
    let rows: Vec<Vec<f64>> = result
        .delays
        .iter()
        .enumerate()
        .map(|(i, &d)| vec![(i + 1) as f64, d])
        .collect();
    write_table(&delays, &["kick_index", "delay_over_Trot"], &rows)?;
    let summary = join(dir, name, "summary.json");
    write_json(
        &summary,
        &TrainSummary {
            preset: name,
            kick_count: result.run.kicks.len(),
            final_efficiency: result.run.final_value,
            converged: result.run.converged,
            max_leakage: result.edge_leakage,
            last_ten_mean_delay: result.last_ten_mean,
            estimate_delay: result.estimate.delta_t_over_trot,
            delays_shrink: result.delays_shrink(),
        },
    )?;
    Ok(vec![traj, kicks, delays, summary])
}
