//! Scenario runs and open-loop robustness sweeps.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::basis::{observable, quadratic_form, RotorState};
use crate::error::{Error, Result};
use crate::propagator::{propagate_schedule, rotational_period, KickCache, KickEvent, PropagationOptions, Trajectory};
use crate::search::MaximaMode;
use crate::strategy::{next_extremum, run_strategy, StrategyConfig, StrategyRun};
use crate::target::{target_state, Extremum, TargetState};

use super::config::{Perturbations, Scenario, Series};
use super::output::{join, write_json, write_kicks, write_table, write_trajectory};

/// Open-loop evaluation of a fixed schedule in the control basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOutcome {
    pub kicks: Vec<KickEvent<f64>>,
    /// `⟨O⟩` at each kick instant.
    pub values: Vec<f64>,
    /// Largest `⟨O⟩` within one period after the last kick.
    pub final_value: f64,
    /// Its delay after the last kick.
    pub final_delay: f64,
}

/// Adds `shift·(π/ε)` to every inter-kick delay and scales every area.
pub fn perturb_schedule(kicks: &[KickEvent<f64>], p: Perturbations, epsilon: f64) -> Result<Vec<KickEvent<f64>>> {
    let shift = p.timing_shift_fraction * rotational_period(epsilon);
    kicks
        .iter()
        .enumerate()
        .map(|(i, k)| KickEvent::new(k.s_time + i as f64 * shift, k.area * p.area_scale, k.kind))
        .collect()
}

/// Applies `kicks` to `initial` (taken at `s = 0`) and reports `⟨O⟩` at each
/// kick and the best value reached in the period after the last one.
pub fn evaluate_schedule(
    initial: &RotorState<f64>,
    kicks: &[KickEvent<f64>],
    config: &StrategyConfig<f64>,
) -> Result<ScheduleOutcome> {
    let obs = observable::<f64>(config.kick_kind, initial.dim())?;
    let mut cache = KickCache::new(initial.dim());
    let mut state = initial.clone();
    let mut now = 0.0;
    let mut values = Vec::with_capacity(kicks.len());
    for k in kicks {
        if k.s_time < now {
            return Err(Error::InvalidKick(format!("kick at s = {} precedes s = {now}", k.s_time)));
        }
        state = crate::propagator::free_evolve(&state, config.epsilon, k.s_time - now)?;
        values.push(quadratic_form(state.amplitudes(), obs.matrix()).re);
        state = cache.apply(&state, k.kind, k.area)?;
        now = k.s_time;
    }
    let (final_value, final_delay) = match next_extremum(&state, &obs, config.epsilon, MaximaMode::GlobalInPeriod) {
        Ok(e) => (e.value, e.s),
        Err(Error::StationarySignal) => (quadratic_form(state.amplitudes(), obs.matrix()).re, 0.0),
        Err(e) => return Err(e),
    };
    Ok(ScheduleOutcome {
        kicks: kicks.to_vec(),
        values,
        final_value,
        final_delay,
    })
}

/// Keys of the per-run JSON record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub preset: String,
    pub kick_count: usize,
    pub final_efficiency: f64,
    pub converged: bool,
    pub max_leakage: f64,
    pub scheme: String,
    pub kick_kind: String,
    /// Value at the last maximum selected by the closed loop itself.
    pub closed_loop_final: f64,
    pub final_projection: f64,
    pub stop_reason: crate::strategy::StopReason,
    /// Config text that reproduces this scenario.
    pub config: String,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub run: StrategyRun<f64>,
    pub outcome: ScheduleOutcome,
    pub trajectory: Trajectory<f64>,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

fn control_target(config: &StrategyConfig<f64>) -> Result<TargetState<f64>> {
    target_state(&observable(config.kick_kind, config.n_control)?, Extremum::Maximize)
}

fn exact_trajectory(scenario: &Scenario, kicks: &[KickEvent<f64>], target: &TargetState<f64>) -> Result<Trajectory<f64>> {
    let c = &scenario.config;
    let mut options = PropagationOptions::per_period(c.kick_kind, c.epsilon, scenario.sampling_per_period);
    options.target = Some(target);
    options.control_dim = Some(scenario.basis.n_control);
    propagate_schedule(&RotorState::ground(scenario.basis.n_exact)?, kicks, c.epsilon, &options)
}

/// Closed-loop run from the ground state, open-loop replay with the
/// scenario's perturbations, and exact-basis trajectory. Files go to `dir`.
pub fn run_scenario(scenario: &Scenario, dir: &Path) -> Result<ScenarioReport> {
    scenario.validate()?;
    let c = &scenario.config;
    let initial = RotorState::ground(c.n_control)?;
    let run = run_strategy(c, &initial)?;
    let kicks = perturb_schedule(&run.kicks, scenario.perturbations(), c.epsilon)?;
    let outcome = evaluate_schedule(&initial, &kicks, c)?;
    let target = control_target(c)?;
    let trajectory = exact_trajectory(scenario, &kicks, &target)?;
    let summary = Summary {
        preset: scenario.name.clone(),
        kick_count: kicks.len(),
        final_efficiency: outcome.final_value,
        converged: run.converged,
        max_leakage: trajectory.max_leakage(),
        scheme: c.scheme.as_str().to_string(),
        kick_kind: c.kick_kind.as_str().to_string(),
        closed_loop_final: run.final_value,
        final_projection: run.final_projection,
        stop_reason: run.stop,
        config: scenario.to_toml(),
    };

    let mut files = Vec::new();
    for series in &scenario.outputs {
        let path = match series {
            Series::Trajectory => {
                let p = join(dir, &scenario.name, "trajectory.csv");
                write_trajectory(&p, &trajectory)?;
                p
            }
            Series::Kicks => {
                let p = join(dir, &scenario.name, "kicks.csv");
                write_kicks(&p, &kicks, &outcome.values, c.epsilon)?;
                p
            }
            Series::Summary => {
                let p = join(dir, &scenario.name, "summary.json");
                write_json(&p, &summary)?;
                p
            }
        };
        files.push(path);
    }
    Ok(ScenarioReport {
        run,
        outcome,
        trajectory,
        summary,
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    TimingShiftFraction,
    AreaScale,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::TimingShiftFraction => "timing_shift_fraction",
            SweepAxis::AreaScale => "area_scale",
        }
    }

    fn perturbation(self, value: f64) -> Perturbations {
        match self {
            SweepAxis::TimingShiftFraction => Perturbations {
                timing_shift_fraction: value,
                area_scale: 1.0,
            },
            SweepAxis::AreaScale => Perturbations {
                timing_shift_fraction: 0.0,
                area_scale: value,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub final_efficiency: f64,
    pub kick_times: Vec<f64>,
    pub trajectory_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// Final efficiency of the unperturbed schedule.
    pub baseline: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Largest `baseline − final` over the rows.
    pub fn worst_degradation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| self.baseline - r.final_efficiency)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn sweep(scenario: &Scenario, axis: SweepAxis, values: &[f64], dir: Option<&Path>) -> Result<SweepResult> {
    scenario.validate()?;
    if values.is_empty() {
        return Err(Error::Empty("sweep values"));
    }
    for &v in values {
        axis.perturbation(v).validate()?;
    }
    let c = scenario.config;
    let initial = RotorState::ground(c.n_control)?;
    let run = run_strategy(&c, &initial)?;
    let baseline = evaluate_schedule(&initial, &run.kicks, &c)?.final_value;
    let target = control_target(&c)?;

    let rows: Vec<Result<SweepRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &value)| {
                let (run, initial, target) = (&run, &initial, &target);
                scope.spawn(move || -> Result<SweepRow> {
                    let kicks = perturb_schedule(&run.kicks, axis.perturbation(value), c.epsilon)?;
                    let outcome = evaluate_schedule(initial, &kicks, &c)?;
                    let trajectory_file = match dir {
                        Some(d) => {
                            let p = join(d, &scenario.name, &format!("{}_{i}.csv", axis.as_str()));
                            write_trajectory(&p, &exact_trajectory(scenario, &kicks, target)?)?;
                            Some(p)
                        }
                        None => None,
                    };
                    Ok(SweepRow {
                        value,
                        final_efficiency: outcome.final_value,
                        kick_times: kicks.iter().map(|k| k.s_time).collect(),
                        trajectory_file,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let result = SweepResult { axis, baseline, rows };
    if let Some(d) = dir {
        let table: Vec<Vec<f64>> = result
            .rows
            .iter()
            .map(|r| vec![r.value, r.final_efficiency, result.baseline - r.final_efficiency])
            .collect();
        write_table(
            &join(d, &scenario.name, &format!("sweep_{}.csv", axis.as_str())),
            &[axis.as_str(), "final_efficiency", "degradation"],
            &table,
        )?;
    }
    Ok(result)
}

/// Replays the closed-loop schedule with every inter-kick delay shifted by
/// each fraction of the rotational period.
pub fn robustness_timing(scenario: &Scenario, shift_fractions: &[f64], dir: Option<&Path>) -> Result<SweepResult> {
    sweep(scenario, SweepAxis::TimingShiftFraction, shift_fractions, dir)
}

/// Replays the closed-loop schedule with every area scaled.
pub fn robustness_area(scenario: &Scenario, scales: &[f64], dir: Option<&Path>) -> Result<SweepResult> {
    sweep(scenario, SweepAxis::AreaScale, scales, dir)
}
