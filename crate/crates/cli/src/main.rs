use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotorkick::experiments::{
    self, config::DEFAULTS_HELP, fig9_train, interpulse_estimate, preset, resolve_output_dir, robustness_area,
    robustness_timing, run_scenario, write_train, Regime, Scenario, SweepResult, TrainConfig, PRESETS,
};
use rotorkick::target::{analytic_orientation_target, target_for};
use rotorkick::{efficiency_duration_scan, lie_report, Error, KickKind, RotorState};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "rotorkick", version, about = "Kick-train control of a quantum rigid rotor")]
struct Cli {
    /// Directory for output files [default: config output_dir, then "."]
    #[arg(long, global = true, env = "ROTORKICK_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kinematic bound and high-efficiency duration versus basis size
    Target {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
    /// Run a scenario: closed-loop strategy, replay, exact trajectory
    #[command(after_help = config_help())]
    Run(ScenarioArgs),
    /// Replay a scenario with every inter-kick delay shifted
    SweepTiming {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Shifts as fractions of the rotational period
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-0.001,0,0.001")]
        values: Vec<f64>,
    },
    /// Replay a scenario with every kick area scaled
    SweepArea {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.9,1.0,1.1")]
        values: Vec<f64>,
    },
    /// Lie closure and fixed-point space dimensions
    Lie {
        #[arg(long, default_value = "orientation")]
        kind: KickKind,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        n: Vec<usize>,
    },
    /// Delay between kicks estimated on the orientation target
    Estimate {
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// general | small_a | large_a
        #[arg(long, default_value = "small_a")]
        regime: Regime,
        /// Size of the subspace whose target is used
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Also run the long S1 train and write its files
        #[arg(long)]
        train: bool,
        #[arg(long, default_value_t = 30)]
        kicks: usize,
    },
    /// List built-in scenarios
    Presets {
        /// Print the config text of one preset
        #[arg(long)]
        emit: Option<String>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ScenarioArgs {
    /// Scenario config file
    config: Option<PathBuf>,
    /// Built-in scenario name
    #[arg(long)]
    preset: Option<String>,
}

fn config_help() -> String {
    format!("Config keys and defaults:\n{DEFAULTS_HELP}")
}

fn load(args: &ScenarioArgs) -> rotorkick::Result<Scenario> {
    match (&args.config, &args.preset) {
        (Some(path), _) => experiments::parse_config(path),
        (None, Some(name)) => preset(name).ok_or_else(|| Error::Parse(format!("unknown preset `{name}`"))),
        (None, None) => Err(Error::Parse("a config file or --preset is required".into())),
    }
}

fn out_dir(flag: Option<&Path>, scenario: Option<&Scenario>) -> PathBuf {
    resolve_output_dir(flag, None, scenario.and_then(|s| s.output_dir.as_deref()))
}

fn json<S: serde::Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("serializable report")
}

fn print_sweep(result: &SweepResult) {
    println!("{} baseline {:.6}", result.axis.as_str(), result.baseline);
    for r in &result.rows {
        println!(
            "{:>10} {:.6} {:+.6}",
            r.value,
            r.final_efficiency,
            r.final_efficiency - result.baseline
        );
    }
}

fn run(cli: Cli) -> rotorkick::Result<()> {
    let flag = cli.output_dir.as_deref();
    match cli.command {
        Command::Target { n_min, n_max } => {
            if n_min < 2 || n_max < n_min {
                return Err(Error::Parse("need 2 <= n-min <= n-max".into()));
            }
            let o = efficiency_duration_scan(KickKind::Orientation, n_min..=n_max)?;
            let a = efficiency_duration_scan(KickKind::Alignment, n_min..=n_max)?;
            let mut rows = Vec::new();
            println!("   n  orient  o.dur   analytic  align   a.dur");
            for (po, pa) in o.iter().zip(&a) {
                let analytic = analytic_orientation_target::<f64>(po.n)?.bound;
                println!(
                    "{:>4}  {:.4}  {:.4}  {:.4}    {:.4}  {:.4}",
                    po.n, po.efficiency, po.duration_fraction, analytic, pa.efficiency, pa.duration_fraction
                );
                rows.push(vec![
                    po.n as f64,
                    po.efficiency,
                    po.duration_fraction,
                    analytic,
                    pa.efficiency,
                    pa.duration_fraction,
                ]);
            }
            let path = out_dir(flag, None).join("target_scan.csv");
            experiments::output::write_table(
                &path,
                &[
                    "n",
                    "orientation_efficiency",
                    "orientation_duration",
                    "orientation_analytic_bound",
                    "alignment_efficiency",
                    "alignment_duration",
                ],
                &rows,
            )?;
            eprintln!("wrote {}", path.display());
        }
        Command::Run(args) => {
            let scenario = load(&args)?;
            let dir = out_dir(flag, Some(&scenario));
            let report = run_scenario(&scenario, &dir)?;
            println!("{}", json(&report.summary));
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::SweepTiming { scenario, values } => {
            let scenario = load(&scenario)?;
            let dir = out_dir(flag, Some(&scenario));
            print_sweep(&robustness_timing(&scenario, &values, Some(&dir))?);
        }
        Command::SweepArea { scenario, values } => {
            let scenario = load(&scenario)?;
            let dir = out_dir(flag, Some(&scenario));
            print_sweep(&robustness_area(&scenario, &values, Some(&dir))?);
        }
        Command::Lie { kind, n } => {
            for n in n {
                println!("{}", serde_json::to_string(&lie_report(kind, n)?).expect("serializable report"));
            }
        }
        Command::Estimate {
            area,
            epsilon,
            regime,
            n,
            train,
            kicks,
        } => {
            let chi = target_for::<f64>(KickKind::Orientation, n, rotorkick::Extremum::Maximize)?;
            let state: RotorState = chi.state;
            let estimate = interpulse_estimate(&state, area, epsilon, regime, rotorkick::DEFAULT_N_EXACT)?;
            println!("{}", json(&estimate));
            if train {
                let result = fig9_train(TrainConfig {
                    n_kicks: kicks,
                    area,
                    epsilon,
                    n_control: n,
                    ..TrainConfig::default()
                })?;
                println!(
                    "train: {} kicks, final {:.6}, last-ten mean delay {:.4e} T_rot, edge leakage {:.1e}",
                    result.run.kicks.len(),
                    result.run.final_value,
                    result.last_ten_mean,
                    result.edge_leakage
                );
                for f in write_train(&result, &out_dir(flag, None), "train")? {
                    eprintln!("wrote {}", f.display());
                }
            }
        }
        Command::Presets { emit } => match emit {
            Some(name) => {
                let s = preset(&name).ok_or_else(|| Error::Parse(format!("unknown preset `{name}`")))?;
                print!("{}", s.to_toml());
            }
            None => {
                for p in &PRESETS {
                    println!("{:<24} {}", p.name, p.description);
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERIC })
        }
    }
}
