//! Command-line front end: run scenarios, check consensus criteria, sweep a
//! parameter across values, and list the builtin fixtures.
//!
//! Verdicts are data, not failures: `run` exits 0 whether the agents agree,
//! cluster, or diverge. Only malformed input exits nonzero. All data files
//! are byte-identical across identical invocations; wall-clock timings go to
//! stderr so they never perturb the outputs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use consensus_core::conditions::{check_gain_constraints, check_initial_condition, ConditionId};
use consensus_core::dynamics::ProtocolLaw;
use consensus_core::io::{format_f64, trajectory_to_csv};
use consensus_core::scenario::{
    build_builtin, builtin_catalog, builtin_names, run_scenario, HorizonSpec, InitialSpec,
    RunOutcome, ScenarioConfig, DEFAULT_POS_TOL, DEFAULT_VEL_TOL,
};
use consensus_core::weight::WeightFunction;

const OUTPUT_ENV: &str = "CONSENSUS_LAB_OUTPUT";

#[derive(Parser)]
#[command(
    name = "consensus-lab",
    about = "Simulate multi-agent consensus under state-dependent interaction weights",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write trajectory.csv plus summary.txt.
    Run(RunArgs),
    /// Evaluate consensus criteria against a scenario's initial state.
    Check(CheckArgs),
    /// Re-run a scenario across a list of values for one parameter.
    Sweep(SweepArgs),
    /// List the builtin scenarios.
    List,
}

#[derive(Args)]
struct CommonArgs {
    /// Builtin scenario name or path to a scenario TOML file.
    scenario: String,
    /// Replace the seed of seeded initial-state generators.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the integration step (continuous-time laws only).
    #[arg(long)]
    dt: Option<f64>,
    /// Override the horizon: wall time for continuous laws, steps otherwise.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory (default: $CONSENSUS_LAB_OUTPUT, then ./consensus-lab-out).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Position tolerance for the consensus verdict.
    #[arg(long, default_value_t = DEFAULT_POS_TOL)]
    pos_tol: f64,
    /// Speed tolerance for the consensus verdict.
    #[arg(long, default_value_t = DEFAULT_VEL_TOL)]
    vel_tol: f64,
    /// Override the staircase grid width used by monitors and criteria.
    #[arg(long)]
    staircase_r: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated criteria (default: the scenario's configured list).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<String>,
    /// Staircase grid widths to evaluate; repeatable (default: the
    /// scenario's configured value).
    #[arg(long)]
    staircase_r: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepParameter {
    /// Spacing of an evenly-spaced opinion profile.
    #[value(name = "d")]
    Spacing,
    /// Strength of the flocking-style weight.
    #[value(name = "H")]
    WeightStrength,
    /// Staircase grid width.
    #[value(name = "staircase-r", alias = "staircase_r")]
    StaircaseR,
    /// First-order discrete control gain.
    #[value(name = "h")]
    StepGain,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which parameter to sweep.
    #[arg(long, value_enum)]
    parameter: SweepParameter,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    /// Output directory for sweep.csv.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_POS_TOL)]
    pos_tol: f64,
    #[arg(long, default_value_t = DEFAULT_VEL_TOL)]
    vel_tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::List => cmd_list(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn resolve_scenario(name_or_path: &str) -> Result<ScenarioConfig, String> {
    if builtin_names().contains(&name_or_path) {
        return build_builtin(name_or_path).map_err(|e| e.to_string());
    }
    let path = Path::new(name_or_path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read scenario `{name_or_path}`: {e}"))?;
    ScenarioConfig::from_toml_str(&text).map_err(|e| e.to_string())
}

fn apply_common_overrides(config: &mut ScenarioConfig, common: &CommonArgs) -> Result<(), String> {
    if let Some(dt) = common.dt {
        if !config.protocol.law.is_continuous() {
            return Err(format!(
                "--dt does not apply to law {}",
                config.protocol.law
            ));
        }
        if dt.is_nan() || dt <= 0.0 {
            return Err(format!("--dt must be positive, got {dt}"));
        }
        config.protocol.dt = Some(dt);
    }
    if let Some(h) = common.horizon {
        if h.is_nan() || h < 0.0 {
            return Err(format!("--horizon must be nonnegative, got {h}"));
        }
        config.horizon = if config.protocol.law.is_continuous() {
            HorizonSpec::time(h)
        } else {
            HorizonSpec::steps(h.round() as usize)
        };
    }
    Ok(())
}

fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("consensus-lab-out"))
}

fn format_vector(values: &[f64]) -> String {
    values
        .iter()
        .copied()
        .map(format_f64)
        .collect::<Vec<_>>()
        .join(" ")
}

fn summary_text(outcome: &RunOutcome, pos_tol: f64, vel_tol: f64) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario: {}\n", outcome.scenario));
    out.push_str(&format!("verdict: {}\n", outcome.verdict));
    out.push_str(&format!("pos_tol: {}\n", format_f64(pos_tol)));
    out.push_str(&format!("vel_tol: {}\n", format_f64(vel_tol)));
    out.push_str(&format!("samples: {}\n", outcome.trajectory.len()));
    out.push_str(&format!(
        "final_max_pairwise_distance: {}\n",
        format_f64(outcome.final_max_pairwise)
    ));
    out.push_str(&format!(
        "observed_consensus_value: {}\n",
        format_vector(&outcome.observed)
    ));
    match (&outcome.predicted, outcome.prediction_error) {
        (Some(p), Some(err)) => {
            out.push_str(&format!(
                "predicted_consensus_value: {}\n",
                format_vector(p)
            ));
            out.push_str(&format!("prediction_abs_error: {}\n", format_f64(err)));
        }
        _ => {
            out.push_str("predicted_consensus_value: n/a\n");
            out.push_str("prediction_abs_error: n/a\n");
        }
    }
    if let Some((time, magnitude)) = outcome.trajectory.blowup {
        out.push_str(&format!(
            "blowup: t={} magnitude={}\n",
            format_f64(time),
            format_f64(magnitude)
        ));
    }
    for report in &outcome.condition_reports {
        out.push_str(&format!("condition: {report}\n"));
    }
    for (id, err) in &outcome.condition_errors {
        out.push_str(&format!("condition: criterion={id} error={err}\n"));
    }
    out
}

fn cmd_run(args: RunArgs) -> Result<(), String> {
    let started = Instant::now();
    let mut config = resolve_scenario(&args.common.scenario)?;
    apply_common_overrides(&mut config, &args.common)?;
    if let Some(r) = args.staircase_r {
        if r < 0.0 {
            return Err(format!("--staircase-r must be nonnegative, got {r}"));
        }
        config.staircase_r = r;
    }
    let outcome = run_scenario(&config, args.common.seed, args.pos_tol, args.vel_tol)
        .map_err(|e| e.to_string())?;
    let dir = output_dir(args.output);
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let csv = trajectory_to_csv(&outcome.trajectory);
    let summary = summary_text(&outcome, args.pos_tol, args.vel_tol);
    std::fs::write(dir.join("trajectory.csv"), csv)
        .map_err(|e| format!("cannot write trajectory.csv: {e}"))?;
    std::fs::write(dir.join("summary.txt"), &summary)
        .map_err(|e| format!("cannot write summary.txt: {e}"))?;
    print!("{summary}");
    eprintln!("wall_clock: {:?}", started.elapsed());
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<(), String> {
    let mut config = resolve_scenario(&args.common.scenario)?;
    apply_common_overrides(&mut config, &args.common)?;
    let realized = config
        .realize(args.common.seed)
        .map_err(|e| e.to_string())?;
    let criteria: Vec<ConditionId> = if args.criteria.is_empty() {
        config.conditions.clone()
    } else {
        args.criteria
            .iter()
            .map(|s| s.parse::<ConditionId>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?
    };
    if criteria.is_empty() {
        return Err("no criteria requested and the scenario configures none".into());
    }
    let widths = if args.staircase_r.is_empty() {
        vec![config.staircase_r]
    } else {
        args.staircase_r.clone()
    };
    for criterion in criteria {
        match criterion {
            ConditionId::Gain => {
                match check_gain_constraints(&realized.protocol, &realized.weight, &realized.graph)
                {
                    Ok(report) => println!("{report}"),
                    Err(e) => println!("criterion={criterion} error={e}"),
                }
            }
            _ => {
                for &r in &widths {
                    match check_initial_condition(
                        criterion,
                        &realized.graph,
                        &realized.weight,
                        &realized.initial,
                        r,
                        Some(&realized.protocol),
                    ) {
                        Ok(report) => println!("{report}"),
                        Err(e) => println!("criterion={criterion} staircase_r={r} error={e}"),
                    }
                }
            }
        }
    }
    Ok(())
}

fn apply_sweep_value(
    config: &mut ScenarioConfig,
    parameter: SweepParameter,
    value: f64,
) -> Result<(), String> {
    match parameter {
        SweepParameter::Spacing => match &mut config.initial {
            InitialSpec::EvenlySpaced { spacing, .. } => {
                *spacing = value;
                Ok(())
            }
            _ => Err("parameter `d` needs an evenly-spaced initial profile".into()),
        },
        SweepParameter::WeightStrength => match &mut config.weight {
            WeightFunction::CuckerSmale { h, .. } => {
                *h = value;
                Ok(())
            }
            _ => Err("parameter `H` needs the flocking-style weight family".into()),
        },
        SweepParameter::StaircaseR => {
            config.staircase_r = value;
            Ok(())
        }
        SweepParameter::StepGain => match config.protocol.law {
            ProtocolLaw::Dt1Fixed | ProtocolLaw::Dt1StateDep => {
                config.protocol.h = Some(value);
                Ok(())
            }
            _ => Err(format!(
                "parameter `h` does not apply to law {}",
                config.protocol.law
            )),
        },
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), String> {
    let started = Instant::now();
    let base = resolve_scenario(&args.common.scenario)?;
    let mut values = args.values.clone();
    values.sort_by(|a, b| {
        a.partial_cmp(b)
            .ok_or(())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    // Probe applicability on the base config even for an empty value list.
    let mut probe = base.clone();
    apply_sweep_value(&mut probe, args.parameter, 1.0)?;

    let condition_ids: Vec<ConditionId> = base.conditions.clone();
    let mut header = vec!["value".to_string()];
    header.extend(condition_ids.iter().map(|c| c.to_string()));
    header.push("verdict".to_string());
    let mut rows = vec![header.join(",")];
    let mut table = String::new();
    for &value in &values {
        let mut config = base.clone();
        apply_common_overrides(&mut config, &args.common)?;
        apply_sweep_value(&mut config, args.parameter, value)?;
        let outcome = run_scenario(&config, args.common.seed, args.pos_tol, args.vel_tol)
            .map_err(|e| e.to_string())?;
        let mut row = vec![format_f64(value)];
        for id in &condition_ids {
            let cell = outcome
                .condition_reports
                .iter()
                .find(|r| r.criterion == id.to_string())
                .map(|r| if r.holds { "holds" } else { "fails" })
                .unwrap_or("error");
            row.push(cell.to_string());
        }
        row.push(outcome.verdict.to_string());
        table.push_str(&row.join(","));
        table.push('\n');
        rows.push(row.join(","));
    }
    let dir = output_dir(args.output);
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let mut csv = rows.join("\n");
    csv.push('\n');
    std::fs::write(dir.join("sweep.csv"), &csv)
        .map_err(|e| format!("cannot write sweep.csv: {e}"))?;
    print!("{csv}");
    eprintln!("wall_clock: {:?}", started.elapsed());
    Ok(())
}

fn cmd_list() -> Result<(), String> {
    for (name, description) in builtin_catalog() {
        println!("{name:22} {description}");
    }
    Ok(())
}
