use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::{
    run_experiment, write_comparison, ExperimentConfig, HarnessError, Horizon, Prepared, ScheduleKind, SetConfig, Task, OUTPUT_DIR_ENV,
};
use crate::learners::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "onseg", version, about = "Bandit online Newton step experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its trace.
    Run(ExperimentArgs),
    /// Run several algorithms on one task and write a merged wide CSV.
    Compare {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Algorithms to compare.
        #[arg(long, value_delimiter = ',', default_value = "onseg,ogdeg")]
        algos: Vec<Algorithm>,
    },
    /// Repeat an experiment over a grid of horizons or perturbation radii.
    Sweep {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long, value_enum)]
        over: SweepParameter,
        /// Grid values, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Print the estimated loss, gradient and Lipschitz bounds of a dataset.
    Bounds(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParameter {
    #[value(name = "T")]
    Horizon,
    Delta,
}

/// Flags mirroring `ExperimentConfig`; each one overrides the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// JSON configuration file; flags given alongside take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long)]
    pub algo: Option<Algorithm>,
    /// libSVM file, or a returns CSV for the portfolio task.
    #[arg(long = "data")]
    pub data_path: Option<PathBuf>,
    /// Ball diameter.
    #[arg(long)]
    pub diameter: Option<f64>,
    /// Radius of a ball contained in the set.
    #[arg(long)]
    pub inner_radius: Option<f64>,
    /// Use the probability simplex as the feasible set.
    #[arg(long, conflicts_with_all = ["diameter", "inner_radius"])]
    pub simplex: bool,
    #[arg(long)]
    pub schedule: Option<ScheduleKind>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Loss bound F.
    #[arg(long = "loss-bound", visible_alias = "F")]
    pub loss_bound: Option<f64>,
    /// Gradient bound G.
    #[arg(long = "grad-bound", visible_alias = "G")]
    pub grad_bound: Option<f64>,
    /// Lipschitz constant L.
    #[arg(long, visible_alias = "L")]
    pub lipschitz: Option<f64>,
    /// Horizon: a round count or a multiple of the dataset size like 150n.
    #[arg(long = "T", visible_alias = "horizon")]
    pub horizon: Option<Horizon>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output path; defaults to a generated name in $ONSEG_OUTPUT_DIR.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replay samples in a seeded random order.
    #[arg(long)]
    pub shuffle: bool,
    /// Skip the offline solve; the regret column is left empty.
    #[arg(long)]
    pub no_regret: bool,
    /// Dimension of the built-in quadratic stream.
    #[arg(long)]
    pub dim: Option<usize>,
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = self.$field.clone() {
                    c.$field = v;
                }
            };
            ($field:ident, some) => {
                if self.$field.is_some() {
                    c.$field = self.$field.clone();
                }
            };
        }
        take!(task);
        take!(algo);
        take!(schedule);
        take!(sigma);
        take!(horizon);
        take!(seed);
        take!(trials);
        take!(dim);
        take!(data_path, some);
        take!(delta, some);
        take!(gamma, some);
        take!(beta, some);
        take!(loss_bound, some);
        take!(grad_bound, some);
        take!(lipschitz, some);
        take!(out, some);
        c.shuffle |= self.shuffle;
        if self.no_regret {
            c.regret = false;
        }
        if self.simplex {
            c.set = Some(SetConfig::Simplex);
        } else if self.diameter.is_some() || self.inner_radius.is_some() {
            let (d0, r0) = match c.set_config() {
                SetConfig::Ball { diameter, inner_radius } => (diameter, inner_radius),
                SetConfig::Simplex => (10.0, 1.0),
            };
            c.set = Some(SetConfig::Ball {
                diameter: self.diameter.unwrap_or(d0),
                inner_radius: self.inner_radius.unwrap_or(r0),
            });
        }
        c.validate()?;
        Ok(c)
    }
}

fn default_output(name: String) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
        .join(name)
}

fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn describe_metric(task: Task, metric: f64) -> String {
    match task {
        Task::Portfolio => super::format_percent(metric),
        _ => format!("{metric:.6e}"),
    }
}

fn cmd_run(args: &ExperimentArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let config = args.resolve()?;
    let results = run_experiment(&config)?;
    for r in &results {
        let last = r.records.last().expect("horizon is positive");
        let regret = last.regret.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "trial {} seed {}: {} rounds, metric {}, regret {}, trace {}",
            r.trial,
            r.seed,
            r.records.len(),
            describe_metric(config.task, last.metric),
            regret,
            config.trace_path(r.trial).display()
        )
        .ok();
    }
    Ok(())
}

fn cmd_compare(args: &ExperimentArgs, algos: &[Algorithm], out: &mut dyn Write) -> Result<(), HarnessError> {
    let mut config = args.resolve()?;
    if algos.is_empty() {
        return Err(HarnessError::Config("no algorithms to compare".into()));
    }
    if config.out.is_none() {
        config.out = Some(default_output(format!("{}-compare-seed{}.csv", config.task, config.seed)));
    }
    let prepared = Prepared::load(&config)?;
    for trial in 0..config.trials {
        let runs = algos
            .iter()
            .map(|&a| prepared.run_trial_with(a, trial).map(|r| (a, r)))
            .collect::<Result<Vec<_>, _>>()?;
        let views: Vec<_> = runs.iter().map(|(a, r)| (*a, r.records.as_slice())).collect();
        let path = config.trace_path(trial);
        write_comparison(&views, &path).map_err(|e| io_error(&path, e))?;
        for (a, r) in &runs {
            let last = r.records.last().expect("horizon is positive");
            writeln!(out, "trial {trial} {a}: metric {}", describe_metric(config.task, last.metric)).ok();
        }
    }
    Ok(())
}

fn cmd_sweep(args: &ExperimentArgs, over: SweepParameter, values: &[f64], out: &mut dyn Write) -> Result<(), HarnessError> {
    let base = args.resolve()?;
    let path = base
        .out
        .clone()
        .unwrap_or_else(|| default_output(format!("{}-{}-sweep-seed{}.csv", base.task, base.algo, base.seed)));
    let data = super::load_dataset(&base)?;
    let mut rows = vec!["parameter,value,trial,seed,metric,regret".to_string()];
    for &value in values {
        let mut config = base.clone();
        let label = match over {
            SweepParameter::Horizon => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(HarnessError::Config(format!(
                        "horizon values must be positive integers, got {value}"
                    )));
                }
                config.horizon = Horizon::Rounds(value as u64);
                "T"
            }
            SweepParameter::Delta => {
                config.delta = Some(value);
                "delta"
            }
        };
        let results = Prepared::new(&config, data.clone())?.run_trials()?;
        for r in results {
            let last = r.records.last().expect("horizon is positive");
            rows.push(format!(
                "{label},{value},{},{},{:.16e},{}",
                r.trial,
                r.seed,
                last.metric,
                last.regret.map(|v| format!("{v:.16e}")).unwrap_or_default()
            ));
        }
    }
    fs::write(&path, rows.join("\n") + "\n").map_err(|e| io_error(&path, e))?;
    writeln!(out, "wrote {} rows to {}", rows.len() - 1, path.display()).ok();
    Ok(())
}

fn cmd_bounds(args: &ExperimentArgs, out: &mut dyn Write) -> Result<(), HarnessError> {
    let config = args.resolve()?;
    let prepared = Prepared::load(&config)?;
    let b = prepared.bounds;
    writeln!(out, "samples {} dim {}", prepared.data.len(), prepared.data.dim()).ok();
    writeln!(out, "F {:.16e}\nG {:.16e}\nL {:.16e}", b.loss_bound, b.grad_bound, b.lipschitz).ok();
    Ok(())
}

/// Parses `argv` and runs the chosen subcommand, returning the exit code:
/// 0 on success, 2 on usage or configuration errors, 3 on data errors and
/// 1 on anything else (such as an unwritable output path).
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, &mut stdout),
        Command::Compare { experiment, algos } => cmd_compare(experiment, algos, &mut stdout),
        Command::Sweep { experiment, over, values } => cmd_sweep(experiment, *over, values, &mut stdout),
        Command::Bounds(args) => cmd_bounds(args, &mut stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
