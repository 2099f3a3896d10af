use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use npsa_core::baselines::adjusted_value;
use npsa_core::experiments::{
    fit_and_export, run_convergence, run_fraud_replay, run_robustness, simulate_batch, synthetic_scored_streams,
    write_rows, ExperimentConfig, SyntheticFraud, CURVE_GRID_POINTS,
};
use npsa_core::io::{read_realizations, write_realizations};
use npsa_core::policy::{derive_critical_curves, replay_policy, CriticalCurveSet};
use npsa_core::rng::derive_seed;
use npsa_core::{Realization, Result};

#[derive(Parser)]
#[command(name = "npsa", version, about = "Non-parametric sequential assignment: fit, derive, replay, experiment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config file plus `key=value` overrides. Keys: distribution, mean,
/// lomax_shape, lomax_scale, rate, horizon, workers, train_realizations,
/// m_sweep, test_realizations, modifiers, positive_threshold, fraud_rate,
/// value_floor, perfect_scores, seed, rtol, atol, output.
#[derive(Args)]
struct ConfigArgs {
    /// TOML file of `key = value` settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set rate=2.5 --set workers=[1,3]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self, base: ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(base, self.config.as_deref(), &self.overrides)?;
        if self.out.is_some() {
            cfg.output.clone_from(&self.out);
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate `train_realizations` streams of the configured scenario as a
    /// realization CSV (`realization_id,t,value[,score,label]`).
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Emit synthetic scored streams (fraud defaults) instead of plain ones.
        #[arg(long)]
        scored: bool,
    },
    /// Fit rate and mean shortage estimates on a realization CSV and write
    /// `<prefix>_intensity.csv` (bin_start,bin_end,rate), `<prefix>_phi.csv`
    /// (x,phi) and `<prefix>_curves.csv` (t,y_1..y_n on 1024 points).
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        horizon: f64,
        #[arg(long, short)]
        workers: usize,
        #[arg(long)]
        out_prefix: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-8)]
        atol: f64,
    },
    /// Critical curves of the configured analytic scenario for the largest
    /// worker count, as `t,y_1,...,y_n`.
    Curves {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = CURVE_GRID_POINTS)]
        points: usize,
    },
    /// Replay a curves CSV over a realization CSV. Writes
    /// `realization_id,accepted,total_reward`.
    Replay {
        #[arg(long)]
        curves: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Threshold score times value instead of the raw value.
        #[arg(long)]
        adjusted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence in `M`. Columns: m, n, mean_normalized_reward,
    /// standard_error, cesaro_average, optimal_reward.
    ExptConvergence {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Robustness to scaled test-time rate or mean. Columns: sweep, delta, n,
    /// mean_normalized_reward, standard_error, expected_normalized_reward,
    /// optimal_reward.
    ExptRobustness {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Fitted policy versus baselines on scored streams. Columns: n, policy,
    /// realizations, value_fraction_mean, value_fraction_se,
    /// count_fraction_mean, count_fraction_se, realized_value_mean.
    /// Without `--train`/`--test`, synthetic streams are generated.
    ExptFraud {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, requires = "test")]
        train: Option<PathBuf>,
        #[arg(long, requires = "train")]
        test: Option<PathBuf>,
    },
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_csv(path: &Path, horizon: f64) -> Result<Vec<(u64, Realization)>> {
    read_realizations(File::open(path)?, horizon)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { cfg, scored } => {
            let base = if scored { ExperimentConfig::fraud() } else { ExperimentConfig::convergence() };
            let cfg = cfg.load(base)?;
            let seed = derive_seed(cfg.seed, &[0]);
            let realizations = if scored {
                synthetic_scored_streams(&SyntheticFraud::from_config(&cfg)?, seed, cfg.train_realizations)?
            } else {
                simulate_batch(&cfg.intensity()?, &cfg.value_distribution()?, cfg.horizon, seed, cfg.train_realizations)?
            };
            let items = realizations.iter().enumerate().map(|(i, r)| (i as u64, r));
            write_realizations(sink(cfg.output.as_deref())?, items)
        }
        Command::Fit { input, horizon, workers, out_prefix, rtol, atol } => {
            let solver = npsa_core::SolverConfig::with_tolerances(rtol, atol);
            let paths = fit_and_export(&input, horizon, workers, &out_prefix, &solver)?;
            for p in [paths.intensity, paths.mean_shortage, paths.curves] {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Curves { cfg, points } => {
            let cfg = cfg.load(ExperimentConfig::convergence())?;
            let curves = derive_critical_curves(
                &cfg.intensity()?,
                &cfg.value_distribution()?,
                cfg.max_workers(),
                cfg.horizon,
                &cfg.solver(),
            )?;
            curves.write_csv(sink(cfg.output.as_deref())?, points)
        }
        Command::Replay { curves, input, adjusted, out } => {
            let curves = CriticalCurveSet::read_csv(File::open(&curves)?)?;
            let realizations = read_csv(&input, curves.horizon())?;
            let mut w = sink(out.as_deref())?;
            writeln!(w, "realization_id,accepted,total_reward")?;
            for (id, r) in &realizations {
                let res = if adjusted {
                    replay_policy(&curves, r, adjusted_value)?
                } else {
                    replay_policy(&curves, r, |e| e.value)?
                };
                writeln!(w, "{id},{},{}", res.workers_used(), res.total_reward)?;
            }
            w.flush()?;
            Ok(())
        }
        Command::ExptConvergence { cfg } => {
            let cfg = cfg.load(ExperimentConfig::convergence())?;
            write_rows(sink(cfg.output.as_deref())?, &run_convergence(&cfg)?)
        }
        Command::ExptRobustness { cfg } => {
            let cfg = cfg.load(ExperimentConfig::robustness())?;
            write_rows(sink(cfg.output.as_deref())?, &run_robustness(&cfg)?)
        }
        Command::ExptFraud { cfg, train, test } => {
            let cfg = cfg.load(ExperimentConfig::fraud())?;
            let (train, test) = match (train, test) {
                (Some(a), Some(b)) => {
                    let strip = |v: Vec<(u64, Realization)>| v.into_iter().map(|(_, r)| r).collect::<Vec<_>>();
                    (strip(read_csv(&a, cfg.horizon)?), strip(read_csv(&b, cfg.horizon)?))
                }
                _ => {
                    let spec = SyntheticFraud::from_config(&cfg)?;
                    (
                        synthetic_scored_streams(&spec, derive_seed(cfg.seed, &[1]), cfg.train_realizations)?,
                        synthetic_scored_streams(&spec, derive_seed(cfg.seed, &[2]), cfg.test_realizations)?,
                    )
                }
            };
            let rows = run_fraud_replay(&train, &test, &cfg.workers, cfg.positive_threshold, cfg.seed, &cfg.solver())?;
            write_rows(sink(cfg.output.as_deref())?, &rows)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
