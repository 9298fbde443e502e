use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bandit_lab::bench::{self, Axis, SweepPlan};
use bandit_lab::config::load_config;
use bandit_lab::formats::{read_jsonl, read_table, write_jsonl, write_jsonl_file, write_table};
use bandit_lab::{LabError, LabResult};
use bandit_lab_core::env::Environment;
use bandit_lab_core::estimate::EstimateSet;
use bandit_lab_core::explore::EpisodeLog;
use bandit_lab_core::model::ModelConfig;
use bandit_lab_core::oracle::{self, delta_policy_episode};
use bandit_lab_core::pipeline::{explore_population, resolve_beta, Algo};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bandit-lab",
    version,
    about = "Threshold-user bandit simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the δ-policy table and write it as JSON.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm `runs` times and write CSV rows.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_algo)]
        algo: Algo,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        /// Precomputed oracle table; solved on the fly when absent.
        #[arg(long)]
        table: Option<PathBuf>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter and write CSV rows.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_axis)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        runs: u64,
        /// Comma-separated algorithms.
        #[arg(long, value_delimiter = ',', value_parser = parse_algo, default_value = "ucb-pvi-hf,sl")]
        algo: Vec<Algo>,
        /// Population size for axes other than `n`.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the log-log slope of mean δ-regret against N from an n-axis CSV.
    Slope {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "ucb-pvi-hf")]
        algo: String,
    },
    /// Explore `n` users and write their episode logs as JSON lines.
    Explore {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print K, p̂1, p̂2 and η for a file of episode logs.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        logs: PathBuf,
        /// β the logs were explored with; resolved from the config when absent.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Play the δ-oracle policy for `n` users and write the step trace.
    Trace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_algo(s: &str) -> Result<Algo, String> {
    s.parse().map_err(|e: bandit_lab_core::Error| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: LabError| e.to_string())
}

fn config(path: &Path) -> LabResult<ModelConfig> {
    let (cfg, warnings) = load_config(path)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn output(path: Option<&Path>) -> LabResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            LabError::Io {
                path: p.into(),
                source,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    })
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

fn run(cli: Cli) -> LabResult<()> {
    let pool = bench::worker_pool(bench::threads_from_env()?)?;
    match cli.command {
        Command::Oracle { config: c, out } => {
            let cfg = config(&c)?;
            let start = Instant::now();
            let table = pool.install(|| oracle::solve(&cfg))?;
            write_table(&out, &table)?;
            println!(
                "V*_δ(0,1,{}) = {:.6}",
                cfg.budget,
                table.root_value(cfg.budget)
            );
            eprintln!(
                "solved M={} B={} in {:.2?}",
                cfg.grid_m,
                cfg.budget,
                start.elapsed()
            );
        }
        Command::Run {
            config: c,
            algo,
            n,
            seed,
            runs,
            table,
            out,
        } => {
            let cfg = config(&c)?;
            let table = match table {
                Some(p) => {
                    let t = read_table(&p)?;
                    if t.header.config_hash != cfg.fingerprint() {
                        return Err(LabError::Usage(format!(
                            "{} was solved for a different configuration",
                            p.display()
                        )));
                    }
                    t
                }
                None => pool.install(|| oracle::solve(&cfg))?,
            };
            let start = Instant::now();
            let rows = pool.install(|| {
                (0..runs)
                    .map(|run| {
                        let rep = bandit_lab_core::pipeline::run_pipeline(
                            &cfg,
                            algo,
                            n,
                            bandit_lab_core::rng::derive_seed(seed, run),
                            &table,
                        )?;
                        Ok(bench::CsvRow::from_report(Axis::N, n as f64, run, &rep))
                    })
                    .collect::<LabResult<Vec<_>>>()
            })?;
            bench::write_csv(output(out.as_deref())?, &rows)?;
            eprintln!(
                "{runs} run(s) of {algo} with N={n} in {:.2?}",
                start.elapsed()
            );
        }
        Command::Sweep {
            config: c,
            axis,
            values,
            runs,
            algo,
            n,
            seed,
            out,
        } => {
            let plan = SweepPlan {
                cfg: config(&c)?,
                algos: algo,
                axis,
                values,
                runs,
                n,
                seed,
            };
            let start = Instant::now();
            let rows = bench::sweep(&plan, &pool)?;
            bench::write_csv(output(out.as_deref())?, &rows)?;
            eprintln!("{} rows in {:.2?}", rows.len(), start.elapsed());
        }
        Command::Slope { input, algo } => {
            let file = File::open(&input).map_err(|source| LabError::Io {
                path: input.clone(),
                source,
            })?;
            let rows = bench::read_csv(BufReader::new(file))?;
            for g in bench::group_by_value(&rows, &algo, |r| r.delta_regret) {
                println!(
                    "N={} runs={} mean δ-regret={:.3} sd={:.3}",
                    g.value, g.runs, g.mean, g.stdev
                );
            }
            println!("slope {:.4}", bench::slope_from_rows(&rows, &algo)?);
        }
        Command::Explore {
            config: c,
            n,
            seed,
            out,
        } => {
            let cfg = config(&c)?;
            let beta = resolve_beta(&cfg, n)?;
            let env = Environment::with_seed(&cfg, seed);
            let logs = pool.install(|| explore_population(&env, n, beta, cfg.phi));
            write_jsonl_file(&out, &logs)?;
            eprintln!("explored {n} users with β={beta:.6}");
        }
        Command::Estimate {
            config: c,
            logs,
            beta,
        } => {
            let cfg = config(&c)?;
            let logs: Vec<EpisodeLog> = read_jsonl(&logs)?;
            let beta = match beta {
                Some(b) => b,
                None => resolve_beta(&cfg, logs.len())?,
            };
            let est = EstimateSet::from_logs(&logs, beta, &cfg)?;
            println!(
                "K={} p1_hat={:.6} p2_hat={:.6} eta={:.6}",
                est.k, est.p1_hat, est.p2_hat, est.eta
            );
        }
        Command::Trace {
            config: c,
            n,
            seed,
            out,
        } => {
            let cfg = config(&c)?;
            let table = pool.install(|| oracle::solve(&cfg))?;
            let env = Environment::with_seed(&cfg, seed);
            let mut records = Vec::new();
            for i in 0..n {
                let mut s = env.session(env.spawn_user(i)).with_trace();
                delta_policy_episode(&mut s, &table, cfg.horizon);
                records.extend(s.take_trace());
            }
            write_jsonl(output(out.as_deref())?, records)?;
        }
    }
    Ok(())
}
