use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use fairrerank::corpus::{dataset_stats, kcore_filter, load_interactions, InputFormat};
use fairrerank::runner::{
    load_config, ExperimentConfig, OutputFormat, RunOutput, Runner, SweepAxis, SweepSpec,
    DEFAULT_LAMBDA_GRID,
};
use fairrerank::synth::{generate, to_tsv, SynthConfig};

#[derive(Parser)]
#[command(name = "fairrerank", version, about = "Two-sided fair re-ranking of top-K recommendations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the split seed of every config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory of every config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of the table printed to stdout.
    #[arg(long, global = true, default_value = "md")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep the fairness weights of a config (run as mode CP).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "lambda2")]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// The weight held fixed on a one-axis sweep.
        #[arg(long, default_value_t = 0.05)]
        fixed: f64,
    },
    /// Tabulate several configs (one must be mode N) against each other.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        configs: Vec<PathBuf>,
    },
    /// Choose fairness weights on the default grid for the config's mode.
    Select {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Share of users and items with at least each threshold of interactions.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "10,20,50,100")]
        thresholds: Vec<usize>,
        #[arg(long, default_value = "tsv")]
        dataset_format: InputFormat,
        /// Apply k-core filtering first.
        #[arg(long)]
        kcore: Option<usize>,
    },
    /// Write a synthetic popularity-skewed interaction file.
    Synth {
        #[arg(long, default_value_t = 1000)]
        users: usize,
        #[arg(long, default_value_t = 800)]
        items: usize,
        #[arg(long, default_value_t = 40.0)]
        mean_interactions: f64,
        #[arg(long, default_value_t = 0)]
        synth_seed: u64,
        /// Use the MovieLens-100k-sized preset instead of the size flags.
        #[arg(long)]
        movielens_scale: bool,
        #[arg(long)]
        output: PathBuf,
    },
}

impl Cli {
    fn config(&self, path: &Path) -> Result<ExperimentConfig> {
        let mut config = load_config(path).with_context(|| format!("loading {}", path.display()))?;
        if let Some(seed) = self.seed {
            config.split_seed = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = Some(out.clone());
        }
        Ok(config)
    }
}

fn print_report(out: &RunOutput, format: OutputFormat) {
    let r = &out.report;
    match format {
        OutputFormat::Json => print!("{}", r.to_json()),
        OutputFormat::Csv => println!(
            "{}\n{}",
            fairrerank::metrics::FairnessReport::csv_header(),
            r.csv_row()
        ),
        OutputFormat::Md => {
            let cols = fairrerank::metrics::FairnessReport::COLUMNS;
            println!("| Mode | {} |", cols.join(" | "));
            println!("|---|{}", "---|".repeat(cols.len()));
            println!("{}", r.markdown_row(&out.manifest.config.mode.to_string()));
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let runner = Runner::new();
    match &cli.command {
        Command::Run { config } => {
            let config = cli.config(config)?;
            let out = runner.run_experiment(&config)?;
            print_report(&out, cli.format);
        }
        Command::Sweep {
            config,
            axis,
            values,
            fixed,
        } => {
            let config = cli.config(config)?;
            let spec = SweepSpec::new(*axis, values.clone(), *fixed)?;
            let out = runner.run_sweep(&config, &spec)?;
            match cli.format {
                OutputFormat::Csv => print!("{}", out.csv),
                OutputFormat::Json => {
                    let reports: Vec<_> = out.points.iter().map(|(_, r)| r).collect();
                    println!("{}", serde_json::to_string_pretty(&reports)?);
                }
                OutputFormat::Md => {
                    println!("| lambda1 | lambda2 | All | Short. | Long. | DPF | DCF | mCPF |");
                    println!("|---|---|---|---|---|---|---|---|");
                    for ((l1, l2), r) in &out.points {
                        println!(
                            "| {l1} | {l2} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
                            r.ndcg_all, r.exposure_short, r.exposure_long, r.dpf, r.dcf_reported, r.mcpf
                        );
                    }
                }
            }
        }
        Command::Compare { configs } => {
            if configs.len() < 2 {
                bail!("compare needs at least two configs");
            }
            let mut loaded = Vec::with_capacity(configs.len());
            for path in configs {
                let mut c = cli.config(path)?;
                if cli.out.is_some() {
                    c.output_dir = c.output_dir.map(|d| d.join(c.mode.to_string()));
                }
                loaded.push(c);
            }
            let table = runner.compare_modes(&loaded)?;
            print!("{}", table.render(cli.format));
        }
        Command::Select { config, grid } => {
            let config = cli.config(config)?;
            let grid = grid.clone().unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec());
            let sel = runner.select_lambdas(&config, &grid)?;
            match cli.format {
                OutputFormat::Json => println!(
                    "{}",
                    serde_json::json!({
                        "lambda1": sel.lambda1,
                        "lambda2": sel.lambda2,
                        "score": sel.score,
                        "report": sel.report,
                    })
                ),
                _ => println!(
                    "lambda1={} lambda2={} nDCG-mCPF={:.4}",
                    sel.lambda1, sel.lambda2, sel.score
                ),
            }
        }
        Command::Stats {
            dataset,
            thresholds,
            dataset_format,
            kcore,
        } => {
            let mut log = load_interactions(dataset, *dataset_format)?;
            if let Some(k) = kcore {
                log = kcore_filter(&log, *k)?;
            }
            let table = dataset_stats(&log, thresholds)?;
            match cli.format {
                OutputFormat::Csv => print!("{}", table.to_csv()),
                OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&table.rows)?),
                OutputFormat::Md => print!("{}", table.render(&dataset.display().to_string())),
            }
        }
        Command::Synth {
            users,
            items,
            mean_interactions,
            synth_seed,
            movielens_scale,
            output,
        } => {
            let cfg = if *movielens_scale {
                SynthConfig::movielens_scale(*synth_seed)
            } else {
                SynthConfig {
                    users: *users,
                    items: *items,
                    mean_interactions: *mean_interactions,
                    seed: *synth_seed,
                    ..SynthConfig::default()
                }
            };
            let log = generate(&cfg);
            fs::write(output, to_tsv(&log)).with_context(|| format!("writing {}", output.display()))?;
            eprintln!("{} users, {} items, {} interactions", log.n(), log.m(), log.len());
        }
    }
    Ok(())
}
