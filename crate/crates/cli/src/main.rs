mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use hmpnn::config::ExperimentConfig;
use hmpnn::expansions::{clique_expansion, line_conversion, star_expansion};
use hmpnn::experiment::{ablate_adjacency, load_dataset, run_train, summary_line, write_run_artifacts};
use hmpnn::{Error, Hypergraph};

#[derive(Parser)]
#[command(
    name = "hmpnn",
    version,
    about = "Hypergraph message-passing networks: training, ablations and expansions"
)]
struct Cli {
    /// Experiment config (`section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding cora.content and cora.cites.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Where artifacts go; defaults to ./runs/<unix time>.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Overrides train.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Concurrent runs for the ablation sweep.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write checkpoint, metrics and summary.
    Train,
    /// Sweep adjacency-dropout rates with and without activation dropout.
    AblateAdjacency {
        /// Comma-separated rates; overrides ablation.rates.
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<f64>>,
        /// Runs per cell; overrides ablation.repeats.
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Convert a hypergraph file into a graph edge list.
    Expand {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: ExpansionKind,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print counts and histograms for a hypergraph file, or for the Cora
    /// hypergraph when only --data-dir is given.
    Inspect {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpansionKind {
    Clique,
    Star,
    Line,
}

const EXIT_INVALID: u8 = 2;
const EXIT_MISSING_DATA: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::Parse { .. } | Error::Unknown { .. } | Error::Structure(_) => EXIT_INVALID,
        Error::MissingData(_) => EXIT_MISSING_DATA,
        _ => 1,
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            key: "--config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        cfg.apply_text(&text)?;
    }
    cfg.apply_env(std::env::vars())?;
    if let Some(dir) = &cli.data_dir {
        cfg.data.dir = dir.display().to_string();
    }
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir.clone().unwrap_or_else(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Path::new("runs").join(secs.to_string())
    })
}

fn train(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    cfg.validate()?;
    let bundle = load_dataset(&cfg)?;
    let outcome = run_train(&cfg, &bundle)?;
    let dir = out_dir(cli);
    write_run_artifacts(&dir, &cfg, &outcome)?;
    println!("{}", summary_line(&cfg, outcome.test_acc()));
    log::info!("artifacts written to {}", dir.display());
    Ok(())
}

fn ablate(cli: &Cli, rates: Option<Vec<f64>>, repeats: Option<usize>) -> Result<(), Error> {
    let mut cfg = load_config(cli)?;
    if let Some(rates) = rates {
        cfg.ablation.rates = rates;
    }
    if let Some(repeats) = repeats {
        cfg.ablation.repeats = repeats;
    }
    cfg.validate()?;
    let bundle = load_dataset(&cfg)?;
    let table = ablate_adjacency(&cfg, &bundle, cli.jobs)?;
    let dir = out_dir(cli);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.txt"), cfg.to_text())?;
    std::fs::write(dir.join("ablation.csv"), table.to_csv())?;
    std::fs::write(dir.join("ablation_runs.csv"), table.runs_csv())?;
    print!("{}", table.to_csv());
    Ok(())
}

fn expand(input: &Path, kind: ExpansionKind, output: Option<&Path>) -> Result<(), Error> {
    let h = Hypergraph::read(input)?;
    let g = match kind {
        ExpansionKind::Clique => clique_expansion(&h),
        ExpansionKind::Star => star_expansion(&h),
        ExpansionKind::Line => line_conversion(&h),
    };
    match output {
        Some(path) => std::fs::write(path, g.to_edge_list())?,
        None => print!("{}", g.to_edge_list()),
    }
    Ok(())
}

fn inspect(cli: &Cli, input: Option<&Path>) -> Result<(), Error> {
    let h = match input {
        Some(path) => Hypergraph::read(path)?,
        None => {
            let mut cfg = load_config(cli)?;
            cfg.data.source = "cora".into();
            load_dataset(&cfg)?.hypergraph
        }
    };
    print!("{}", report::inspect(&h));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train => train(&cli),
        Command::AblateAdjacency { rates, repeats } => ablate(&cli, rates.clone(), *repeats),
        Command::Expand { input, kind, output } => expand(input, *kind, output.as_deref()),
        Command::Inspect { input } => inspect(&cli, input.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
