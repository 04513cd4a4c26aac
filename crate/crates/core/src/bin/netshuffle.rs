use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};
use sha2::{Digest, Sha256};

use netshuffle::experiments::{
    load_edge_list, prepare_multilayer, run_experiment, save_edge_list, EdgeListOptions, ExperimentConfig,
    LabeledGraph, Layer,
};
use netshuffle::{Error, Result};

// glibc malloc fragments badly under the replicate loops.
#[global_allocator]
static ALLOC: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "netshuffle", version, about = "Power of two-sample network tests under vertex shuffling")]
struct Cli {
    /// Worker threads for replicate-level parallelism (output does not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only report errors on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Direct Monte Carlo power over a shuffle grid.
    Simulate(RunArgs),
    /// Parametric bootstrap level and power for three observed graphs.
    Bootstrap(RunArgs),
    /// Two-level Monte Carlo for RDPG alternatives.
    TwoTier(RunArgs),
    /// Match-then-test power.
    Match(RunArgs),
    /// Align edge-list layers onto their common vertices.
    Ingest(IngestArgs),
    /// Show where the real datasets live and verify downloaded files.
    Fetch(FetchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Master seed; defaults to the seed stored in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct IngestArgs {
    /// Layers as `NAME=PATH` or `PATH` (named by file stem).
    #[arg(required = true, num_args = 2..)]
    layers: Vec<String>,
    /// Directory receiving `vertices.txt` and one `NAME.edges` per layer.
    #[arg(long)]
    out: PathBuf,
    /// Keep only pairs listed in both directions.
    #[arg(long)]
    no_symmetrize: bool,
    /// Treat self-loops as errors instead of dropping them.
    #[arg(long)]
    keep_self_loops: bool,
}

#[derive(Args)]
struct FetchArgs {
    /// File to checksum.
    #[arg(long)]
    verify: Option<PathBuf>,
    /// Expected SHA-256 (hex) of `--verify`.
    #[arg(long, requires = "verify")]
    expect: Option<String>,
}

const DATASETS: &[(&str, &str)] = &[
    (
        "BNU1 test/retest connectomes (processed)",
        "http://www.cis.jhu.edu/~parky/Microsoft/JHU-MSR/ZMx2/BNU1/DS01216-xyz.zip",
    ),
    (
        "Multilayer social network (YouTube, Twitter, FriendFeed; Magnani and Rossi, 2011)",
        "no download URL is documented; obtain it from the authors' multilayer network collection",
    ),
    ("Reference code for the original experiments", "https://www.math.umd.edu/~vlyzinsk/Shuffled_testing/"),
];

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).parse_default_env().target(env_logger::Target::Stderr).init();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            error!("could not size the worker pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let outcome = match cli.command {
        Command::Simulate(a) => run(a, "simulate"),
        Command::Bootstrap(a) => run(a, "bootstrap"),
        Command::TwoTier(a) => run(a, "two-tier"),
        Command::Match(a) => run(a, "match"),
        Command::Ingest(a) => ingest(a),
        Command::Fetch(a) => fetch(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(args: RunArgs, kind: &str) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment.kind() != kind {
        return Err(Error::Config {
            path: "experiment.kind".into(),
            message: format!("config describes a {} experiment, not {kind}", cfg.experiment.kind()),
        });
    }
    let seed = args.seed.unwrap_or(cfg.seed);
    let table = run_experiment(&cfg, seed)?;
    let mut out = output(args.out.as_deref())?;
    match args.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => table.write_json(&mut out)?,
    }
    out.flush()?;
    if let Some(p) = &args.out {
        info!("wrote {} rows to {}", table.rows.len(), p.display());
    }
    Ok(())
}

fn ingest(args: IngestArgs) -> Result<()> {
    let options = EdgeListOptions { symmetrize: !args.no_symmetrize, drop_self_loops: !args.keep_self_loops };
    let layers = args
        .layers
        .iter()
        .map(|spec| {
            let (name, path) = match spec.split_once('=') {
                Some((n, p)) => (n.to_owned(), PathBuf::from(p)),
                None => {
                    let p = PathBuf::from(spec);
                    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    (stem, p)
                }
            };
            info!("reading layer {name} from {}", path.display());
            Ok(Layer { name, graph: load_edge_list(&path, &options)?, source: Some(path) })
        })
        .collect::<Result<Vec<_>>>()?;
    let ds = prepare_multilayer(&layers)?;
    std::fs::create_dir_all(&args.out)?;
    let mut vertices = std::io::BufWriter::new(std::fs::File::create(args.out.join("vertices.txt"))?);
    for l in &ds.labels {
        writeln!(vertices, "{l}")?;
    }
    vertices.flush()?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{} common vertices", ds.n())?;
    for (name, g) in &ds.layers {
        let labeled = LabeledGraph { graph: g.clone(), labels: ds.labels.clone() };
        save_edge_list(args.out.join(format!("{name}.edges")), &labeled)?;
        writeln!(stdout, "{name}: {} edges", g.edge_count())?;
    }
    Ok(())
}

fn fetch(args: FetchArgs) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    let Some(path) = args.verify else {
        for (name, url) in DATASETS {
            writeln!(stdout, "{name}\n  {url}")?;
        }
        writeln!(stdout, "Nothing is downloaded; verify a file with --verify PATH [--expect SHA256].")?;
        return Ok(());
    };
    let mut hasher = Sha256::new();
    std::io::copy(&mut std::fs::File::open(&path)?, &mut hasher)?;
    let digest: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    writeln!(stdout, "{digest}  {}", path.display())?;
    match args.expect {
        Some(expected) if !expected.trim().eq_ignore_ascii_case(&digest) => {
            Err(Error::InvalidInput(format!("checksum mismatch for {}: expected {expected}", path.display())))
        }
        Some(_) => {
            info!("checksum matches");
            Ok(())
        }
        None => Ok(()),
    }
}
