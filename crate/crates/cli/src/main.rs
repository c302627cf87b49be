mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isoscope::pipeline::{FIGURE_IDS, TABLE_IDS};
use isoscope::tree::IsoMode;

use commands::CliError;

/// Tree-isomorphism overlap and covariate analysis for dependency treebanks.
#[derive(Debug, Parser)]
#[command(name = "isoscope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Overlap (DUG, or UUG with --mode undirected) of a test file against a training file.
    Dug(DugArgs),
    /// Labelled attachment score of a prediction file against gold.
    Las(LasArgs),
    /// Correlation, cross-validation and background tables from records or treebanks.
    Analyze(AnalyzeArgs),
    /// Fixed-length training and test sets sampled from a pool.
    SampleSplits(SplitArgs),
    /// Number of unlabelled rooted trees on N nodes.
    CountTrees(CountArgs),
}

#[derive(Debug, Args)]
struct DugArgs {
    train: PathBuf,
    test: PathBuf,
    #[arg(long, default_value = "directed")]
    mode: IsoMode,
    /// Keep only sentences with length in LO..=HI on both sides.
    #[arg(long, value_name = "LO:HI", value_parser = parse_lengths)]
    lengths: Option<(usize, usize)>,
    #[arg(long)]
    exclude_punct: bool,
    /// Also write a run manifest to this path.
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LasArgs {
    gold: PathBuf,
    pred: PathBuf,
    /// Compare full relation labels instead of stripping subtypes.
    #[arg(long)]
    exact_deprel: bool,
    #[arg(long)]
    exclude_punct: bool,
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Records CSV (name,train_size,mean_test_len,dug,las[,uug][,focused_dug]).
    #[arg(required_unless_present = "from_treebanks", conflicts_with = "from_treebanks")]
    records: Option<PathBuf>,
    /// Directory of <name>/{train,test-gold,test-pred}.conllu triples.
    #[arg(long, value_name = "DIR")]
    from_treebanks: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,7,8", value_parser = parse_table)]
    tables: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3", value_parser = parse_figure)]
    figures: Vec<u32>,
    /// Inclusive range `A..B` or comma-separated list.
    #[arg(long, default_value = "0..9", value_parser = parse_seeds)]
    seeds: Seeds,
    /// Regress the size background on raw training size instead of its log.
    #[arg(long)]
    raw_size: bool,
    #[arg(long)]
    exclude_punct: bool,
    #[arg(long)]
    exact_deprel: bool,
}

#[derive(Debug, Args)]
struct SplitArgs {
    pool: PathBuf,
    #[arg(long, default_value_t = 12)]
    length: usize,
    #[arg(long, default_value_t = 1000)]
    train: usize,
    #[arg(long, default_value_t = 200)]
    test: usize,
    /// Minimum number of pool sentences of the requested length.
    #[arg(long, default_value_t = 1200)]
    min_pool: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CountArgs {
    n: usize,
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

fn parse_lengths(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("{}: {}", lo, e))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("{}: {}", hi, e))?;
    if lo > hi {
        return Err(format!("empty range {}:{}", lo, hi));
    }
    Ok((lo, hi))
}

fn parse_id(s: &str, known: &[u32], what: &str) -> Result<u32, String> {
    let id: u32 = s.trim().parse().map_err(|_| format!("not a {} number: {}", what, s))?;
    if known.contains(&id) {
        Ok(id)
    } else {
        Err(format!("no {} {}; available: {:?}", what, id, known))
    }
}

fn parse_table(s: &str) -> Result<u32, String> {
    parse_id(s, &TABLE_IDS, "table")
}

fn parse_figure(s: &str) -> Result<u32, String> {
    parse_id(s, &FIGURE_IDS, "figure")
}

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad seed {:?}", t));
    let seeds = match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("empty seed range {}", s));
            }
            (a..=b).collect()
        }
        None => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
    };
    Ok(Seeds(seeds))
}

fn configure_threads() {
    let Ok(value) = std::env::var("ISOSCOPE_THREADS") else {
        return;
    };
    match value.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: ISOSCOPE_THREADS ignored: {}", e);
            }
        }
        _ => eprintln!(
            "warning: ISOSCOPE_THREADS={:?} is not a positive integer; ignored",
            value
        ),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dug(a) => commands::dug(a),
        Command::Las(a) => commands::las(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::SampleSplits(a) => commands::sample_splits(a),
        Command::CountTrees(a) => commands::count_trees(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code())
        }
    }
}
