use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use isoscope::conllu::{read_conllu, write_conllu, ReadError, WordFilter};
use isoscope::eval::{self, EvalError, LasOptions};
use isoscope::experiments::{overlap_report, AnalysisOptions, ExperimentError};
use isoscope::pipeline::{
    analyze_treebank_root, run_analysis, treebank_dirs, AnalysisInput, AnalyzeConfig, TreebankDirError, TEST_GOLD_FILE,
    TEST_PRED_FILE, TRAIN_FILE,
};
use isoscope::record::{read_records_csv, write_records_csv, Feature, RecordError};
use isoscope::report::{write_atomic, RunManifest};
use isoscope::splits::{sample_controlled_splits, SplitConfig};
use isoscope::tree::{count_rooted_trees, OverlapError, TreeError};
use serde::Serialize;
use thiserror::Error;

use crate::{AnalyzeArgs, CountArgs, DugArgs, LasArgs, SplitArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("{path}: {source}")]
    Records { path: PathBuf, source: RecordError },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("none of the {0} treebanks could be analysed")]
    AllTreebanksFailed(usize),
}

impl CliError {
    /// 2 parse, 3 empty subset, 4 alignment, 5 insufficient pool, 1 other.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read(_) | CliError::Records { .. } | CliError::Tree(_) => 2,
            CliError::Eval(_) => 4,
            CliError::Experiment(e) => match e {
                ExperimentError::Tree(_) | ExperimentError::Record(_) => 2,
                ExperimentError::EmptyTest
                | ExperimentError::EmptySubset { .. }
                | ExperimentError::Overlap(OverlapError::EmptyTest) => 3,
                ExperimentError::Eval(_) => 4,
                ExperimentError::InsufficientPool { .. } => 5,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Usage(_) | CliError::AllTreebanksFailed(_) => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn filter(exclude_punct: bool) -> WordFilter {
    if exclude_punct {
        WordFilter::ExcludePunct
    } else {
        WordFilter::All
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    write_atomic(path, contents.as_bytes()).map_err(io_err(path))
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    write_file(path, &manifest.to_json())
}

fn hashed(manifest: RunManifest, path: &Path) -> Result<RunManifest, CliError> {
    manifest.input(path).map_err(io_err(path))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("plain data serializes"));
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn dug(a: DugArgs) -> Result<(), CliError> {
    let train = read_conllu(&a.train)?;
    let test = read_conllu(&a.test)?;
    let report = overlap_report(&train, &test, a.mode, a.lengths, filter(a.exclude_punct))?;
    print_json(&report);
    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new("dug")
            .argument("mode", a.mode)
            .argument("exclude_punct", a.exclude_punct);
        if let Some((lo, hi)) = a.lengths {
            m = m.argument("lengths", format!("{}:{}", lo, hi));
        }
        let m = hashed(hashed(m, &a.train)?, &a.test)?;
        write_manifest(path, &m)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LasJson {
    correct: u64,
    total: u64,
    score: f64,
}

pub fn las(a: LasArgs) -> Result<(), CliError> {
    let gold = read_conllu(&a.gold)?;
    let pred = read_conllu(&a.pred)?;
    let opts = LasOptions {
        exact_deprel: a.exact_deprel,
        filter: filter(a.exclude_punct),
    };
    let result = eval::las(&gold, &pred, opts)?;
    print_json(&LasJson {
        correct: result.correct as u64,
        total: result.total as u64,
        score: result.score(),
    });
    if let Some(path) = &a.manifest {
        let m = RunManifest::new("las")
            .argument("exact_deprel", a.exact_deprel)
            .argument("exclude_punct", a.exclude_punct);
        let m = hashed(hashed(m, &a.gold)?, &a.pred)?;
        write_manifest(path, &m)?;
    }
    Ok(())
}

pub fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let opts = AnalysisOptions {
        filter: filter(a.exclude_punct),
        exact_deprel: a.exact_deprel,
    };
    let config = AnalyzeConfig {
        tables: a.tables.iter().copied().collect(),
        figures: a.figures.iter().copied().collect(),
        seeds: a.seeds.0.clone(),
        background_size: if a.raw_size {
            Feature::TrainSize
        } else {
            Feature::LogSize
        },
    };
    let join = |ids: &std::collections::BTreeSet<u32>| ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    let mut manifest = RunManifest::new("analyze")
        .argument("tables", join(&config.tables))
        .argument("figures", join(&config.figures))
        .argument("raw_size", a.raw_size)
        .argument("exclude_punct", a.exclude_punct)
        .argument("exact_deprel", a.exact_deprel)
        .seeds(&config.seeds);

    let mut extra_files = Vec::new();
    let input = match (&a.records, &a.from_treebanks) {
        (Some(path), _) => {
            let file = fs::File::open(path).map_err(|e| {
                CliError::Read(ReadError::Io {
                    path: path.clone(),
                    source: e,
                })
            })?;
            let records = read_records_csv(file).map_err(|source| CliError::Records {
                path: path.clone(),
                source,
            })?;
            manifest = hashed(manifest, path)?;
            AnalysisInput { records, bins: None }
        }
        (None, Some(root)) => {
            let dirs = treebank_dirs(root).map_err(|e| {
                CliError::Read(ReadError::Io {
                    path: root.clone(),
                    source: e,
                })
            })?;
            if dirs.is_empty() {
                return Err(CliError::Usage(format!("{}: no treebank directories", root.display())));
            }
            let (ok, failed) = analyze_treebank_root(&dirs, opts);
            for (dir, e) in &failed {
                eprintln!("warning: skipping {}: {}", dir.display(), e);
            }
            if ok.is_empty() {
                return Err(match failed.into_iter().next() {
                    Some((_, e)) if dirs.len() == 1 => match e {
                        TreebankDirError::Read(e) => CliError::Read(e),
                        TreebankDirError::Experiment(e) => CliError::Experiment(e),
                    },
                    _ => CliError::AllTreebanksFailed(dirs.len()),
                });
            }
            for analysis in &ok {
                let dir = root.join(&analysis.record.name);
                for file in [TRAIN_FILE, TEST_GOLD_FILE, TEST_PRED_FILE] {
                    manifest = hashed(manifest, &dir.join(file))?;
                }
            }
            manifest = manifest.argument("from_treebanks", root.display());
            let input = AnalysisInput::from_treebanks(ok);
            extra_files.push(("records.csv".to_owned(), write_records_csv(&input.records)));
            input
        }
        (None, None) => unreachable!("clap requires one input"),
    };

    let output = run_analysis(&input, &config)?;
    for w in &output.warnings {
        eprintln!("warning: {}", w);
    }
    create_dir(&a.out)?;
    for (name, contents) in extra_files.iter().chain(&output.files) {
        write_file(&a.out.join(name), contents)?;
    }
    write_manifest(&a.out.join("manifest.json"), &manifest)?;
    Ok(())
}

#[derive(Serialize)]
struct SplitSummary {
    train: usize,
    tests: Vec<usize>,
    discarded: usize,
}

pub fn sample_splits(a: SplitArgs) -> Result<(), CliError> {
    let pool = read_conllu(&a.pool)?;
    let config = SplitConfig {
        length: a.length,
        train_size: a.train,
        test_size: a.test,
        min_pool: a.min_pool,
    };
    let split = sample_controlled_splits(&pool, config, a.seed)?;
    create_dir(&a.out)?;
    write_file(&a.out.join("train.conllu"), &write_conllu(&split.train))?;
    for (k, test) in split.tests.iter().enumerate() {
        write_file(&a.out.join(format!("test_{}.conllu", k)), &write_conllu(test))?;
    }
    let manifest = RunManifest::new("sample-splits")
        .argument("length", a.length)
        .argument("train", a.train)
        .argument("test", a.test)
        .argument("min_pool", a.min_pool)
        .seeds(&[a.seed]);
    write_manifest(&a.out.join("manifest.json"), &hashed(manifest, &a.pool)?)?;
    print_json(&SplitSummary {
        train: split.train.len(),
        tests: split.tests.iter().map(|t| t.len()).collect(),
        discarded: split.discarded.len(),
    });
    Ok(())
}

pub fn count_trees(a: CountArgs) -> Result<(), CliError> {
    if a.n < 1 {
        return Err(CliError::Usage("n must be at least 1".to_owned()));
    }
    println!("{}", count_rooted_trees(a.n));
    if let Some(path) = &a.manifest {
        write_manifest(path, &RunManifest::new("count-trees").argument("n", a.n))?;
    }
    Ok(())
}
