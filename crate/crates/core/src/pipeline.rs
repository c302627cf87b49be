//! End-to-end analysis: records (and optionally length bins) in, table and
//! plot-data CSV files out.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::conllu::{read_conllu, ReadError};
use crate::experiments::{
    self, background_subtract, cv_table, dug_correlation_table, length_binned_analysis, partial_corr_table,
    standard_feature_sets, summarize_treebank, AnalysisOptions, BinRecord, CorrelationRow, CvMode, ExperimentError,
    BIN_LENGTHS,
};
use crate::record::{Feature, TreebankRecord};
use crate::report::{fmt_sig, CsvTable};

pub const TABLE_IDS: [u32; 7] = [1, 2, 3, 4, 5, 7, 8];
pub const FIGURE_IDS: [u32; 7] = [1, 2, 3, 5, 6, 7, 8];
/// Bins shown in the short binned figure.
pub const EXAMPLE_BIN_LENGTHS: [usize; 3] = [5, 12, 21];
/// Significance level used for the `significant` column.
pub const ALPHA: f64 = 0.05;

/// File names of one treebank's inputs under `--from-treebanks`.
pub const TRAIN_FILE: &str = "train.conllu";
pub const TEST_GOLD_FILE: &str = "test-gold.conllu";
pub const TEST_PRED_FILE: &str = "test-pred.conllu";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyzeConfig {
    pub tables: BTreeSet<u32>,
    pub figures: BTreeSet<u32>,
    pub seeds: Vec<u64>,
    /// Regressor of the size background; log size unless the raw variant
    /// is requested.
    pub background_size: Feature,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            tables: TABLE_IDS.into_iter().collect(),
            figures: [1, 2, 3].into_iter().collect(),
            seeds: experiments::DEFAULT_SEEDS.to_vec(),
            background_size: Feature::LogSize,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AnalysisInput {
    pub records: Vec<TreebankRecord>,
    /// Length bins of every treebank; only available when records were
    /// computed from treebanks.
    pub bins: Option<Vec<BinRecord>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnalysisOutput {
    /// `(file name, CSV contents)` in a fixed order.
    pub files: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

fn significance(p: f64) -> &'static str {
    if p < ALPHA {
        "true"
    } else {
        "false"
    }
}

fn correlation_csv(rows: &[CorrelationRow]) -> CsvTable {
    let mut t = CsvTable::new(&["x", "y", "controls", "rho", "p_value", "n", "df", "significant"]);
    for r in rows {
        let controls = if r.controls.is_empty() {
            "none".to_owned()
        } else {
            r.controls.join("+")
        };
        t.push(vec![
            r.x.clone(),
            r.y.clone(),
            controls,
            fmt_sig(r.result.rho),
            fmt_sig(r.result.p_value),
            r.result.n.to_string(),
            r.result.df.to_string(),
            significance(r.result.p_value).to_owned(),
        ]);
    }
    t
}

fn feature_label(set: &[Feature]) -> String {
    set.iter().map(|f| f.name()).collect::<Vec<_>>().join("+")
}

fn has_feature(records: &[TreebankRecord], f: Feature) -> bool {
    records.iter().all(|r| r.get(f).is_some())
}

fn scatter(t: &mut CsvTable, records: &[TreebankRecord], x: Feature, y: Feature) {
    let mut sorted: Vec<_> = records.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let series = format!("{}~{}", y, x);
    for r in sorted {
        if let (Some(xv), Some(yv)) = (r.get(x), r.get(y)) {
            t.push(vec![fmt_sig(xv), fmt_sig(yv), series.clone(), r.name.clone()]);
        }
    }
}

const PLOT_HEADER: [&str; 4] = ["x", "y", "series", "label"];

fn bins_plot(bins: &[BinRecord], lengths: &[usize]) -> CsvTable {
    let mut t = CsvTable::new(&PLOT_HEADER);
    for &l in lengths {
        let mut rows: Vec<_> = bins.iter().filter(|b| b.length == l).collect();
        rows.sort_by(|a, b| a.name.cmp(&b.name));
        for b in rows {
            if let (Some(d), Some(las)) = (b.dug, b.las) {
                t.push(vec![
                    fmt_sig(d),
                    fmt_sig(las.score()),
                    format!("len{}", l),
                    b.name.clone(),
                ]);
            }
        }
    }
    t
}

fn table(input: &AnalysisInput, config: &AnalyzeConfig, id: u32) -> Result<Result<CsvTable, String>, ExperimentError> {
    let records = &input.records;
    let multiseed = CvMode::MultiSeed(config.seeds.clone());
    let focused_missing = || Err("records have no focused_dug values".to_owned());
    Ok(Ok(match id {
        1 => {
            let sets = standard_feature_sets(Feature::TrainSize, Feature::Dug);
            let original = cv_table(records, &sets, &CvMode::Original)?;
            let seeded = cv_table(records, &sets, &multiseed)?;
            let mut t = CsvTable::new(&["features", "original", "multiseed"]);
            for (o, s) in original.iter().zip(&seeded) {
                t.push(vec![feature_label(&o.features), fmt_sig(o.score), fmt_sig(s.score)]);
            }
            t
        }
        2 => correlation_csv(&dug_correlation_table(records, Feature::Dug)?),
        3 => {
            let rows = cv_table(
                records,
                &standard_feature_sets(Feature::LogSize, Feature::Dug),
                &multiseed,
            )?;
            let mut t = CsvTable::new(&["features", "multiseed"]);
            for r in rows {
                t.push(vec![feature_label(&r.features), fmt_sig(r.score)]);
            }
            t
        }
        4 => {
            if !has_feature(records, Feature::FocusedDug) {
                return Ok(focused_missing());
            }
            let corr = experiments::correlation_table(
                records,
                &[
                    (Feature::FocusedDug, Feature::Las),
                    (Feature::FocusedDug, Feature::TrainSize),
                    (Feature::FocusedDug, Feature::MeanTestLen),
                ],
            )?;
            let cv = cv_table(
                records,
                &standard_feature_sets(Feature::LogSize, Feature::FocusedDug),
                &multiseed,
            )?;
            let mut t = CsvTable::new(&["block", "row", "value", "p_value"]);
            for r in corr {
                t.push(vec![
                    "correlation".into(),
                    format!("{}~{}", r.x, r.y),
                    fmt_sig(r.result.rho),
                    fmt_sig(r.result.p_value),
                ]);
            }
            for r in cv {
                t.push(vec![
                    "cv".into(),
                    feature_label(&r.features),
                    fmt_sig(r.score),
                    String::new(),
                ]);
            }
            t
        }
        5 => correlation_csv(&partial_corr_table(records, Feature::Dug, Feature::Las)?),
        7 => {
            if !has_feature(records, Feature::FocusedDug) {
                return Ok(focused_missing());
            }
            correlation_csv(&partial_corr_table(records, Feature::FocusedDug, Feature::Las)?)
        }
        8 => correlation_csv(&background_subtract(records, config.background_size)?.report),
        other => return Ok(Err(format!("unknown table {}", other))),
    }))
}

fn figure(input: &AnalysisInput, config: &AnalyzeConfig, id: u32) -> Result<Result<CsvTable, String>, ExperimentError> {
    let records = &input.records;
    let mut t = CsvTable::new(&PLOT_HEADER);
    match id {
        1 => scatter(&mut t, records, Feature::Dug, Feature::Las),
        2 | 8 => {
            let Some(bins) = &input.bins else {
                return Ok(Err("length bins need --from-treebanks input".to_owned()));
            };
            let lengths: Vec<usize> = if id == 2 {
                EXAMPLE_BIN_LENGTHS.to_vec()
            } else {
                (BIN_LENGTHS.0..=BIN_LENGTHS.1).collect()
            };
            t = bins_plot(bins, &lengths);
        }
        3 => {
            let bg = background_subtract(records, config.background_size)?;
            let mut sorted: Vec<_> = records.iter().collect();
            sorted.sort_by(|a, b| a.name.cmp(&b.name));
            let size_name = config.background_size.name();
            for (i, r) in sorted.iter().enumerate() {
                let size = r.get(config.background_size).unwrap_or(f64::NAN);
                let rows = [
                    (size, r.las, format!("las~{}", size_name)),
                    (
                        size,
                        bg.size_fit.predict_row(&[size]),
                        format!("bcg_size~{}", size_name),
                    ),
                    (
                        r.mean_test_len,
                        bg.normalized[i],
                        "las/bcg_size~mean_test_len".to_owned(),
                    ),
                    (
                        r.mean_test_len,
                        bg.length_fit.predict_row(&[r.mean_test_len]),
                        "bcg_ltest~mean_test_len".to_owned(),
                    ),
                    (r.dug, bg.doubly_normalized[i], "las/bcg_size_ltest~dug".to_owned()),
                ];
                for (x, y, series) in rows {
                    t.push(vec![fmt_sig(x), fmt_sig(y), series, r.name.clone()]);
                }
            }
        }
        5 => scatter(&mut t, records, Feature::TrainSize, Feature::Las),
        6 => {
            for (x, y) in [
                (Feature::TrainSize, Feature::Las),
                (Feature::Dug, Feature::Las),
                (Feature::MeanTestLen, Feature::Las),
                (Feature::TrainSize, Feature::Dug),
                (Feature::MeanTestLen, Feature::Dug),
            ] {
                scatter(&mut t, records, x, y);
            }
        }
        7 => {
            if !has_feature(records, Feature::FocusedDug) {
                return Ok(Err("records have no focused_dug values".to_owned()));
            }
            for x in [Feature::Las, Feature::TrainSize, Feature::MeanTestLen] {
                scatter(&mut t, records, Feature::FocusedDug, x);
            }
        }
        other => return Ok(Err(format!("unknown figure {}", other))),
    }
    Ok(Ok(t))
}

/// Runs every requested table and figure. Outputs whose inputs are missing
/// (focused DUG, length bins) are skipped with a warning; numeric failures
/// are errors.
pub fn run_analysis(input: &AnalysisInput, config: &AnalyzeConfig) -> Result<AnalysisOutput, ExperimentError> {
    let mut out = AnalysisOutput::default();
    for &id in &config.tables {
        match table(input, config, id)? {
            Ok(t) => out.files.push((format!("table{}.csv", id), t.to_csv())),
            Err(why) => out.warnings.push(format!("table {} skipped: {}", id, why)),
        }
    }
    for &id in &config.figures {
        match figure(input, config, id)? {
            Ok(t) => out.files.push((format!("figure{}.csv", id), t.to_csv())),
            Err(why) => out.warnings.push(format!("figure {} skipped: {}", id, why)),
        }
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum TreebankDirError {
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

/// Record and bins of one treebank directory.
#[derive(Clone, Debug)]
pub struct TreebankAnalysis {
    pub record: TreebankRecord,
    pub bins: Vec<BinRecord>,
}

/// Reads `<dir>/{train,test-gold,test-pred}.conllu` and summarizes them.
pub fn analyze_treebank_dir(dir: &Path, opts: AnalysisOptions) -> Result<TreebankAnalysis, TreebankDirError> {
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let train = read_conllu(dir.join(TRAIN_FILE))?;
    let gold = read_conllu(dir.join(TEST_GOLD_FILE))?;
    let pred = read_conllu(dir.join(TEST_PRED_FILE))?;
    let record = summarize_treebank(&name, &train, &gold, &pred, opts)?;
    let bins = length_binned_analysis(&name, &train, &gold, &pred, BIN_LENGTHS.0, BIN_LENGTHS.1, opts)?;
    Ok(TreebankAnalysis { record, bins })
}

/// Sub-directories of `root`, sorted by name.
pub fn treebank_dirs(root: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Summarizes every treebank directory in parallel. Results come back in
/// directory-name order whatever the thread count; failures are returned
/// alongside the successes.
pub fn analyze_treebank_root(
    dirs: &[PathBuf],
    opts: AnalysisOptions,
) -> (Vec<TreebankAnalysis>, Vec<(PathBuf, TreebankDirError)>) {
    let results: Vec<_> = dirs
        .par_iter()
        .map(|d| (d.clone(), analyze_treebank_dir(d, opts)))
        .collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (dir, r) in results {
        match r {
            Ok(a) => ok.push(a),
            Err(e) => failed.push((dir, e)),
        }
    }
    (ok, failed)
}

impl AnalysisInput {
    pub fn from_treebanks(analyses: Vec<TreebankAnalysis>) -> Self {
        let mut records = Vec::with_capacity(analyses.len());
        let mut bins = Vec::new();
        for a in analyses {
            records.push(a.record);
            bins.extend(a.bins);
        }
        AnalysisInput {
            records,
            bins: Some(bins),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn records(n: usize) -> Vec<TreebankRecord> {
        let mut rng = SeededRng::new(17);
        (0..n)
            .map(|i| {
                let size = 50 + rng.below(30_000);
                let len = 6.0 + 25.0 * rng.next_f64();
                let dug = (0.9 - len / 40.0 + 0.1 * rng.next_f64()).clamp(0.0, 1.0);
                let las = (0.3 + 0.05 * (size as f64).ln() + 0.02 * rng.next_gaussian()).clamp(0.0, 1.0);
                TreebankRecord::new(format!("tb{:02}", i), size, len, dug, las).unwrap()
            })
            .collect()
    }

    #[test]
    fn csv_input_produces_seven_files() {
        let input = AnalysisInput {
            records: records(30),
            bins: None,
        };
        let out = run_analysis(&input, &AnalyzeConfig::default()).unwrap();
        let names: Vec<&str> = out.files.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(
            names,
            [
                "table1.csv",
                "table2.csv",
                "table3.csv",
                "table5.csv",
                "table8.csv",
                "figure1.csv",
                "figure3.csv"
            ]
        );
        assert_eq!(out.warnings.len(), 3, "{:?}", out.warnings);
        assert_eq!(out, run_analysis(&input, &AnalyzeConfig::default()).unwrap());
    }

    #[test]
    fn table_headers() {
        let input = AnalysisInput {
            records: records(12),
            bins: None,
        };
        let config = AnalyzeConfig {
            tables: [1, 2].into_iter().collect(),
            figures: BTreeSet::new(),
            ..Default::default()
        };
        let out = run_analysis(&input, &config).unwrap();
        assert!(out.files[0].1.starts_with("features,original,multiseed\nsize,"));
        assert!(out.files[1]
            .1
            .starts_with("x,y,controls,rho,p_value,n,df,significant\nsize,las,none,"));
        assert_eq!(out.files[1].1.lines().count(), 6);
    }

    #[test]
    fn unknown_ids_are_warnings() {
        let input = AnalysisInput {
            records: records(12),
            bins: None,
        };
        let config = AnalyzeConfig {
            tables: [6].into_iter().collect(),
            figures: [4].into_iter().collect(),
            ..Default::default()
        };
        let out = run_analysis(&input, &config).unwrap();
        assert!(out.files.is_empty());
        assert_eq!(out.warnings.len(), 2);
    }
}
