//! Covariate analyses over collections of treebank records.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::conllu::{mean_length, EmptyTreebank, Treebank, WordFilter};
use crate::eval::{las, las_by_length, EvalError, LasOptions, LasResult};
use crate::record::{Feature, RecordError, TreebankRecord};
use crate::stats::{self, CorrelationResult, RegressionFit, StatsError};
use crate::tree::{self, treebank_trees, DepTree, IsoClassSet, IsoMode, OverlapError, TreeError};

/// Sentence-length band of the focused DUG variant.
pub const FOCUSED_LENGTHS: (usize, usize) = (9, 14);
/// Default length bins.
pub const BIN_LENGTHS: (usize, usize) = (3, 30);
/// Folds used by every cross-validated table.
pub const CV_FOLDS: usize = 3;
/// Seeds of the multi-seed cross-validation mode.
pub const DEFAULT_SEEDS: [u64; 10] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Overlap(#[from] OverlapError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("test treebank is empty")]
    EmptyTest,
    #[error("no test sentences with length in {lo}..={hi}")]
    EmptySubset { lo: usize, hi: usize },
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("record {name:?} has no {feature} value")]
    MissingFeature { name: String, feature: Feature },
    #[error("{context}: {source}")]
    Stats {
        context: String,
        #[source]
        source: StatsError,
    },
    #[error("record {name:?}: {stage} background prediction {value} is not positive")]
    NonPositivePrediction {
        name: String,
        stage: &'static str,
        value: f64,
    },
    #[error("pool has {available} sentences of length {length}, need at least {needed}")]
    InsufficientPool {
        available: usize,
        needed: usize,
        length: usize,
    },
}

impl From<EmptyTreebank> for ExperimentError {
    fn from(_: EmptyTreebank) -> Self {
        ExperimentError::EmptyTest
    }
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

fn stats_ctx<T>(context: impl Into<String>, r: stats::Result<T>) -> Result<T> {
    r.map_err(|source| ExperimentError::Stats {
        context: context.into(),
        source,
    })
}

/// Knobs shared by the treebank-level pipelines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub filter: WordFilter,
    pub exact_deprel: bool,
}

impl AnalysisOptions {
    fn las_options(self) -> LasOptions {
        LasOptions {
            exact_deprel: self.exact_deprel,
            filter: self.filter,
        }
    }
}

fn lengths_of(tb: &Treebank, filter: WordFilter) -> Vec<usize> {
    tb.sentences.iter().map(|s| s.filtered_len(filter)).collect()
}

/// Overlap of a test treebank against a training treebank.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapReport {
    /// DUG, or UUG in undirected mode.
    pub dug: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Distinct training shapes.
    pub n_train_shapes: usize,
}

/// Overlap of `test` against `train`. With `lengths`, only sentences
/// whose length is in `lo..=hi` are kept on both sides.
pub fn overlap_report(
    train: &Treebank,
    test: &Treebank,
    mode: IsoMode,
    lengths: Option<(usize, usize)>,
    filter: WordFilter,
) -> Result<OverlapReport> {
    let keep = |tb: &Treebank| -> Result<Vec<DepTree>> {
        let lens = lengths_of(tb, filter);
        Ok(treebank_trees(tb, filter)?
            .into_iter()
            .zip(lens)
            .filter(|(_, l)| lengths.is_none_or(|(lo, hi)| (lo..=hi).contains(l)))
            .map(|(t, _)| t)
            .collect())
    };
    let test_trees = keep(test)?;
    if test_trees.is_empty() {
        return Err(match lengths {
            Some((lo, hi)) => ExperimentError::EmptySubset { lo, hi },
            None => ExperimentError::EmptyTest,
        });
    }
    let train_trees = keep(train)?;
    let train_set = IsoClassSet::from_trees(&train_trees, mode);
    Ok(OverlapReport {
        dug: tree::overlap_ratio(&train_set, &test_trees)?,
        n_train: train_trees.len(),
        n_test: test_trees.len(),
        n_train_shapes: train_set.len(),
    })
}

/// DUG of `test` against `train` after keeping only sentences with
/// lengths in `lo..=hi` in both.
pub fn focused_dug(train: &Treebank, test: &Treebank, lo: usize, hi: usize, filter: WordFilter) -> Result<f64> {
    Ok(overlap_report(train, test, IsoMode::Directed, Some((lo, hi)), filter)?.dug)
}

/// One record from a training treebank and an aligned gold/predicted test
/// pair. `focused_dug` is filled when the test side has sentences in the
/// focused band.
pub fn summarize_treebank(
    name: &str,
    train: &Treebank,
    test_gold: &Treebank,
    test_pred: &Treebank,
    opts: AnalysisOptions,
) -> Result<TreebankRecord> {
    if test_gold.is_empty() {
        return Err(ExperimentError::EmptyTest);
    }
    let train_trees = treebank_trees(train, opts.filter)?;
    let test_trees = treebank_trees(test_gold, opts.filter)?;

    let dug = tree::dug(&IsoClassSet::from_trees(&train_trees, IsoMode::Directed), &test_trees)?;
    let uug = tree::uug(&IsoClassSet::from_trees(&train_trees, IsoMode::Undirected), &test_trees)?;
    let las = las(test_gold, test_pred, opts.las_options())?.score();
    let mean_len = mean_length(test_gold, opts.filter)?;

    let mut record = TreebankRecord::new(name, train.len() as u64, mean_len, dug, las)?.with_uug(uug)?;
    let (lo, hi) = FOCUSED_LENGTHS;
    match focused_dug(train, test_gold, lo, hi, opts.filter) {
        Ok(f) => record = record.with_focused_dug(f)?,
        Err(ExperimentError::EmptySubset { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(record)
}

/// Per-length DUG and LAS.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinRecord {
    pub name: String,
    pub length: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` when the bin has no test sentences.
    pub dug: Option<f64>,
    pub las: Option<LasResult>,
}

impl BinRecord {
    pub fn is_empty(&self) -> bool {
        self.n_test == 0
    }
}

/// One bin per length in `lo..=hi`: training shapes of that length against
/// test sentences of that length.
pub fn length_binned_analysis(
    name: &str,
    train: &Treebank,
    test_gold: &Treebank,
    test_pred: &Treebank,
    lo: usize,
    hi: usize,
    opts: AnalysisOptions,
) -> Result<Vec<BinRecord>> {
    let group = |tb: &Treebank| -> Result<BTreeMap<usize, Vec<DepTree>>> {
        let mut by_len: BTreeMap<usize, Vec<DepTree>> = BTreeMap::new();
        for (t, l) in treebank_trees(tb, opts.filter)?
            .into_iter()
            .zip(lengths_of(tb, opts.filter))
        {
            by_len.entry(l).or_default().push(t);
        }
        Ok(by_len)
    };
    let train_by_len = group(train)?;
    let test_by_len = group(test_gold)?;
    let las_bins = las_by_length(test_gold, test_pred, opts.las_options())?;

    let empty = Vec::new();
    let mut bins = Vec::new();
    for length in lo..=hi {
        let train_trees = train_by_len.get(&length).unwrap_or(&empty);
        let test_trees = test_by_len.get(&length).unwrap_or(&empty);
        let dug = if test_trees.is_empty() {
            None
        } else {
            let set = IsoClassSet::from_trees(train_trees, IsoMode::Directed);
            Some(tree::dug(&set, test_trees)?)
        };
        let las = las_bins.get(&length).copied().filter(|r| r.total > 0);
        bins.push(BinRecord {
            name: name.to_owned(),
            length,
            n_train: train_trees.len(),
            n_test: test_trees.len(),
            dug,
            las,
        });
    }
    Ok(bins)
}

/// A labelled correlation. `controls` lists partialled-out covariates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub x: String,
    pub y: String,
    pub controls: Vec<String>,
    pub result: CorrelationResult,
}

/// Records sorted by name, so tables do not depend on input order.
fn by_name(records: &[TreebankRecord]) -> Vec<&TreebankRecord> {
    let mut sorted: Vec<_> = records.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    sorted
}

fn column(records: &[&TreebankRecord], feature: Feature) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            r.get(feature).ok_or_else(|| ExperimentError::MissingFeature {
                name: r.name.clone(),
                feature,
            })
        })
        .collect()
}

fn require(records: &[TreebankRecord], needed: usize) -> Result<()> {
    if records.len() < needed {
        return Err(ExperimentError::TooFewRecords {
            needed,
            got: records.len(),
        });
    }
    Ok(())
}

/// Spearman correlation of each `(x, y)` pair.
pub fn correlation_table(records: &[TreebankRecord], pairs: &[(Feature, Feature)]) -> Result<Vec<CorrelationRow>> {
    require(records, 5)?;
    let sorted = by_name(records);
    pairs
        .iter()
        .map(|&(x, y)| {
            let result = stats_ctx(
                format!("spearman({}, {})", x, y),
                stats::spearman(&column(&sorted, x)?, &column(&sorted, y)?),
            )?;
            Ok(CorrelationRow {
                x: x.to_string(),
                y: y.to_string(),
                controls: Vec::new(),
                result,
            })
        })
        .collect()
}

/// Size, DUG and mean test length against LAS, then size and mean test
/// length against DUG. `dug` selects the DUG variant.
pub fn dug_correlation_table(records: &[TreebankRecord], dug: Feature) -> Result<Vec<CorrelationRow>> {
    correlation_table(
        records,
        &[
            (Feature::TrainSize, Feature::Las),
            (dug, Feature::Las),
            (Feature::MeanTestLen, Feature::Las),
            (Feature::TrainSize, dug),
            (Feature::MeanTestLen, dug),
        ],
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CvMode {
    /// Contiguous, unshuffled folds.
    Original,
    /// Mean over seeds of shuffled folds.
    MultiSeed(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvRow {
    pub features: Vec<Feature>,
    pub score: f64,
}

/// `{size}`, `{size, dug}`, `{size, Ltest}` and `{size, dug, Ltest}`.
pub fn standard_feature_sets(size: Feature, dug: Feature) -> Vec<Vec<Feature>> {
    vec![
        vec![size],
        vec![size, dug],
        vec![size, Feature::MeanTestLen],
        vec![size, dug, Feature::MeanTestLen],
    ]
}

/// Three-fold cross-validated explained variance of LAS for each feature
/// set. Rows keep the input record order.
pub fn cv_table(records: &[TreebankRecord], feature_sets: &[Vec<Feature>], mode: &CvMode) -> Result<Vec<CvRow>> {
    require(records, 2 * CV_FOLDS)?;
    let rows: Vec<&TreebankRecord> = records.iter().collect();
    let las = column(&rows, Feature::Las)?;
    feature_sets
        .iter()
        .map(|set| {
            let columns = set.iter().map(|&f| column(&rows, f)).collect::<Result<Vec<_>>>()?;
            let label = set.iter().map(|f| f.name()).collect::<Vec<_>>().join("+");
            let score = match mode {
                CvMode::Original => stats_ctx(
                    label,
                    stats::kfold_cv_explained_variance(&columns, &las, CV_FOLDS, false, 0),
                )?,
                CvMode::MultiSeed(seeds) => {
                    let mut scores = Vec::with_capacity(seeds.len());
                    for &seed in seeds {
                        scores.push(stats_ctx(
                            format!("{} (seed {})", label, seed),
                            stats::kfold_cv_explained_variance(&columns, &las, CV_FOLDS, true, seed),
                        )?);
                    }
                    stats::mean(&scores)
                }
            };
            Ok(CvRow {
                features: set.clone(),
                score,
            })
        })
        .collect()
}

/// Spearman of `x` and `y`, then partial correlations controlling log
/// size, mean test length, and both.
pub fn partial_corr_table(records: &[TreebankRecord], x: Feature, y: Feature) -> Result<Vec<CorrelationRow>> {
    require(records, 8)?;
    let sorted = by_name(records);
    let (xs, ys) = (column(&sorted, x)?, column(&sorted, y)?);
    let plain = stats_ctx(format!("spearman({}, {})", x, y), stats::spearman(&xs, &ys))?;
    let mut rows = vec![CorrelationRow {
        x: x.to_string(),
        y: y.to_string(),
        controls: Vec::new(),
        result: plain,
    }];
    for controls in [
        vec![Feature::LogSize],
        vec![Feature::MeanTestLen],
        vec![Feature::LogSize, Feature::MeanTestLen],
    ] {
        let covars = controls
            .iter()
            .map(|&f| column(&sorted, f))
            .collect::<Result<Vec<_>>>()?;
        let names: Vec<String> = controls.iter().map(|f| f.to_string()).collect();
        let result = stats_ctx(
            format!("partial_spearman({}, {} | {})", x, y, names.join(", ")),
            stats::partial_spearman(&xs, &ys, &covars),
        )?;
        rows.push(CorrelationRow {
            x: x.to_string(),
            y: y.to_string(),
            controls: names,
            result,
        });
    }
    Ok(rows)
}

/// LAS with size and length backgrounds divided out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackgroundSubtraction {
    /// Record names, sorted; the series below follow this order.
    pub names: Vec<String>,
    pub size_fit: RegressionFit,
    pub length_fit: RegressionFit,
    /// `las / size background`.
    pub normalized: Vec<f64>,
    /// `normalized / length background`.
    pub doubly_normalized: Vec<f64>,
    pub report: Vec<CorrelationRow>,
}

pub const NORMALIZED_NAME: &str = "las/bcg_size";
pub const DOUBLY_NORMALIZED_NAME: &str = "las/bcg_size_ltest";

fn divide_out(names: &[String], values: &[f64], background: &[f64], stage: &'static str) -> Result<Vec<f64>> {
    values
        .iter()
        .zip(background)
        .zip(names)
        .map(|((v, b), name)| {
            if *b > 0.0 {
                Ok(v / b)
            } else {
                Err(ExperimentError::NonPositivePrediction {
                    name: name.clone(),
                    stage,
                    value: *b,
                })
            }
        })
        .collect()
}

/// Fits LAS on `size` (log size unless the raw variant is wanted), divides
/// LAS by the fitted values, fits the result on mean test length and
/// divides again. Reports DUG against LAS and both normalized series, and
/// mean test length against the first.
pub fn background_subtract(records: &[TreebankRecord], size: Feature) -> Result<BackgroundSubtraction> {
    require(records, 10)?;
    let sorted = by_name(records);
    let names: Vec<String> = sorted.iter().map(|r| r.name.clone()).collect();
    let las = column(&sorted, Feature::Las)?;
    let dug = column(&sorted, Feature::Dug)?;
    let sizes = column(&sorted, size)?;
    let lengths = column(&sorted, Feature::MeanTestLen)?;

    let spearman = |x: &[f64], y: &[f64], xn: &str, yn: &str| -> Result<CorrelationRow> {
        Ok(CorrelationRow {
            x: xn.to_owned(),
            y: yn.to_owned(),
            controls: Vec::new(),
            result: stats_ctx(format!("spearman({}, {})", xn, yn), stats::spearman(x, y))?,
        })
    };
    let raw = spearman(&dug, &las, "dug", "las")?;

    let size_fit = stats_ctx("size background fit", stats::ols_fit(&[&sizes[..]], &las))?.named(&[size.name()]);
    let size_bg = stats_ctx("size background", stats::predict(&size_fit, &[&sizes[..]]))?;
    let normalized = divide_out(&names, &las, &size_bg, "size")?;

    let length_fit =
        stats_ctx("length background fit", stats::ols_fit(&[&lengths[..]], &normalized))?.named(&["mean_test_len"]);
    let length_bg = stats_ctx("length background", stats::predict(&length_fit, &[&lengths[..]]))?;
    let doubly_normalized = divide_out(&names, &normalized, &length_bg, "length")?;

    let report = vec![
        raw,
        spearman(&dug, &normalized, "dug", NORMALIZED_NAME)?,
        spearman(&lengths, &normalized, "mean_test_len", NORMALIZED_NAME)?,
        spearman(&dug, &doubly_normalized, "dug", DOUBLY_NORMALIZED_NAME)?,
    ];
    Ok(BackgroundSubtraction {
        names,
        size_fit,
        length_fit,
        normalized,
        doubly_normalized,
        report,
    })
}
