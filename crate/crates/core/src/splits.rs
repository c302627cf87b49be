//! Controlled train/test splits with fixed size and sentence length.

use serde::Serialize;

use crate::conllu::{Treebank, WordFilter};
use crate::experiments::{ExperimentError, Result};
use crate::rng::SeededRng;
use crate::tree::{self, treebank_trees, IsoClassSet, IsoMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SplitConfig {
    /// Sentence length (syntactic words) every sampled sentence has.
    pub length: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Minimum number of pool sentences of `length`.
    pub min_pool: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            length: 12,
            train_size: 1000,
            test_size: 200,
            min_pool: 1200,
        }
    }
}

/// One training set and as many disjoint test sets as the pool allows.
/// Index vectors refer to sentence positions in the pool.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledSplit {
    pub source_name: String,
    pub seed: u64,
    pub train: Treebank,
    pub tests: Vec<Treebank>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<Vec<usize>>,
    /// Eligible sentences left over after the last full test set.
    pub discarded: Vec<usize>,
}

/// Filters the pool to sentences of `config.length`, shuffles them with
/// the seeded generator, takes the first `train_size` for training and
/// cuts the rest into `test_size` chunks. A trailing partial chunk is
/// discarded.
pub fn sample_controlled_splits(pool: &Treebank, config: SplitConfig, seed: u64) -> Result<ControlledSplit> {
    let mut eligible: Vec<usize> = pool
        .sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| s.filtered_len(WordFilter::All) == config.length)
        .map(|(i, _)| i)
        .collect();
    let needed = config.min_pool.max(config.train_size + config.test_size);
    if eligible.len() < needed || config.test_size == 0 {
        return Err(ExperimentError::InsufficientPool {
            available: eligible.len(),
            needed,
            length: config.length,
        });
    }

    SeededRng::new(seed).shuffle(&mut eligible);
    let (train_indices, rest) = eligible.split_at(config.train_size);
    let chunks = rest.len() / config.test_size;
    let test_indices: Vec<Vec<usize>> = rest
        .chunks_exact(config.test_size)
        .take(chunks)
        .map(<[usize]>::to_vec)
        .collect();
    let discarded = rest[chunks * config.test_size..].to_vec();

    let subset = |indices: &[usize], name: String| {
        Treebank::new(name, indices.iter().map(|&i| pool.sentences[i].clone()).collect())
    };
    Ok(ControlledSplit {
        source_name: pool.name.clone(),
        seed,
        train: subset(train_indices, format!("{}-train", pool.name)),
        tests: test_indices
            .iter()
            .enumerate()
            .map(|(k, idx)| subset(idx, format!("{}-test_{}", pool.name, k)))
            .collect(),
        train_indices: train_indices.to_vec(),
        test_indices,
        discarded,
    })
}

/// DUG of every test set against the training set.
pub fn split_dugs(split: &ControlledSplit) -> Result<Vec<f64>> {
    let train = IsoClassSet::from_trees(&treebank_trees(&split.train, WordFilter::All)?, IsoMode::Directed);
    split
        .tests
        .iter()
        .map(|t| Ok(tree::dug(&train, &treebank_trees(t, WordFilter::All)?)?))
        .collect()
}
