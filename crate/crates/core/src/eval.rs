//! Labelled attachment score over gold-tokenized predictions.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};

use serde::Serialize;
use thiserror::Error;

use crate::conllu::{Sentence, Treebank, WordFilter};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LasResult {
    pub correct: usize,
    pub total: usize,
}

impl LasResult {
    /// `correct / total`; NaN when nothing was scored.
    pub fn score(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

impl Add for LasResult {
    type Output = LasResult;

    fn add(self, rhs: LasResult) -> LasResult {
        LasResult {
            correct: self.correct + rhs.correct,
            total: self.total + rhs.total,
        }
    }
}

impl AddAssign for LasResult {
    fn add_assign(&mut self, rhs: LasResult) {
        *self = *self + rhs;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LasOptions {
    /// Compare full relations instead of stripping subtypes.
    pub exact_deprel: bool,
    pub filter: WordFilter,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("gold has {gold} sentences but prediction has {pred}")]
    SentenceCount { gold: usize, pred: usize },
    #[error("sentence {index}: gold has {gold} words but prediction has {pred}")]
    WordCount { index: usize, gold: usize, pred: usize },
    #[error("no words to score")]
    Empty,
}

/// Word counts of one aligned sentence pair.
fn score_sentence(index: usize, gold: &Sentence, pred: &Sentence, opts: LasOptions) -> Result<LasResult, EvalError> {
    let (gw, pw) = (gold.len(), pred.len());
    if gw != pw {
        return Err(EvalError::WordCount {
            index,
            gold: gw,
            pred: pw,
        });
    }
    let mut out = LasResult::default();
    for (g, p) in gold.words().zip(pred.words()) {
        if !opts.filter.keeps(g) {
            continue;
        }
        out.total += 1;
        let label_ok = if opts.exact_deprel {
            g.deprel == p.deprel
        } else {
            g.deprel_base() == p.deprel_base()
        };
        if label_ok && g.head == p.head {
            out.correct += 1;
        }
    }
    Ok(out)
}

fn check_alignment(gold: &Treebank, pred: &Treebank) -> Result<(), EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    Ok(())
}

/// Counts per gold sentence length. Lengths follow `opts.filter`.
pub fn las_by_length(
    gold: &Treebank,
    pred: &Treebank,
    opts: LasOptions,
) -> Result<BTreeMap<usize, LasResult>, EvalError> {
    check_alignment(gold, pred)?;
    let mut bins: BTreeMap<usize, LasResult> = BTreeMap::new();
    for (i, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        let counts = score_sentence(i + 1, g, p, opts)?;
        *bins.entry(g.filtered_len(opts.filter)).or_default() += counts;
    }
    Ok(bins)
}

/// LAS over all words. A word is correct when both head and relation
/// match; relations are compared without subtypes unless
/// `opts.exact_deprel` is set.
pub fn las(gold: &Treebank, pred: &Treebank, opts: LasOptions) -> Result<LasResult, EvalError> {
    let total = las_by_length(gold, pred, opts)?
        .into_values()
        .fold(LasResult::default(), Add::add);
    if total.total == 0 {
        return Err(EvalError::Empty);
    }
    Ok(total)
}

/// LAS restricted to sentences whose gold length is in `lo..=hi`.
/// `Ok(None)` marks an empty subset.
pub fn las_for_lengths(
    gold: &Treebank,
    pred: &Treebank,
    lo: usize,
    hi: usize,
    opts: LasOptions,
) -> Result<Option<LasResult>, EvalError> {
    let pooled = las_by_length(gold, pred, opts)?
        .range(lo..=hi.max(lo))
        .filter(|_| lo <= hi)
        .map(|(_, r)| *r)
        .fold(LasResult::default(), Add::add);
    Ok((pooled.total > 0).then_some(pooled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::Token;

    fn sentence(words: &[(usize, &str)]) -> Sentence {
        Sentence::new(
            words
                .iter()
                .enumerate()
                .map(|(i, &(h, rel))| Token::word(i + 1, "w", h, rel))
                .collect(),
        )
    }

    fn tb(sentences: Vec<Sentence>) -> Treebank {
        Treebank::new("t", sentences)
    }

    #[test]
    fn identity_scores_one() {
        let g = tb(vec![
            sentence(&[(0, "root"), (1, "obj")]),
            sentence(&[(2, "det"), (0, "root")]),
        ]);
        let r = las(&g, &g, LasOptions::default()).unwrap();
        assert_eq!(r, LasResult { correct: 4, total: 4 });
        assert_eq!(r.score(), 1.0);
    }

    #[test]
    fn shifted_heads_score_zero() {
        let g = tb(vec![sentence(&[(0, "root"), (1, "dep"), (2, "dep"), (3, "dep")])]);
        // Every head moved by one (mod n+1 over 0..=n), labels kept.
        let p = tb(vec![sentence(&[(2, "root"), (3, "dep"), (4, "dep"), (0, "dep")])]);
        assert_eq!(las(&g, &p, LasOptions::default()).unwrap().score(), 0.0);
    }

    #[test]
    fn hand_scored_four_words() {
        let g = tb(vec![sentence(&[(2, "nsubj"), (0, "root"), (2, "obj"), (3, "det")])]);
        let p = tb(vec![sentence(&[
            (2, "nsubj"), // head + label
            (0, "root"),  // head + label
            (2, "iobj"),  // head only
            (1, "det"),   // label only
        ])]);
        let r = las(&g, &p, LasOptions::default()).unwrap();
        assert_eq!(r, LasResult { correct: 2, total: 4 });
        assert_eq!(r.score(), 0.5);
    }

    #[test]
    fn subtypes_are_stripped_by_default() {
        let g = tb(vec![sentence(&[(0, "root"), (1, "nsubj")])]);
        let p = tb(vec![sentence(&[(0, "root"), (1, "nsubj:pass")])]);
        assert_eq!(las(&g, &p, LasOptions::default()).unwrap().correct, 2);
        let exact = LasOptions {
            exact_deprel: true,
            ..Default::default()
        };
        assert_eq!(las(&g, &p, exact).unwrap().correct, 1);
    }

    #[test]
    fn alignment_errors() {
        let one = tb(vec![sentence(&[(0, "root")])]);
        let two = tb(vec![sentence(&[(0, "root")]), sentence(&[(0, "root")])]);
        assert_eq!(
            las(&one, &two, LasOptions::default()),
            Err(EvalError::SentenceCount { gold: 1, pred: 2 })
        );
        let longer = tb(vec![sentence(&[(0, "root"), (1, "dep")])]);
        assert_eq!(
            las(&one, &longer, LasOptions::default()),
            Err(EvalError::WordCount {
                index: 1,
                gold: 1,
                pred: 2
            })
        );
    }

    #[test]
    fn length_restriction() {
        let g = tb(vec![
            sentence(&[(0, "root"), (1, "dep")]),
            sentence(&[(0, "root"), (1, "dep"), (1, "dep")]),
        ]);
        let mut p = g.clone();
        p.sentences[1].tokens[2].deprel = "obj".into();

        let opts = LasOptions::default();
        assert_eq!(las_for_lengths(&g, &p, 5, 5, opts).unwrap(), None);
        assert_eq!(
            las_for_lengths(&g, &p, 1, 1_000_000_000, opts).unwrap(),
            Some(las(&g, &p, opts).unwrap())
        );
        assert_eq!(
            las_for_lengths(&g, &p, 3, 3, opts).unwrap(),
            Some(LasResult { correct: 2, total: 3 })
        );
        assert_eq!(las_for_lengths(&g, &p, 4, 2, opts).unwrap(), None);
    }

    #[test]
    fn punct_words_can_be_skipped() {
        let g = tb(vec![sentence(&[(0, "root"), (1, "punct")])]);
        let p = tb(vec![sentence(&[(0, "root"), (0, "punct")])]);
        let opts = LasOptions {
            filter: WordFilter::ExcludePunct,
            ..Default::default()
        };
        assert_eq!(las(&g, &p, opts).unwrap(), LasResult { correct: 1, total: 1 });
    }
}
