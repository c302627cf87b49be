//! Python bindings: treebanks, canonical codes, overlap, LAS, the rank
//! statistics and the records analysis.

use std::collections::BTreeMap;

use isoscope::conllu::{self, WordFilter};
use isoscope::eval::{self, LasOptions};
use isoscope::experiments::{self, AnalysisOptions};
use isoscope::pipeline::{self, AnalysisInput, AnalyzeConfig};
use isoscope::record::{self, Feature};
use isoscope::splits::{self, SplitConfig};
use isoscope::stats::{self, CorrelationResult};
use isoscope::tree::{self, DepTree, IsoMode};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn filter(exclude_punct: bool) -> WordFilter {
    if exclude_punct {
        WordFilter::ExcludePunct
    } else {
        WordFilter::All
    }
}

fn mode(name: &str) -> PyResult<IsoMode> {
    name.parse().map_err(value_err)
}

/// A parsed CoNLL-U treebank.
#[pyclass(name = "Treebank", module = "isoscope", skip_from_py_object)]
#[derive(Clone)]
struct PyTreebank {
    inner: conllu::Treebank,
}

#[pymethods]
impl PyTreebank {
    #[staticmethod]
    #[pyo3(signature = (text, name = "treebank"))]
    fn parse(text: &str, name: &str) -> PyResult<Self> {
        Ok(PyTreebank {
            inner: conllu::parse_conllu(name, text).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        match conllu::read_conllu(path) {
            Ok(inner) => Ok(PyTreebank { inner }),
            Err(e @ conllu::ReadError::Io { .. }) => Err(PyOSError::new_err(e.to_string())),
            Err(e) => Err(value_err(e)),
        }
    }

    /// Treebank built from one head list per sentence (1-based, 0 = root).
    #[staticmethod]
    #[pyo3(signature = (heads, name = "treebank"))]
    fn from_heads(heads: Vec<Vec<usize>>, name: &str) -> PyResult<Self> {
        for h in &heads {
            DepTree::from_parents(h.clone()).map_err(value_err)?;
        }
        let sentences = heads.iter().map(|h| conllu::Sentence::from_heads(h)).collect();
        Ok(PyTreebank {
            inner: conllu::Treebank::new(name, sentences),
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    fn to_conllu(&self) -> String {
        conllu::write_conllu(&self.inner)
    }

    /// Head list of every sentence's syntactic words.
    fn heads(&self) -> Vec<Vec<usize>> {
        self.inner
            .sentences
            .iter()
            .map(|s| s.words().map(|t| t.head.unwrap_or(0)).collect())
            .collect()
    }

    #[pyo3(signature = (exclude_punct = false))]
    fn sentence_lengths(&self, exclude_punct: bool) -> Vec<usize> {
        let f = filter(exclude_punct);
        self.inner.sentences.iter().map(|s| s.filtered_len(f)).collect()
    }

    #[pyo3(signature = (exclude_punct = false))]
    fn mean_length(&self, exclude_punct: bool) -> PyResult<f64> {
        conllu::mean_length(&self.inner, filter(exclude_punct)).map_err(value_err)
    }

    #[pyo3(signature = (lo, hi, exclude_punct = false))]
    fn restrict_lengths(&self, lo: usize, hi: usize, exclude_punct: bool) -> Self {
        PyTreebank {
            inner: self.inner.restrict_lengths(lo, hi, filter(exclude_punct)),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Treebank(name={:?}, sentences={})", self.inner.name, self.inner.len())
    }
}

/// Canonical code of the tree given by a head list.
#[pyfunction]
#[pyo3(signature = (heads, mode = "directed"))]
fn canon_code(heads: Vec<usize>, mode: &str) -> PyResult<String> {
    let tree = DepTree::from_parents(heads).map_err(value_err)?;
    Ok(self::mode(mode)?.canon(&tree).into_string())
}

#[pyfunction]
#[pyo3(signature = (a, b, mode = "directed"))]
fn is_isomorphic_bruteforce(a: Vec<usize>, b: Vec<usize>, mode: &str) -> PyResult<bool> {
    let a = DepTree::from_parents(a).map_err(value_err)?;
    let b = DepTree::from_parents(b).map_err(value_err)?;
    tree::is_isomorphic_bruteforce(&a, &b, self::mode(mode)?).map_err(value_err)
}

/// Overlap of `test` against `train` as a dict with `dug`, `n_train`,
/// `n_test` and `n_train_shapes`.
#[pyfunction]
#[pyo3(signature = (train, test, mode = "directed", lengths = None, exclude_punct = false))]
fn dug<'py>(
    py: Python<'py>,
    train: &PyTreebank,
    test: &PyTreebank,
    mode: &str,
    lengths: Option<(usize, usize)>,
    exclude_punct: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let r = experiments::overlap_report(
        &train.inner,
        &test.inner,
        self::mode(mode)?,
        lengths,
        filter(exclude_punct),
    )
    .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("dug", r.dug)?;
    d.set_item("n_train", r.n_train)?;
    d.set_item("n_test", r.n_test)?;
    d.set_item("n_train_shapes", r.n_train_shapes)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (train, test, exclude_punct = false))]
fn uug(train: &PyTreebank, test: &PyTreebank, exclude_punct: bool) -> PyResult<f64> {
    let r = experiments::overlap_report(
        &train.inner,
        &test.inner,
        IsoMode::Undirected,
        None,
        filter(exclude_punct),
    )
    .map_err(value_err)?;
    Ok(r.dug)
}

#[pyfunction]
fn count_rooted_trees(n: usize) -> num_bigint::BigUint {
    tree::count_rooted_trees(n)
}

/// Returns `(correct, total, score)`.
#[pyfunction]
#[pyo3(signature = (gold, pred, exact_deprel = false, exclude_punct = false))]
fn las(gold: &PyTreebank, pred: &PyTreebank, exact_deprel: bool, exclude_punct: bool) -> PyResult<(usize, usize, f64)> {
    let opts = LasOptions {
        exact_deprel,
        filter: filter(exclude_punct),
    };
    let r = eval::las(&gold.inner, &pred.inner, opts).map_err(value_err)?;
    Ok((r.correct, r.total, r.score()))
}

fn correlation(r: CorrelationResult) -> (f64, f64) {
    (r.rho, r.p_value)
}

/// Returns `(rho, p_value)`.
#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
    stats::spearman(&x, &y).map(correlation).map_err(value_err)
}

#[pyfunction]
fn partial_spearman(x: Vec<f64>, y: Vec<f64>, covariates: Vec<Vec<f64>>) -> PyResult<(f64, f64)> {
    stats::partial_spearman(&x, &y, &covariates)
        .map(correlation)
        .map_err(value_err)
}

/// Least squares on feature columns; returns `(intercept, coefficients)`.
#[pyfunction]
fn ols(features: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
    let fit = stats::ols_fit(&features, &y).map_err(value_err)?;
    Ok((fit.intercept, fit.coefficients))
}

#[pyfunction]
fn explained_variance(y: Vec<f64>, yhat: Vec<f64>) -> PyResult<f64> {
    stats::explained_variance(&y, &yhat).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (n, k, shuffle = false, seed = 0))]
fn kfold_indices(n: usize, k: usize, shuffle: bool, seed: u64) -> PyResult<Vec<Vec<usize>>> {
    stats::kfold_indices(n, k, shuffle, seed).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (features, y, k = 3, shuffle = true, seed = 0))]
fn kfold_cv_explained_variance(
    features: Vec<Vec<f64>>,
    y: Vec<f64>,
    k: usize,
    shuffle: bool,
    seed: u64,
) -> PyResult<f64> {
    stats::kfold_cv_explained_variance(&features, &y, k, shuffle, seed).map_err(value_err)
}

/// Returns `(train, tests, discarded_count)`.
#[pyfunction]
#[pyo3(signature = (pool, seed, length = 12, train = 1000, test = 200, min_pool = 1200))]
fn sample_controlled_splits(
    pool: &PyTreebank,
    seed: u64,
    length: usize,
    train: usize,
    test: usize,
    min_pool: usize,
) -> PyResult<(PyTreebank, Vec<PyTreebank>, usize)> {
    let config = SplitConfig {
        length,
        train_size: train,
        test_size: test,
        min_pool,
    };
    let split = splits::sample_controlled_splits(&pool.inner, config, seed).map_err(value_err)?;
    Ok((
        PyTreebank { inner: split.train },
        split.tests.into_iter().map(|inner| PyTreebank { inner }).collect(),
        split.discarded.len(),
    ))
}

/// Runs the records analysis on CSV text; returns file name to CSV text.
#[pyfunction]
#[pyo3(signature = (records_csv, tables = None, figures = None, seeds = None, raw_size = false))]
fn analyze_records(
    records_csv: &str,
    tables: Option<Vec<u32>>,
    figures: Option<Vec<u32>>,
    seeds: Option<Vec<u64>>,
    raw_size: bool,
) -> PyResult<BTreeMap<String, String>> {
    let records = record::read_records_csv(records_csv.as_bytes()).map_err(value_err)?;
    let mut config = AnalyzeConfig::default();
    if let Some(t) = tables {
        config.tables = t.into_iter().collect();
    }
    if let Some(f) = figures {
        config.figures = f.into_iter().collect();
    }
    if let Some(s) = seeds {
        config.seeds = s;
    }
    if raw_size {
        config.background_size = Feature::TrainSize;
    }
    let out = pipeline::run_analysis(&AnalysisInput { records, bins: None }, &config).map_err(value_err)?;
    Ok(out.files.into_iter().collect())
}

/// One records CSV row per treebank triple: `(name, train, gold, pred)`.
#[pyfunction]
#[pyo3(signature = (name, train, gold, pred, exclude_punct = false, exact_deprel = false))]
fn summarize_treebank(
    name: &str,
    train: &PyTreebank,
    gold: &PyTreebank,
    pred: &PyTreebank,
    exclude_punct: bool,
    exact_deprel: bool,
) -> PyResult<String> {
    let opts = AnalysisOptions {
        filter: filter(exclude_punct),
        exact_deprel,
    };
    let r = experiments::summarize_treebank(name, &train.inner, &gold.inner, &pred.inner, opts).map_err(value_err)?;
    Ok(record::write_records_csv(&[r]))
}

#[pymodule]
#[pyo3(name = "isoscope")]
fn isoscope_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTreebank>()?;
    m.add_function(wrap_pyfunction!(canon_code, m)?)?;
    m.add_function(wrap_pyfunction!(is_isomorphic_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(dug, m)?)?;
    m.add_function(wrap_pyfunction!(uug, m)?)?;
    m.add_function(wrap_pyfunction!(count_rooted_trees, m)?)?;
    m.add_function(wrap_pyfunction!(las, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(partial_spearman, m)?)?;
    m.add_function(wrap_pyfunction!(ols, m)?)?;
    m.add_function(wrap_pyfunction!(explained_variance, m)?)?;
    m.add_function(wrap_pyfunction!(kfold_indices, m)?)?;
    m.add_function(wrap_pyfunction!(kfold_cv_explained_variance, m)?)?;
    m.add_function(wrap_pyfunction!(sample_controlled_splits, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_records, m)?)?;
    m.add_function(wrap_pyfunction!(summarize_treebank, m)?)?;
    Ok(())
}
