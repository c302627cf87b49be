//! Rank correlation, least squares and cross-validated explained variance.
//!
//! Variances are population variances (divide by `n`) throughout.

use std::ops::Deref;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::rng::SeededRng;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("covariates are collinear with the correlated variables")]
    Collinear,
    #[error("design matrix is rank deficient")]
    Singular,
    #[error("value {value} at index {index} is not positive")]
    NonPositive { index: usize, value: f64 },
    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("expected {expected} feature columns, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("partial correlation supports 1 or 2 covariates, got {0}")]
    CovariateCount(usize),
    #[error("exact permutation p-values need n <= {max}, got {n}")]
    ExactTooLarge { n: usize, max: usize },
    #[error("cannot split {n} rows into {k} folds of at least two rows")]
    Folds { n: usize, k: usize },
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;

/// A named column of finite values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { index });
        }
        Ok(Series {
            name: name.into(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Deref for Series {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl AsRef<[f64]> for Series {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

fn at_least(n: usize, needed: usize) -> Result<()> {
    if n < needed {
        return Err(StatsError::TooFewSamples { needed, got: n });
    }
    Ok(())
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// 1-based ranks; ties share the mean of the ranks they span.
pub fn ranks_average_ties(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    same_len(x, y)?;
    at_least(x.len(), 3)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    /// `n - 2 - number of controlled covariates`.
    pub df: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PValueMethod {
    /// Two-tailed Student-t approximation.
    #[default]
    StudentT,
    /// Exhaustive permutation of one variable's ranks; only for `n <= 9`.
    ExactPermutation,
}

/// Largest sample handled by [`PValueMethod::ExactPermutation`].
pub const EXACT_PERMUTATION_MAX_N: usize = 9;

/// Two-tailed p-value of a correlation `r` with `df` degrees of freedom.
pub fn correlation_p_value(r: f64, df: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    if df == 0 {
        return 1.0;
    }
    let df = df as f64;
    let t2 = r * r * df / (1.0 - r * r);
    student_t_two_tailed_from_t2(t2, df)
}

/// `P(|T| >= t)` for Student's t with `df` degrees of freedom, given `t^2`.
fn student_t_two_tailed_from_t2(t2: f64, df: f64) -> f64 {
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2)).clamp(0.0, 1.0)
}

/// Two-tailed Student-t tail probability.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    student_t_two_tailed_from_t2(t * t, df)
}

/// Spearman's rho with a Student-t p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    spearman_with(x, y, PValueMethod::StudentT)
}

pub fn spearman_with(x: &[f64], y: &[f64], method: PValueMethod) -> Result<CorrelationResult> {
    same_len(x, y)?;
    let n = x.len();
    at_least(n, 4)?;
    let (rx, ry) = (ranks_average_ties(x), ranks_average_ties(y));
    let rho = pearson(&rx, &ry)?;
    let p_value = match method {
        PValueMethod::StudentT => correlation_p_value(rho, n - 2),
        PValueMethod::ExactPermutation => {
            if n > EXACT_PERMUTATION_MAX_N {
                return Err(StatsError::ExactTooLarge {
                    n,
                    max: EXACT_PERMUTATION_MAX_N,
                });
            }
            permutation_p_value(&rx, &ry, rho)
        }
    };
    Ok(CorrelationResult {
        rho,
        p_value,
        n,
        df: n - 2,
    })
}

fn permutation_p_value(rx: &[f64], ry: &[f64], observed: f64) -> f64 {
    let n = rx.len();
    let mut hits = 0usize;
    let mut total = 0usize;
    let mut permuted = vec![0.0; n];
    for perm in (0..n).permutations(n) {
        for (slot, &i) in permuted.iter_mut().zip(&perm) {
            *slot = ry[i];
        }
        let r = pearson(rx, &permuted).unwrap_or(0.0);
        if r.abs() >= observed.abs() - 1e-12 {
            hits += 1;
        }
        total += 1;
    }
    hits as f64 / total as f64
}

/// Spearman correlation of `x` and `y` controlling for one or two
/// covariates, via the first-order partial correlation recursion on ranks.
pub fn partial_spearman<C: AsRef<[f64]>>(x: &[f64], y: &[f64], covariates: &[C]) -> Result<CorrelationResult> {
    let k = covariates.len();
    if !(1..=2).contains(&k) {
        return Err(StatsError::CovariateCount(k));
    }
    same_len(x, y)?;
    for c in covariates {
        same_len(x, c.as_ref())?;
    }
    let n = x.len();
    at_least(n, 5 + k)?;

    let mut ranked = vec![ranks_average_ties(x), ranks_average_ties(y)];
    ranked.extend(covariates.iter().map(|c| ranks_average_ties(c.as_ref())));
    let m = ranked.len();
    let mut r = vec![vec![1.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = pearson(&ranked[i], &ranked[j])?;
            r[i][j] = v;
            r[j][i] = v;
        }
    }

    let controls: Vec<usize> = (2..m).collect();
    let rho = partial_from_matrix(&r, 0, 1, &controls)?;
    let df = n - 2 - k;
    Ok(CorrelationResult {
        rho,
        p_value: correlation_p_value(rho, df),
        n,
        df,
    })
}

/// Denominators at or below this are treated as zero.
const COLLINEAR_TOLERANCE: f64 = 1e-12;

/// `r_xy.z = (r_xy - r_xz r_yz) / sqrt((1 - r_xz^2)(1 - r_yz^2))`, applied
/// recursively over `controls`.
pub fn partial_from_matrix(r: &[Vec<f64>], x: usize, y: usize, controls: &[usize]) -> Result<f64> {
    let Some((&z, rest)) = controls.split_last() else {
        return Ok(r[x][y]);
    };
    let rxy = partial_from_matrix(r, x, y, rest)?;
    let rxz = partial_from_matrix(r, x, z, rest)?;
    let ryz = partial_from_matrix(r, y, z, rest)?;
    let denom = (1.0 - rxz * rxz) * (1.0 - ryz * ryz);
    if denom <= COLLINEAR_TOLERANCE {
        return Err(StatsError::Collinear);
    }
    Ok(((rxy - rxz * ryz) / denom.sqrt()).clamp(-1.0, 1.0))
}

/// Affine model `intercept + sum(coef_i * x_i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl RegressionFit {
    pub fn named(mut self, names: &[&str]) -> Self {
        self.feature_names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(row).map(|(c, x)| c * x).sum::<f64>()
    }
}

fn columns_len<C: AsRef<[f64]>>(features: &[C], n: usize) -> Result<()> {
    match features.iter().find(|c| c.as_ref().len() != n) {
        Some(c) => Err(StatsError::LengthMismatch {
            left: c.as_ref().len(),
            right: n,
        }),
        None => Ok(()),
    }
}

/// Least-squares fit with an intercept, solved by Householder QR.
pub fn ols_fit<C: AsRef<[f64]>>(features: &[C], y: &[f64]) -> Result<RegressionFit> {
    let n = y.len();
    let p = features.len();
    columns_len(features, n)?;
    at_least(n, p + 2)?;

    let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { features[j - 1].as_ref()[i] });
    let qr = design.qr();
    let r = qr.r();
    let diag_max = (0..=p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = diag_max * n.max(p + 1) as f64 * f64::EPSILON;
    if diag_max == 0.0 || (0..=p).any(|i| r[(i, i)].abs() <= tol) {
        return Err(StatsError::Singular);
    }

    let mut qtb = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qtb);
    let beta = r
        .solve_upper_triangular(&qtb.rows(0, p + 1).into_owned())
        .ok_or(StatsError::Singular)?;

    Ok(RegressionFit {
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        feature_names: (1..=p).map(|i| format!("x{}", i)).collect(),
    })
}

/// Evaluates the fit on each row of the feature columns.
pub fn predict<C: AsRef<[f64]>>(fit: &RegressionFit, features: &[C]) -> Result<Vec<f64>> {
    if features.len() != fit.coefficients.len() {
        return Err(StatsError::ArityMismatch {
            expected: fit.coefficients.len(),
            found: features.len(),
        });
    }
    let n = features.first().map_or(0, |c| c.as_ref().len());
    columns_len(features, n)?;
    Ok((0..n)
        .map(|i| {
            fit.intercept
                + fit
                    .coefficients
                    .iter()
                    .zip(features)
                    .map(|(c, col)| c * col.as_ref()[i])
                    .sum::<f64>()
        })
        .collect())
}

/// `1 - Var(y - yhat) / Var(y)`; negative when the prediction is worse
/// than a constant.
pub fn explained_variance(y: &[f64], yhat: &[f64]) -> Result<f64> {
    same_len(y, yhat)?;
    at_least(y.len(), 2)?;
    let vy = variance(y);
    if vy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let residuals: Vec<f64> = y.iter().zip(yhat).map(|(a, b)| a - b).collect();
    Ok(1.0 - variance(&residuals) / vy)
}

/// Row indices of each fold. The first `n % k` folds get one extra row.
/// Without shuffling folds are contiguous; with shuffling rows are
/// permuted by a seeded Fisher-Yates pass first.
pub fn kfold_indices(n: usize, k: usize, shuffle: bool, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || n < 2 * k {
        return Err(StatsError::Folds { n, k });
    }
    let order = if shuffle {
        SeededRng::new(seed).permutation(n)
    } else {
        (0..n).collect()
    };
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Held-out explained variance of each fold.
pub fn kfold_cv_scores<C: AsRef<[f64]>>(
    features: &[C],
    y: &[f64],
    k: usize,
    shuffle: bool,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = y.len();
    columns_len(features, n)?;
    let folds = kfold_indices(n, k, shuffle, seed)?;

    let mut scores = Vec::with_capacity(k);
    for held_out in &folds {
        let mut is_test = vec![false; n];
        for &i in held_out {
            is_test[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
        let pick = |col: &[f64], rows: &[usize]| rows.iter().map(|&i| col[i]).collect::<Vec<f64>>();

        let train_x: Vec<Vec<f64>> = features.iter().map(|c| pick(c.as_ref(), &train)).collect();
        let fit = ols_fit(&train_x, &pick(y, &train))?;
        let test_x: Vec<Vec<f64>> = features.iter().map(|c| pick(c.as_ref(), held_out)).collect();
        let yhat = predict(&fit, &test_x)?;
        scores.push(explained_variance(&pick(y, held_out), &yhat)?);
    }
    Ok(scores)
}

/// Mean held-out explained variance over `k` folds.
pub fn kfold_cv_explained_variance<C: AsRef<[f64]>>(
    features: &[C],
    y: &[f64],
    k: usize,
    shuffle: bool,
    seed: u64,
) -> Result<f64> {
    let scores = kfold_cv_scores(features, y, k, shuffle, seed)?;
    Ok(mean(&scores))
}

/// Natural logarithm of each value.
pub fn log_series(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 {
                Ok(value.ln())
            } else {
                Err(StatsError::NonPositive { index, value })
            }
        })
        .collect()
}

/// `ln Gamma(x)` for `x > 0` (Lanczos approximation, 14 terms).
#[allow(clippy::excessive_precision)]
pub fn ln_gamma(x: f64) -> f64 {
    const COF: [f64; 14] = [
        57.156_235_665_862_923_5,
        -59.597_960_355_475_491_2,
        14.136_097_974_741_747_1,
        -0.491_913_816_097_620_199,
        0.339_946_499_848_118_887e-4,
        0.465_236_289_270_485_756e-4,
        -0.983_744_753_048_795_646e-4,
        0.158_088_703_224_912_494e-3,
        -0.210_264_441_724_104_883e-3,
        0.217_439_618_115_212_643e-3,
        -0.164_318_106_536_763_890e-3,
        0.844_182_239_838_527_433e-4,
        -0.261_908_384_015_814_087e-4,
        0.368_991_826_595_316_234e-5,
    ];
    let mut y = x;
    let tmp = x + 5.242_187_5;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let guard = |v: f64| if v.abs() < TINY { TINY } else { v };

    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rank_examples() {
        assert_eq!(ranks_average_ties(&[10.0, 20.0, 30.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(ranks_average_ties(&[5.0, 5.0]), vec![1.5, 1.5]);
        assert_eq!(
            ranks_average_ties(&[3.0, 1.0, 4.0, 1.0, 5.0]),
            vec![3.0, 1.5, 4.0, 1.5, 5.0]
        );
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson(&x, &up).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson(&x, &down).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(pearson(&x, &[1.0; 4]), Err(StatsError::ZeroVariance));
        assert!(matches!(
            pearson(&x[..2], &x[..2]),
            Err(StatsError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn spearman_monotone() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0).collect();
        let r = spearman(&x, &y).unwrap();
        assert_eq!((r.rho, r.p_value, r.df), (1.0, 0.0, 8));
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert_eq!(spearman(&x, &rev).unwrap().rho, -1.0);
    }

    #[test]
    fn exact_permutation_p_value() {
        // n = 4, perfectly monotone: only the identity and the reversal
        // reach |rho| = 1, so p = 2/24.
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = spearman_with(&x, &x, PValueMethod::ExactPermutation).unwrap();
        assert_abs_diff_eq!(r.p_value, 2.0 / 24.0, epsilon = 1e-15);
        let big: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(spearman_with(&big, &big, PValueMethod::ExactPermutation).is_err());
    }

    #[test]
    fn partial_recursion_identities() {
        let r = vec![vec![1.0, 0.5, 0.5], vec![0.5, 1.0, 0.5], vec![0.5, 0.5, 1.0]];
        assert_abs_diff_eq!(partial_from_matrix(&r, 0, 1, &[2]).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let r = vec![vec![1.0, 0.3, 0.0], vec![0.3, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(partial_from_matrix(&r, 0, 1, &[2]).unwrap(), 0.3);
    }

    #[test]
    fn partial_rejects_bad_covariates() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 7.0) % 10.0).collect();
        let none: [Vec<f64>; 0] = [];
        assert_eq!(partial_spearman(&x, &y, &none), Err(StatsError::CovariateCount(0)));
        // y identical to z leaves nothing to correlate once z is removed.
        assert_eq!(partial_spearman(&x, &y, &[&y[..]]), Err(StatsError::Collinear));
        assert!(matches!(
            partial_spearman(&x[..5], &y[..5], &[x[..5].to_vec()]),
            Err(StatsError::TooFewSamples { needed: 6, got: 5 })
        ));
    }

    #[test]
    fn ols_recovers_lines() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let fit = ols_fit(&[&x[..]], &y).unwrap();
        assert_abs_diff_eq!(fit.intercept, -2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficients[0], 3.0, epsilon = 1e-10);
        let yhat = predict(&fit, &[&[0.0, 1.0, 2.0][..]]).unwrap();
        for (a, b) in yhat.iter().zip([-2.0, 1.0, 4.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }

        let flat = ols_fit(&[&x[..]], &[2.5; 5]).unwrap();
        assert_abs_diff_eq!(flat.coefficients[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flat.intercept, 2.5, epsilon = 1e-12);
    }

    #[test]
    fn ols_errors() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let doubled: Vec<f64> = x.iter().map(|v| v * 2.0).collect();
        assert_eq!(
            ols_fit(&[&x[..], &doubled[..]], &[1.0, 0.0, 2.0, 5.0]),
            Err(StatsError::Singular)
        );
        assert_eq!(ols_fit(&[&[1.0; 4][..]], &x), Err(StatsError::Singular));
        assert!(matches!(
            ols_fit(&[&x[..2]], &x[..2]),
            Err(StatsError::TooFewSamples { .. })
        ));
        let fit = ols_fit(&[&x[..]], &x).unwrap();
        assert_eq!(
            predict(&fit, &[&x[..], &x[..]]),
            Err(StatsError::ArityMismatch { expected: 1, found: 2 })
        );
    }

    #[test]
    fn zero_coefficient_prediction_is_constant() {
        let fit = RegressionFit {
            intercept: 0.7,
            coefficients: vec![0.0, 0.0],
            feature_names: vec![],
        };
        let out = predict(&fit, &[vec![1.0, 5.0, 9.0], vec![3.0, 2.0, 1.0]]).unwrap();
        assert_eq!(out, vec![0.7; 3]);
    }

    #[test]
    fn explained_variance_examples() {
        let y = [1.0, 4.0, 2.0, 8.0];
        assert_eq!(explained_variance(&y, &y).unwrap(), 1.0);
        assert_abs_diff_eq!(explained_variance(&y, &[mean(&y); 4]).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(explained_variance(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), -3.0);
        assert_eq!(
            explained_variance(&[1.0, 1.0], &[1.0, 0.0]),
            Err(StatsError::ZeroVariance)
        );
    }

    #[test]
    fn fold_layout() {
        let folds = kfold_indices(10, 3, false, 0).unwrap();
        assert_eq!(folds, vec![vec![0, 1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        let shuffled = kfold_indices(10, 3, true, 4).unwrap();
        let mut all: Vec<usize> = shuffled.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(shuffled, kfold_indices(10, 3, true, 4).unwrap());
        assert_eq!(kfold_indices(5, 3, false, 0), Err(StatsError::Folds { n: 5, k: 3 }));
    }

    #[test]
    fn cv_on_noiseless_data() {
        let x: Vec<f64> = (0..12).map(|i| (i * i % 7) as f64 + i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v + 1.0).collect();
        for seed in 0..5 {
            let s = kfold_cv_explained_variance(&[&x[..]], &y, 3, true, seed).unwrap();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(
            kfold_cv_explained_variance(&[&x[..]], &y, 3, false, 0).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn logs() {
        assert_eq!(log_series(&[1.0]).unwrap(), vec![0.0]);
        assert_abs_diff_eq!(log_series(&[std::f64::consts::E]).unwrap()[0], 1.0, epsilon = 1e-15);
        let l = log_series(&[10.0, 100.0]).unwrap();
        assert_abs_diff_eq!(l[1] - l[0], 10f64.ln(), epsilon = 1e-14);
        assert_eq!(
            log_series(&[1.0, 0.0]),
            Err(StatsError::NonPositive { index: 1, value: 0.0 })
        );
    }

    #[test]
    fn special_functions() {
        assert_abs_diff_eq!(ln_gamma(0.5), 0.5 * std::f64::consts::PI.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(ln_gamma(10.0), 362_880f64.ln(), epsilon = 1e-12);
        // I_x(1, 1) = x; I_x(a, b) = 1 - I_{1-x}(b, a)
        assert_abs_diff_eq!(regularized_incomplete_beta(1.0, 1.0, 0.3), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(
            regularized_incomplete_beta(2.5, 0.5, 0.7),
            1.0 - regularized_incomplete_beta(0.5, 2.5, 0.3),
            epsilon = 1e-14
        );
        // t with 1 df is Cauchy: P(|T| >= 1) = 1/2.
        assert_abs_diff_eq!(student_t_two_tailed(1.0, 1.0), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn series_validation() {
        assert!(Series::new("x", vec![]).is_err());
        assert_eq!(
            Series::new("x", vec![1.0, f64::NAN]),
            Err(StatsError::NonFinite { index: 1 })
        );
        let s = Series::new("x", vec![1.0, 2.0]).unwrap();
        assert_eq!(s.len(), 2);
    }
}
