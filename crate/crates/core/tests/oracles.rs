use approx::assert_abs_diff_eq;
use isoscope::rng::SeededRng;
use isoscope::stats::{
    kfold_cv_explained_variance, ln_gamma, partial_spearman, regularized_incomplete_beta, spearman, spearman_with,
    PValueMethod,
};
use itertools::Itertools;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

fn gaussian(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.next_gaussian()).collect()
}

#[test]
fn incomplete_beta_matches_statrs() {
    for a in [0.5, 1.0, 2.5, 10.0, 44.0] {
        for b in [0.5, 1.0, 3.0, 20.0] {
            for x in [0.0, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0] {
                assert_abs_diff_eq!(regularized_incomplete_beta(a, b, x), beta_reg(a, b, x), epsilon = 1e-12);
            }
        }
    }
    for x in [0.1, 0.5, 1.0, 3.7, 50.0, 170.5] {
        assert_abs_diff_eq!(ln_gamma(x), statrs_ln_gamma(x), epsilon = 1e-10 * x.max(1.0));
    }
}

#[test]
fn exact_p_value_matches_enumeration() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
    let observed = spearman(&x, &y).unwrap().rho;
    let (mut extreme, mut total) = (0, 0);
    for perm in y.iter().copied().permutations(y.len()) {
        total += 1;
        if spearman(&x, &perm).unwrap().rho.abs() >= observed.abs() - 1e-12 {
            extreme += 1;
        }
    }
    let exact = spearman_with(&x, &y, PValueMethod::ExactPermutation).unwrap();
    assert_abs_diff_eq!(exact.p_value, extreme as f64 / total as f64, epsilon = 1e-12);
}

#[test]
fn partial_with_independent_covariate_tracks_plain() {
    let mut rng = SeededRng::new(5);
    let x = gaussian(&mut rng, 200);
    let y: Vec<f64> = x.iter().map(|v| v + rng.next_gaussian()).collect();
    let z = gaussian(&mut rng, 200);
    let plain = spearman(&x, &y).unwrap().rho;
    let partial = partial_spearman(&x, &y, &[&z[..]]).unwrap();
    assert!((plain - partial.rho).abs() < 0.05);
    assert_eq!(partial.df, 197);
}

#[test]
fn partial_removes_shared_driver() {
    let mut rng = SeededRng::new(6);
    let z = gaussian(&mut rng, 300);
    let x: Vec<f64> = z.iter().map(|v| v + 0.3 * rng.next_gaussian()).collect();
    let y: Vec<f64> = z.iter().map(|v| v + 0.3 * rng.next_gaussian()).collect();
    assert!(spearman(&x, &y).unwrap().rho > 0.8);
    assert!(partial_spearman(&x, &y, &[&z[..]]).unwrap().rho.abs() < 0.15);
}

#[test]
fn cv_of_independent_features_is_not_positive_on_average() {
    let mut total = 0.0;
    for seed in 0..200 {
        let mut rng = SeededRng::new(1000 + seed);
        let x = gaussian(&mut rng, 24);
        let y = gaussian(&mut rng, 24);
        total += kfold_cv_explained_variance(&[&x[..]], &y, 3, true, seed).unwrap();
    }
    assert!(total / 200.0 <= 0.0);
}
