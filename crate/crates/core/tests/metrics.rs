use divergauge_core::features::{embedding_kernel, ngram_kernel, ngram_profile, tokenize, EmbeddingMatrix, SimilarityMatrix};
use divergauge_core::metrics::{
    improved_precision_recall, mauve_from_histograms, mauve_lite, paired_ttest_one_tailed, truncated_entropy,
    vendi_score, MauveConfig, TruncatedEntropyConfig,
};
use divergauge_core::numerics::{covariance_spectrum, knn_radii, sym_eigenvalues, PointSet, SymMatrix};
use divergauge_oracles::{brute_coverage, brute_knn_radii, char_poly_eigenvalues, student_t_upper_tail};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

#[test]
fn vendi_hand_values() {
    let half = SimilarityMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let expected = (-(0.75f64 * 0.75f64.ln()) - 0.25 * 0.25f64.ln()).exp();
    assert!((vendi_score(&half).unwrap().value - expected).abs() < 1e-12);
    assert!((expected - 1.7548).abs() < 1e-4);
    let ones = SimilarityMatrix::from_rows(&vec![vec![1.0; 4]; 4]).unwrap();
    assert!((vendi_score(&ones).unwrap().value - 1.0).abs() < 1e-12);
    let id = SimilarityMatrix::new(SymMatrix::identity(4)).unwrap();
    assert!((vendi_score(&id).unwrap().value - 4.0).abs() < 1e-12);
}

#[test]
fn kernel_hand_values() {
    let p: Vec<_> = ["a b", "a c"].iter().map(|t| ngram_profile(&tokenize(t), &[1, 2])).collect();
    assert!((ngram_kernel(&p).unwrap().get(0, 1) - 0.25).abs() < 1e-12);
    let e = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    assert!((embedding_kernel(&e).unwrap().get(0, 1) - 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(tokenize("The cat. The cat!"), ["the", "cat", "the", "cat"]);
}

#[test]
fn eigenvalues_match_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let mut a = random_rows(&mut rng, 5, 5);
        for i in 0..5 {
            for j in 0..i {
                a[i][j] = a[j][i];
            }
        }
        let ours = sym_eigenvalues(&SymMatrix::from_rows(&a).unwrap()).eigenvalues;
        let oracle = char_poly_eigenvalues(&a);
        assert_eq!(oracle.len(), 5);
        for (x, y) in ours.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-8, "{ours:?} vs {oracle:?}");
        }
    }
}

#[test]
fn gram_trick_matches_direct_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows = random_rows(&mut rng, 4, 100);
    let fast = covariance_spectrum(&PointSet::from_rows(&rows).unwrap()).unwrap().eigenvalues;
    let mean: Vec<f64> = (0..100).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / 4.0).collect();
    let cov = SymMatrix::from_upper(100, |i, j| {
        rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / 3.0
    })
    .unwrap();
    let direct = sym_eigenvalues(&cov).eigenvalues;
    for i in 0..3 {
        assert!((fast[i] - direct[i]).abs() < 1e-8);
    }
    assert!(fast[3].abs() < 1e-8);
}

#[test]
fn knn_and_coverage_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let g = random_rows(&mut rng, 60, 2);
        let r = random_rows(&mut rng, 60, 2);
        let radii = knn_radii(&PointSet::from_rows(&g).unwrap(), 3).unwrap();
        assert_eq!(radii, brute_knn_radii(&g, 3));
        let pr = improved_precision_recall(
            &EmbeddingMatrix::from_rows(&g).unwrap(),
            &EmbeddingMatrix::from_rows(&r).unwrap(),
            3,
        )
        .unwrap();
        assert_eq!(pr.precision, brute_coverage(&g, &r, 3));
        assert_eq!(pr.recall, brute_coverage(&r, &g, 3));
    }
}

#[test]
fn truncated_entropy_hand_case() {
    let e = EmbeddingMatrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
    let te = truncated_entropy(&e, TruncatedEntropyConfig::default()).unwrap().value;
    let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
    let expected = two_pi_e.ln() + 0.5 * (2.0f64.ln() + 1e-10f64.ln());
    assert!((te - expected).abs() < 1e-9);
}

#[test]
fn mauve_hand_histograms_and_separation() {
    let cfg = MauveConfig::default();
    assert!((mauve_from_histograms(&[0.5, 0.5], &[0.5, 0.5], &cfg).unwrap() - 1.0).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = random_rows(&mut rng, 80, 3);
    let far: Vec<Vec<f64>> = random_rows(&mut rng, 80, 3)
        .into_iter()
        .map(|r| r.into_iter().map(|x| x + 100.0).collect())
        .collect();
    let ea = EmbeddingMatrix::from_rows(&a).unwrap();
    assert!(mauve_lite(&ea, &ea, &cfg).unwrap().value >= 0.99);
    assert!(mauve_lite(&ea, &EmbeddingMatrix::from_rows(&far).unwrap(), &cfg).unwrap().value <= 0.05);
}

#[test]
fn ttest_hand_case() {
    let r = paired_ttest_one_tailed(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
    assert!((r.t - 12f64.sqrt()).abs() < 1e-12);
    assert_eq!(r.df, 2);
    assert!((r.p_value - 0.0371).abs() < 1e-4);
    let d = paired_ttest_one_tailed(&[1.0; 4], &[0.0; 4]).unwrap();
    assert!(d.degenerate && d.p_value == 0.0);
    let same = paired_ttest_one_tailed(&[1.0, 5.0, 2.0], &[1.0, 5.0, 2.0]).unwrap();
    assert_eq!((same.t, same.p_value), (0.0, 0.5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vendi_is_bounded(rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), 2..20)) {
        let e = EmbeddingMatrix::from_rows(&rows).unwrap();
        let vs = vendi_score(&embedding_kernel(&e).unwrap()).unwrap().value;
        prop_assert!(vs >= 1.0 - 1e-9 && vs <= rows.len() as f64 + 1e-9);
    }

    #[test]
    fn ttest_matches_quadrature(seed in 0u64..1000, n in 3usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.5)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = paired_ttest_one_tailed(&a, &b).unwrap();
        prop_assert!((r.p_value - student_t_upper_tail(r.t, r.df as f64)).abs() < 1e-6);
    }

    #[test]
    fn cosine_kernel_ignores_row_scale(rows in prop::collection::vec(prop::collection::vec(0.1f64..1.0, 3), 2..8), s in 0.1f64..10.0) {
        let e = EmbeddingMatrix::from_rows(&rows).unwrap();
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * s).collect()).collect();
        let k1 = embedding_kernel(&e).unwrap();
        let k2 = embedding_kernel(&EmbeddingMatrix::from_rows(&scaled).unwrap()).unwrap();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                prop_assert!((k1.get(i, j) - k2.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
