use divergauge_core::decoding::{
    conformative_mix, generate_sequence, restrict_to_valid, sample_token, step_distribution, truncate_nucleus,
    truncate_topk, DecodeConfig, DistributionProvider, LogProbVector, Truncation, ValidSet,
};
use divergauge_core::Result;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn dist(p: &[f64]) -> LogProbVector {
    LogProbVector::from_log_probs(p.iter().map(|x| x.ln()).collect()).unwrap()
}

fn logits(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-8.0f64..8.0, n)
}

#[test]
fn nucleus_hand_case() {
    let v = truncate_nucleus(&dist(&[0.5, 0.3, 0.15, 0.05]), 0.9).unwrap();
    assert_eq!(v.ids(), &[0, 1, 2]);
    assert!((v.mass() - 0.95).abs() < 1e-12);
    let one_hot = LogProbVector::from_log_probs(vec![f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY]).unwrap();
    assert_eq!(truncate_nucleus(&one_hot, 0.3).unwrap().ids(), &[1]);
    assert_eq!(truncate_nucleus(&one_hot, 1.0).unwrap().ids(), &[1]);
}

#[test]
fn topk_tie_goes_to_lower_id() {
    assert_eq!(truncate_topk(&dist(&[0.4, 0.4, 0.2]), 1).unwrap().ids(), &[0]);
    assert_eq!(truncate_topk(&dist(&[0.5, 0.3, 0.2]), 9).unwrap().ids(), &[0, 1, 2]);
}

#[test]
fn geometric_mix_hand_case() {
    let instruct = dist(&[0.7, 0.2, 0.1]);
    let base = dist(&[0.2, 0.2, 0.6]);
    let valid = ValidSet::new(vec![0, 1], 0.9).unwrap();
    let p = conformative_mix(&instruct, &base, &valid, 0.5).unwrap().probabilities();
    let (a, b) = ((0.7f64 * 0.2).sqrt(), (0.2f64 * 0.2).sqrt());
    assert!((p[0] - a / (a + b)).abs() < 1e-12);
    // Exact value is 0.65169...; the published figure is rounded.
    assert!((p[0] - 0.6518).abs() < 2e-4 && (p[1] - 0.3482).abs() < 2e-4);
    assert_eq!(p[2], 0.0);
}

#[test]
fn mix_rejects_bad_inputs() {
    let a = dist(&[0.5, 0.5]);
    let b = dist(&[0.2, 0.3, 0.5]);
    assert!(conformative_mix(&a, &b, &ValidSet::all(2), 0.5).is_err());
    assert!(conformative_mix(&a, &a, &ValidSet::all(2), 1.5).is_err());
    assert!(ValidSet::new(vec![], 1.0).is_err());
}

#[test]
fn sampler_frequencies() {
    let d = dist(&[0.25, 0.75]);
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let n = 100_000;
    let ones = (0..n).filter(|_| sample_token(&d, &mut rng).unwrap() == 1).count();
    assert!((ones as f64 / n as f64 - 0.75).abs() < 0.01);
}

#[test]
fn sampler_needs_normalized_input() {
    let raw = LogProbVector::from_logits(vec![1.0, 2.0]).unwrap();
    assert!(sample_token(&raw, &mut ChaCha20Rng::seed_from_u64(0)).is_err());
}

/// Context-dependent toy provider: logits are a hash of the last token.
struct Table {
    vocab: usize,
    shift: f64,
}

impl DistributionProvider for Table {
    fn vocab_size(&self) -> usize {
        self.vocab
    }
    fn next_logprobs(&self, context: &[u32]) -> Result<LogProbVector> {
        let last = context.last().copied().unwrap_or(0) as f64;
        LogProbVector::from_logits(
            (0..self.vocab)
                .map(|i| ((i as f64 + 1.0) * (last + 1.7) * self.shift).sin() * 3.0)
                .collect(),
        )
    }
}

#[test]
fn gamma_one_ignores_base() {
    let instruct = Table { vocab: 12, shift: 0.9 };
    let base = Table { vocab: 12, shift: 0.3 };
    for seed in 0..20 {
        let cfg = DecodeConfig {
            gamma: 1.0,
            seed,
            max_tokens: 40,
            ..DecodeConfig::default()
        };
        let with = generate_sequence(&instruct, Some(&base), &[3], &[0], &cfg).unwrap();
        let without = generate_sequence(&instruct, None, &[3], &[0], &cfg).unwrap();
        assert_eq!(with.tokens, without.tokens);
    }
}

#[test]
fn zero_budget_and_reproducibility() {
    let m = Table { vocab: 9, shift: 0.5 };
    let cfg = DecodeConfig {
        max_tokens: 0,
        ..DecodeConfig::default()
    };
    assert!(generate_sequence(&m, Some(&m), &[1], &[], &cfg).unwrap().tokens.is_empty());
    let cfg = DecodeConfig {
        seed: 99,
        max_tokens: 60,
        ..DecodeConfig::default()
    };
    let a = generate_sequence(&m, Some(&m), &[1], &[], &cfg).unwrap();
    let b = generate_sequence(&m, Some(&m), &[1], &[], &cfg).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn nucleus_grows_with_p(l in logits(1..=30), p1 in 0.01f64..1.0, p2 in 0.01f64..1.0) {
        let d = LogProbVector::from_logits(l).unwrap().log_softmax();
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let a = truncate_nucleus(&d, lo).unwrap();
        let b = truncate_nucleus(&d, hi).unwrap();
        prop_assert!(a.is_subset_of(&b));
        prop_assert!(!a.is_empty());
        prop_assert!(a.mass() >= lo - 1e-9);
        // Every kept token is at least as likely as every dropped one.
        let v = d.values();
        let min_kept = a.ids().iter().map(|&i| v[i as usize]).fold(f64::INFINITY, f64::min);
        for i in 0..v.len() as u32 {
            if !a.contains(i) {
                prop_assert!(v[i as usize] <= min_kept);
            }
        }
    }

    #[test]
    fn mixture_is_normalized_on_valid(a in logits(2..=25), shift in -5.0f64..5.0, gamma in 0.0f64..=1.0, p in 0.05f64..1.0) {
        let b: Vec<f64> = a.iter().rev().map(|x| x * 0.5 + shift).collect();
        let ia = LogProbVector::from_logits(a).unwrap();
        let ib = LogProbVector::from_logits(b).unwrap();
        let valid = truncate_nucleus(&ia.log_softmax(), p).unwrap();
        let m = conformative_mix(&ia, &ib, &valid, gamma).unwrap();
        let probs = m.probabilities();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (i, q) in probs.iter().enumerate() {
            if !valid.contains(i as u32) {
                prop_assert_eq!(*q, 0.0);
            }
        }
    }

    #[test]
    fn logits_and_log_probs_mix_alike(a in logits(2..=25), b0 in logits(2..=25), ca in -50.0f64..50.0, cb in -50.0f64..50.0, gamma in 0.0f64..=1.0) {
        let n = a.len().min(b0.len());
        let (a, b) = (&a[..n], &b0[..n]);
        let raw_a = LogProbVector::from_logits(a.iter().map(|x| x + ca).collect()).unwrap();
        let raw_b = LogProbVector::from_logits(b.iter().map(|x| x + cb).collect()).unwrap();
        let lp_a = LogProbVector::from_logits(a.to_vec()).unwrap().log_softmax();
        let lp_b = LogProbVector::from_logits(b.to_vec()).unwrap().log_softmax();
        let valid = truncate_nucleus(&lp_a, 0.9).unwrap();
        let x = conformative_mix(&raw_a, &raw_b, &valid, gamma).unwrap().probabilities();
        let y = conformative_mix(&lp_a, &lp_b, &valid, gamma).unwrap().probabilities();
        for (u, v) in x.iter().zip(&y) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn gamma_endpoints(a in logits(2..=20), b0 in logits(2..=20), p in 0.05f64..1.0) {
        let n = a.len().min(b0.len());
        let ia = LogProbVector::from_logits(a[..n].to_vec()).unwrap().log_softmax();
        let ib = LogProbVector::from_logits(b0[..n].to_vec()).unwrap().log_softmax();
        let valid = truncate_nucleus(&ia, p).unwrap();
        let one = conformative_mix(&ia, &ib, &valid, 1.0).unwrap().probabilities();
        let zero = conformative_mix(&ia, &ib, &valid, 0.0).unwrap().probabilities();
        let ri = restrict_to_valid(&ia, &valid).unwrap().probabilities();
        let rb = restrict_to_valid(&ib, &valid).unwrap().probabilities();
        for i in 0..n {
            prop_assert!((one[i] - ri[i]).abs() < 1e-12);
            prop_assert!((zero[i] - rb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn base_minus_infinity_is_harmless_at_gamma_one(a in logits(3..=12)) {
        let ia = LogProbVector::from_logits(a.clone()).unwrap();
        let mut b = vec![0.0; a.len()];
        b[0] = f64::NEG_INFINITY;
        let ib = LogProbVector::from_logits(b).unwrap();
        let cfg = DecodeConfig { gamma: 1.0, truncation: Truncation::Nucleus { p: 1.0 }, ..DecodeConfig::default() };
        let (d, _) = step_distribution(&ia, Some(&ib), &cfg).unwrap();
        prop_assert!(d.values().iter().all(|v| !v.is_nan()));
    }
}
