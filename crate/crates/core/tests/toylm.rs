use divergauge_core::decoding::DistributionProvider;
use divergauge_core::toylm::{fixture_models, read_ngram, training_documents, write_ngram, FixtureSpec, NGramConfig, NGramLM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::OnceLock;

fn fixture() -> &'static (NGramLM, NGramLM) {
    static F: OnceLock<(NGramLM, NGramLM)> = OnceLock::new();
    F.get_or_init(|| fixture_models(&FixtureSpec::default()).unwrap())
}

#[test]
fn fixture_corpus_is_large_enough() {
    let tokens: usize = training_documents(&FixtureSpec::default()).iter().map(Vec::len).sum();
    assert!(tokens >= 200_000);
    assert_eq!(fixture().0.config().order, 3);
}

#[test]
fn random_contexts_are_normalized() {
    let (base, instruct) = fixture();
    let v = base.vocab_size() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let len = rng.random_range(0..5);
        let ctx: Vec<u32> = (0..len).map(|_| rng.random_range(0..v)).collect();
        for m in [base, instruct] {
            let s: f64 = m.next_log_probs(&ctx).unwrap().probabilities().iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn sharpening_never_raises_entropy() {
    let (base, instruct) = fixture();
    for ctx in base.full_contexts().take(2000) {
        assert!(instruct.conditional_entropy(ctx).unwrap() <= base.conditional_entropy(ctx).unwrap() + 1e-12);
    }
}

#[test]
fn most_likely_token_is_corpus_argmax() {
    let docs = training_documents(&FixtureSpec {
        corpus_tokens: 20_000,
        ..FixtureSpec::default()
    });
    let lm = NGramLM::train(&docs, NGramConfig::default()).unwrap();
    let mut table: BTreeMap<(u32, u32), BTreeMap<u32, u64>> = BTreeMap::new();
    for d in &docs {
        let mut ids = vec![0, 0];
        ids.extend(d.iter().map(|w| lm.vocab().id(w)));
        ids.push(1);
        for w in ids.windows(3) {
            *table.entry((w[0], w[1])).or_default().entry(w[2]).or_default() += 1;
        }
    }
    for ((a, b), next) in table.iter().take(500) {
        let best = next.iter().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0))).unwrap();
        let probs = lm.next_log_probs(&[*a, *b]).unwrap().probabilities();
        let argmax = (0..probs.len()).max_by(|&i, &j| probs[i].total_cmp(&probs[j]).then(j.cmp(&i))).unwrap();
        assert_eq!(argmax as u32, *best.0);
    }
}

#[test]
fn unigram_model_is_smoothed_frequency() {
    let docs: Vec<Vec<String>> = vec!["x y x".split(' ').map(String::from).collect()];
    let cfg = NGramConfig {
        order: 1,
        ..NGramConfig::default()
    };
    let lm = NGramLM::train(&docs, cfg).unwrap();
    let v = lm.vocab().len() as f64;
    // Four events: x, y, x and the end token.
    let p = lm.next_log_probs(&[]).unwrap().probabilities();
    assert!((p[lm.vocab().id("x") as usize] - 2.01 / (4.0 + 0.01 * v)).abs() < 1e-12);
}

#[test]
fn fixture_round_trips_through_text() {
    let (_, instruct) = fixture();
    let mut buf = Vec::new();
    write_ngram(instruct, &mut buf).unwrap();
    let back = read_ngram(&buf[..]).unwrap();
    assert_eq!(&back, instruct);
    let mut again = Vec::new();
    write_ngram(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}
