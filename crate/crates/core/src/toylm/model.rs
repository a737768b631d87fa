use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoding::{DistributionProvider, LogProbVector, TextCodec};
use crate::error::{Error, Result};
use crate::features::tokenize;

pub const BOS: u32 = 0;
pub const EOS: u32 = 1;
pub const UNK: u32 = 2;
pub const SPECIAL_TOKENS: [&str; 3] = ["<s>", "</s>", "<unk>"];

/// Word-level vocabulary: the special tokens, then the training words in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        if words.len() < SPECIAL_TOKENS.len() || words[..3] != SPECIAL_TOKENS {
            return Err(Error::InvalidArgument(
                "vocabulary must start with <s>, </s>, <unk>".into(),
            ));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(Self { words, index })
    }

    pub fn build<'a>(docs: impl IntoIterator<Item = &'a [String]>) -> Self {
        let mut seen = BTreeSet::new();
        for doc in docs {
            for w in doc {
                if !SPECIAL_TOKENS.contains(&w.as_str()) {
                    seen.insert(w.clone());
                }
            }
        }
        let words = SPECIAL_TOKENS
            .iter()
            .map(|s| s.to_string())
            .chain(seen)
            .collect();
        Self::from_words(words).expect("specials first and no duplicates")
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, word: &str) -> u32 {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NGramConfig {
    pub order: usize,
    /// Additive pseudo-count at the context that is finally used.
    pub smoothing: f64,
    /// Multiplier applied once per dropped context token.
    pub backoff: f64,
}

impl Default for NGramConfig {
    fn default() -> Self {
        Self {
            order: 3,
            smoothing: 0.01,
            backoff: 0.4,
        }
    }
}

/// How an "instruct" surrogate was derived from a base model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sharpening {
    None,
    /// Next-token distributions raised to `1/tau` and renormalized.
    Temperature { tau: f64 },
    /// Counts re-estimated from a seeded subset of the training documents.
    SubsetRetrain { fraction: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct ContextCounts {
    pub total: u64,
    /// Ascending by token id.
    pub next: Vec<(u32, u64)>,
}

/// Word-level n-gram model with add-α smoothing at the longest seen context
/// and stupid backoff below it.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramLM {
    pub(crate) config: NGramConfig,
    pub(crate) vocab: Vocab,
    pub(crate) sharpening: Sharpening,
    /// Keyed by context; contexts of every length `0..order` share the map.
    pub(crate) contexts: BTreeMap<Vec<u32>, ContextCounts>,
}

impl NGramLM {
    pub fn train(docs: &[Vec<String>], config: NGramConfig) -> Result<Self> {
        let vocab = Vocab::build(docs.iter().map(Vec::as_slice));
        Self::train_with_vocab(docs, vocab, config)
    }

    /// Counts every context of length `0..order` over each document padded
    /// with `order - 1` start tokens and one end token.
    pub fn train_with_vocab(docs: &[Vec<String>], vocab: Vocab, config: NGramConfig) -> Result<Self> {
        validate_config(&config)?;
        if docs.iter().all(|d| d.is_empty()) {
            return Err(Error::InvalidArgument("cannot train on an empty corpus".into()));
        }
        let mut raw: BTreeMap<Vec<u32>, BTreeMap<u32, u64>> = BTreeMap::new();
        let pad = config.order - 1;
        for doc in docs {
            let mut ids = vec![BOS; pad];
            ids.extend(doc.iter().map(|w| vocab.id(w)));
            ids.push(EOS);
            for t in pad..ids.len() {
                for len in 0..config.order {
                    *raw.entry(ids[t - len..t].to_vec())
                        .or_default()
                        .entry(ids[t])
                        .or_default() += 1;
                }
            }
        }
        let contexts = raw
            .into_iter()
            .map(|(ctx, next)| {
                let total = next.values().sum();
                (
                    ctx,
                    ContextCounts {
                        total,
                        next: next.into_iter().collect(),
                    },
                )
            })
            .collect();
        Ok(Self {
            config,
            vocab,
            sharpening: Sharpening::None,
            contexts,
        })
    }

    pub fn config(&self) -> NGramConfig {
        self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn sharpening(&self) -> Sharpening {
        self.sharpening
    }

    pub fn context_count(&self) -> usize {
        self.contexts.len()
    }

    /// The same counts with every next-token distribution raised to `1/tau`.
    /// Applying it twice multiplies the temperatures.
    pub fn sharpen(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidArgument(format!("sharpening temperature {tau} outside (0, 1)")));
        }
        let tau = match self.sharpening {
            Sharpening::None => tau,
            Sharpening::Temperature { tau: t } => t * tau,
            Sharpening::SubsetRetrain { .. } => {
                return Err(Error::InvalidArgument(
                    "cannot temperature-sharpen a subset-retrained model".into(),
                ))
            }
        };
        Ok(Self {
            sharpening: Sharpening::Temperature { tau },
            ..self.clone()
        })
    }

    /// Retrains on a seeded `fraction` of `docs`, keeping this model's
    /// vocabulary and configuration.
    pub fn subset_retrain(&self, docs: &[Vec<String>], fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidArgument(format!("subset fraction {fraction} outside (0, 1)")));
        }
        let mut idx: Vec<usize> = (0..docs.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let keep = ((docs.len() as f64 * fraction).ceil() as usize).max(1).min(docs.len());
        idx.truncate(keep);
        idx.sort_unstable();
        let subset: Vec<Vec<String>> = idx.into_iter().map(|i| docs[i].clone()).collect();
        let mut m = Self::train_with_vocab(&subset, self.vocab.clone(), self.config)?;
        m.sharpening = Sharpening::SubsetRetrain { fraction, seed };
        Ok(m)
    }

    fn exponent(&self) -> f64 {
        match self.sharpening {
            Sharpening::Temperature { tau } => 1.0 / tau,
            _ => 1.0,
        }
    }

    /// The last `order - 1` tokens of `context`, left-padded with start
    /// tokens.
    fn history(&self, context: &[u32]) -> Vec<u32> {
        let pad = self.config.order - 1;
        let mut h = vec![BOS; pad.saturating_sub(context.len())];
        h.extend_from_slice(&context[context.len().saturating_sub(pad)..]);
        h
    }

    /// Normalized next-token log-probabilities.
    pub fn next_log_probs(&self, context: &[u32]) -> Result<LogProbVector> {
        let v = self.vocab.len();
        if let Some(&id) = context.iter().find(|&&id| id as usize >= v) {
            return Err(Error::UnknownToken { id, vocab_size: v });
        }
        let hist = self.history(context);
        let (dropped, counts) = (0..hist.len() + 1)
            .find_map(|d| self.contexts.get(&hist[d..]).map(|c| (d, c)))
            .ok_or_else(|| Error::InvalidArgument("model has no unigram counts".into()))?;
        let alpha = self.config.smoothing;
        let log_z = (counts.total as f64 + alpha * v as f64).ln() - dropped as f64 * self.config.backoff.ln();
        let mut scores = vec![alpha.ln() - log_z; v];
        for &(id, c) in &counts.next {
            scores[id as usize] = (c as f64 + alpha).ln() - log_z;
        }
        let e = self.exponent();
        if e != 1.0 {
            for s in &mut scores {
                *s *= e;
            }
        }
        Ok(LogProbVector::from_logits(scores)?.log_softmax())
    }

    /// Entropy (nats) of the next-token distribution after `context`.
    pub fn conditional_entropy(&self, context: &[u32]) -> Result<f64> {
        Ok(self.next_log_probs(context)?.entropy())
    }

    /// Every context of full length `order - 1` seen in training.
    pub fn full_contexts(&self) -> impl Iterator<Item = &[u32]> {
        let n = self.config.order - 1;
        self.contexts.keys().filter(move |k| k.len() == n).map(Vec::as_slice)
    }

    pub fn stop_tokens(&self) -> Vec<u32> {
        vec![EOS]
    }
}

pub(crate) fn validate_config(c: &NGramConfig) -> Result<()> {
    if c.order == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    if !(c.smoothing > 0.0 && c.smoothing.is_finite()) {
        return Err(Error::InvalidArgument(format!("smoothing {} must be positive", c.smoothing)));
    }
    if !(c.backoff > 0.0 && c.backoff <= 1.0) {
        return Err(Error::InvalidArgument(format!("backoff {} outside (0, 1]", c.backoff)));
    }
    Ok(())
}

impl DistributionProvider for NGramLM {
    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn next_logprobs(&self, context: &[u32]) -> Result<LogProbVector> {
        self.next_log_probs(context)
    }
}

impl TextCodec for NGramLM {
    /// Same tokenization as the diversity features; unseen words map to
    /// `<unk>`.
    fn encode(&self, text: &str) -> Result<Vec<u32>> {
        Ok(tokenize(text).iter().map(|w| self.vocab.id(w)).collect())
    }

    /// Space-joined words with the special tokens dropped.
    fn decode(&self, ids: &[u32]) -> Result<String> {
        let mut words = Vec::with_capacity(ids.len());
        for &id in ids {
            match self.vocab.word(id) {
                None => {
                    return Err(Error::UnknownToken {
                        id,
                        vocab_size: self.vocab.len(),
                    })
                }
                Some(_) if id <= UNK => {}
                Some(w) => words.push(w),
            }
        }
        Ok(words.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts.iter().map(|t| tokenize(t)).collect()
    }

    #[test]
    fn vocab_layout() {
        let v = Vocab::build(docs(&["b a", "c a"]).iter().map(Vec::as_slice));
        assert_eq!(v.words(), &["<s>", "</s>", "<unk>", "a", "b", "c"]);
        assert_eq!(v.id("zzz"), UNK);
        assert!(Vocab::from_words(vec!["a".into()]).is_err());
    }

    #[test]
    fn hand_computed_trigram_probability() {
        // "a b c" twice, "a b d" once: P(c | a b) = (2 + α) / (3 + α V).
        let lm = NGramLM::train(&docs(&["a b c", "a b c", "a b d"]), NGramConfig::default()).unwrap();
        let v = lm.vocab().len() as f64;
        let ctx = [lm.vocab().id("a"), lm.vocab().id("b")];
        let lp = lm.next_log_probs(&ctx).unwrap();
        let c = lm.vocab().id("c") as usize;
        assert!((lp.values()[c].exp() - 2.01 / (3.0 + 0.01 * v)).abs() < 1e-12);
    }

    #[test]
    fn bigram_hand_count() {
        let cfg = NGramConfig {
            order: 2,
            ..Default::default()
        };
        let lm = NGramLM::train(&docs(&["a b a b"]), cfg).unwrap();
        let (a, b) = (lm.vocab().id("a"), lm.vocab().id("b"));
        let v = lm.vocab().len() as f64;
        let p = lm.next_log_probs(&[a]).unwrap().values()[b as usize].exp();
        assert!((p - 2.01 / (2.0 + 0.01 * v)).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(NGramLM::train(&[], NGramConfig::default()).is_err());
        assert!(NGramLM::train(&[vec![]], NGramConfig::default()).is_err());
    }

    #[test]
    fn power_sharpening_hand_case() {
        // Context "x" is followed by "p" four times and "q" once.
        let d = docs(&["x p", "x p", "x p", "x p", "x q"]);
        let cfg = NGramConfig {
            order: 2,
            smoothing: 1e-9,
            ..Default::default()
        };
        let lm = NGramLM::train(&d, cfg).unwrap();
        let s = lm.sharpen(0.5).unwrap();
        let x = lm.vocab().id("x");
        let probs = s.next_log_probs(&[x]).unwrap().probabilities();
        assert!((probs[lm.vocab().id("p") as usize] - 0.9412).abs() < 1e-4);
        assert!((probs[lm.vocab().id("q") as usize] - 0.0588).abs() < 1e-4);
        let near = lm.sharpen(1.0 - 1e-9).unwrap().next_log_probs(&[x]).unwrap().probabilities();
        for (a, b) in near.iter().zip(lm.next_log_probs(&[x]).unwrap().probabilities()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(lm.sharpen(1.0).is_err() && lm.sharpen(0.0).is_err());
    }

    #[test]
    fn backs_off_to_shorter_context() {
        let lm = NGramLM::train(&docs(&["a b c", "x b d"]), NGramConfig::default()).unwrap();
        let id = |w| lm.vocab().id(w);
        // (c, b) never seen as a trigram context; (b) has counts c:1 d:1.
        let lp = lm.next_log_probs(&[id("c"), id("b")]).unwrap();
        let v = lm.vocab().len() as f64;
        let expected = 1.01 / (2.0 + 0.01 * v);
        assert!((lp.values()[id("d") as usize].exp() - expected).abs() < 1e-12);
    }

    #[test]
    fn distributions_sum_to_one_and_reject_unknown_ids() {
        let lm = NGramLM::train(&docs(&["the cat sat", "the dog ran"]), NGramConfig::default()).unwrap();
        for ctx in [vec![], vec![3], vec![0, 0], vec![5, 4, 3]] {
            let s: f64 = lm.next_log_probs(&ctx).unwrap().probabilities().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(lm.next_log_probs(&[99]).is_err());
    }

    #[test]
    fn sharpening_lowers_entropy_and_composes() {
        let lm = NGramLM::train(&docs(&["a b c", "a b d", "a b c"]), NGramConfig::default()).unwrap();
        let ctx = [lm.vocab().id("a"), lm.vocab().id("b")];
        let s = lm.sharpen(0.6).unwrap();
        assert!(s.conditional_entropy(&ctx).unwrap() < lm.conditional_entropy(&ctx).unwrap());
        let twice = lm.sharpen(0.5).unwrap().sharpen(0.5).unwrap();
        assert_eq!(twice.sharpening(), Sharpening::Temperature { tau: 0.25 });
    }

    #[test]
    fn subset_retrain_is_seeded() {
        let d = docs(&["a b", "c d", "e f", "g h", "i j", "k l"]);
        let lm = NGramLM::train(&d, NGramConfig::default()).unwrap();
        let a = lm.subset_retrain(&d, 0.5, 1).unwrap();
        assert_eq!(a, lm.subset_retrain(&d, 0.5, 1).unwrap());
        assert_eq!(a.vocab(), lm.vocab());
        assert!(a.context_count() < lm.context_count());
    }

    #[test]
    fn codec_round_trip() {
        let lm = NGramLM::train(&docs(&["The cat sat."]), NGramConfig::default()).unwrap();
        let ids = lm.encode("the CAT, flew").unwrap();
        assert_eq!(ids[2], UNK);
        assert_eq!(lm.decode(&ids).unwrap(), "the cat");
        assert!(lm.decode(&[1000]).is_err());
    }
}
