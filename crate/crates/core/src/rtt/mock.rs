use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{RttError, Translator};
use crate::textmetrics::{normalize_nfc, tokenize_13a};

/// Returns every input unchanged.
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn system_id(&self) -> &str {
        "identity"
    }

    fn translate_batch(
        &self,
        texts: &[String],
        _src_lang: &str,
        _tgt_lang: &str,
    ) -> Result<Vec<String>, RttError> {
        Ok(texts.to_vec())
    }
}

/// Reverses word order. An involution on single-spaced text, so a round
/// trip through it restores the input.
pub struct ReverseWordsTranslator;

impl Translator for ReverseWordsTranslator {
    fn system_id(&self) -> &str {
        "reverse-words"
    }

    fn translate_batch(
        &self,
        texts: &[String],
        _src_lang: &str,
        _tgt_lang: &str,
    ) -> Result<Vec<String>, RttError> {
        Ok(texts
            .iter()
            .map(|t| {
                let mut words: Vec<&str> = t.split_whitespace().collect();
                words.reverse();
                words.join(" ")
            })
            .collect())
    }
}

/// Damages text by deleting a seeded uniform draw of tokens, then hands the
/// result to a base translator. The draw for a sentence depends only on
/// (seed, text): it is a random permutation whose first floor(rate * n)
/// positions are dropped, so the drop sets at increasing rates are nested
/// and per-sentence damage is monotone in rate.
pub struct DropoutTranslator {
    base: Arc<dyn Translator>,
    rate: f64,
    seed: u64,
    id: String,
}

impl DropoutTranslator {
    pub fn new(base: Arc<dyn Translator>, rate: f64, seed: u64) -> Result<DropoutTranslator, RttError> {
        if !rate.is_finite() || !(0.0..=1.0).contains(&rate) {
            return Err(RttError::InvalidRate(rate));
        }
        let id = format!("dropout({})@{}", rate, base.system_id());
        Ok(DropoutTranslator { base, rate, seed, id })
    }

    /// Override the generated system id (config-named systems cache under
    /// their config name).
    pub fn with_id(mut self, id: &str) -> DropoutTranslator {
        self.id = id.to_string();
        self
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// The token-deletion step alone. Zero deletions leave the text
    /// untouched; otherwise survivors of the 13a token list are rejoined
    /// with single spaces.
    pub fn damage(&self, text: &str) -> String {
        let normalized = normalize_nfc(text);
        let tokens = tokenize_13a(&normalized);
        let n = tokens.len();
        let drop = ((self.rate * n as f64).floor() as usize).min(n);
        if drop == 0 {
            return text.to_string();
        }
        let mut hasher = Sha256::new();
        hasher.update(b"rtt-qe.dropout");
        hasher.update(self.seed.to_le_bytes());
        hasher.update(normalized.as_bytes());
        let mut rng = ChaCha8Rng::from_seed(hasher.finalize().into());
        let mut order: Vec<usize> = (0..n).collect();
        // Partial Fisher-Yates; position i's draw never depends on the drop
        // count, which is what makes drop sets nested across rates.
        for i in 0..drop {
            let j = rng.gen_range(i..n);
            order.swap(i, j);
        }
        let dropped: HashSet<usize> = order[..drop].iter().copied().collect();
        tokens
            .iter()
            .enumerate()
            .filter(|(i, _)| !dropped.contains(i))
            .map(|(_, t)| t.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Translator for DropoutTranslator {
    fn system_id(&self) -> &str {
        &self.id
    }

    fn translate_batch(
        &self,
        texts: &[String],
        src_lang: &str,
        tgt_lang: &str,
    ) -> Result<Vec<String>, RttError> {
        let damaged: Vec<String> = texts.iter().map(|t| self.damage(t)).collect();
        self.base.translate_batch(&damaged, src_lang, tgt_lang)
    }
}

/// Wraps a translator and counts invocations; the test hook behind the
/// cache contract. Shares the inner system id so cache keys are unchanged.
pub struct CountingTranslator {
    inner: Arc<dyn Translator>,
    calls: AtomicU64,
    texts: AtomicU64,
}

impl CountingTranslator {
    pub fn new(inner: Arc<dyn Translator>) -> CountingTranslator {
        CountingTranslator { inner, calls: AtomicU64::new(0), texts: AtomicU64::new(0) }
    }

    /// Number of translate_batch invocations that reached the inner system.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// Total texts the inner system translated.
    pub fn texts_translated(&self) -> u64 {
        self.texts.load(Ordering::SeqCst)
    }
}

impl Translator for CountingTranslator {
    fn system_id(&self) -> &str {
        self.inner.system_id()
    }

    fn translate_batch(
        &self,
        texts: &[String],
        src_lang: &str,
        tgt_lang: &str,
    ) -> Result<Vec<String>, RttError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.texts.fetch_add(texts.len() as u64, Ordering::SeqCst);
        self.inner.translate_batch(texts, src_lang, tgt_lang)
    }
}
