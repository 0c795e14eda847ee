//! Translator abstraction, round-trip execution, translation caching, the
//! HTTP adapter, deterministic mock translators, and copy-rate analysis.

mod cache;
mod copy;
mod http;
mod mock;

pub use cache::{source_digest, CacheError, TranslationCache};
pub use copy::{copy_stats, CopyStats};
pub use http::{HttpConfig, HttpTranslator};
pub use mock::{CountingTranslator, DropoutTranslator, IdentityTranslator, ReverseWordsTranslator};

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Corpus;

#[derive(Debug, Error)]
pub enum RttError {
    #[error("cannot round-trip an empty corpus")]
    EmptyCorpus,
    #[error("dropout rate {0} is outside [0, 1]")]
    InvalidRate(f64),
    #[error("translator {system} returned {got} outputs for {expected} inputs")]
    OutputShape { system: String, expected: usize, got: usize },
    #[error("batch {index} failed: {source}")]
    Batch {
        index: usize,
        #[source]
        source: Box<RttError>,
    },
    #[error("transport failure after {attempts} attempt(s): {detail}")]
    Transport { attempts: u32, detail: String },
    #[error("service returned status {status}: {detail}")]
    Service { status: u16, detail: String },
    #[error("invalid service response: {0}")]
    Response(String),
    #[error("source and output lists differ in length: {sources} vs {outputs}")]
    LengthMismatch { sources: usize, outputs: usize },
    #[error("copy statistics need at least one sentence")]
    EmptyInput,
    #[error("adapter configuration: {0}")]
    AdapterConfig(String),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

impl RttError {
    /// True for failures of the translation service or its transport, which
    /// the CLI maps to a distinct exit code.
    pub fn is_adapter_failure(&self) -> bool {
        match self {
            RttError::Transport { .. } | RttError::Service { .. } | RttError::Response(_) => true,
            RttError::Batch { source, .. } => source.is_adapter_failure(),
            _ => false,
        }
    }
}

/// A translation system. Implementations must preserve batch order and
/// length; mock translators must be deterministic given their seed.
pub trait Translator: Send + Sync {
    /// Stable identifier; it keys the translation cache.
    fn system_id(&self) -> &str;

    fn translate_batch(
        &self,
        texts: &[String],
        src_lang: &str,
        tgt_lang: &str,
    ) -> Result<Vec<String>, RttError>;
}

/// Batching and parallelism for cache-mediated translation.
#[derive(Debug, Clone, Copy)]
pub struct TranslateOptions {
    pub batch_size: usize,
    pub concurrency: usize,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions { batch_size: 32, concurrency: 4 }
    }
}

/// One corpus sent out and back: sources a_i, forward outputs B*, and the
/// reconstructions A'.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTripResult {
    pub src_lang: String,
    pub tgt_lang: String,
    pub fwd_system: String,
    pub back_system: String,
    pub sources: Vec<String>,
    pub forward: Vec<String>,
    pub back: Vec<String>,
}

/// Translate through the cache: only cache misses reach the underlying
/// translator, in batches of `opts.batch_size` across up to
/// `opts.concurrency` workers, and every fresh translation is persisted
/// before return. Output order always matches input order.
pub fn cached_translate(
    cache: &TranslationCache,
    translator: &dyn Translator,
    texts: &[String],
    src_lang: &str,
    tgt_lang: &str,
    opts: &TranslateOptions,
) -> Result<Vec<String>, RttError> {
    let system = translator.system_id().to_string();
    let mut outputs: Vec<Option<String>> = Vec::with_capacity(texts.len());
    let mut misses: Vec<usize> = Vec::new();
    for (idx, text) in texts.iter().enumerate() {
        match cache.get(&system, src_lang, tgt_lang, text) {
            Some(hit) => outputs.push(Some(hit)),
            None => {
                outputs.push(None);
                misses.push(idx);
            }
        }
    }

    if !misses.is_empty() {
        let chunks: Vec<&[usize]> = misses.chunks(opts.batch_size.max(1)).collect();
        let workers = opts.concurrency.max(1).min(chunks.len());
        let results: Vec<Mutex<Option<Result<Vec<String>, RttError>>>> =
            (0..chunks.len()).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let failed = AtomicBool::new(false);

        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if failed.load(Ordering::SeqCst) {
                        break;
                    }
                    let chunk_idx = next.fetch_add(1, Ordering::SeqCst);
                    if chunk_idx >= chunks.len() {
                        break;
                    }
                    let batch: Vec<String> =
                        chunks[chunk_idx].iter().map(|&i| texts[i].clone()).collect();
                    let result = translator
                        .translate_batch(&batch, src_lang, tgt_lang)
                        .and_then(|outs| {
                            if outs.len() != batch.len() {
                                return Err(RttError::OutputShape {
                                    system: system.clone(),
                                    expected: batch.len(),
                                    got: outs.len(),
                                });
                            }
                            // Persist before handing results back; a later
                            // abort must not lose completed batches.
                            let entries: Vec<(String, String)> =
                                batch.iter().cloned().zip(outs.iter().cloned()).collect();
                            cache.put_many(&system, src_lang, tgt_lang, &entries);
                            Ok(outs)
                        });
                    if result.is_err() {
                        failed.store(true, Ordering::SeqCst);
                    }
                    *results[chunk_idx].lock().unwrap() = Some(result);
                });
            }
        });

        let mut resolved: Vec<Option<Vec<String>>> = Vec::with_capacity(chunks.len());
        let mut first_error: Option<(usize, RttError)> = None;
        for (idx, slot) in results.into_iter().enumerate() {
            match slot.into_inner().unwrap() {
                Some(Ok(outs)) => resolved.push(Some(outs)),
                Some(Err(err)) => {
                    if first_error.is_none() {
                        first_error = Some((idx, err));
                    }
                    resolved.push(None);
                }
                None => resolved.push(None),
            }
        }
        if let Some((index, source)) = first_error {
            return Err(RttError::Batch { index, source: Box::new(source) });
        }
        for (chunk, outs) in chunks.iter().zip(resolved) {
            let outs = outs.expect("all chunks completed without error");
            for (&text_idx, out) in chunk.iter().zip(outs) {
                outputs[text_idx] = Some(out);
            }
        }
    }

    Ok(outputs.into_iter().map(|o| o.expect("filled")).collect())
}

/// Round-trip a corpus: forward into `tgt_lang`, then back into the corpus
/// language, both legs through the cache.
pub fn round_trip(
    corpus: &Corpus,
    tgt_lang: &str,
    fwd: &dyn Translator,
    back: &dyn Translator,
    cache: &TranslationCache,
    opts: &TranslateOptions,
) -> Result<RoundTripResult, RttError> {
    if corpus.is_empty() {
        return Err(RttError::EmptyCorpus);
    }
    let sources = corpus.segments().to_vec();
    let forward = cached_translate(cache, fwd, &sources, &corpus.lang, tgt_lang, opts)?;
    let back_out = cached_translate(cache, back, &forward, tgt_lang, &corpus.lang, opts)?;
    Ok(RoundTripResult {
        src_lang: corpus.lang.clone(),
        tgt_lang: tgt_lang.to_string(),
        fwd_system: fwd.system_id().to_string(),
        back_system: back.system_id().to_string(),
        sources,
        forward,
        back: back_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn corpus(lines: &[&str]) -> Corpus {
        Corpus::new("aa", lines.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn temp_cache() -> (tempfile::TempDir, TranslationCache) {
        let dir = tempfile::tempdir().unwrap();
        let cache = TranslationCache::open(dir.path()).unwrap();
        (dir, cache)
    }

    #[test]
    fn identity_round_trip_restores_the_corpus() {
        let (_dir, cache) = temp_cache();
        let c = corpus(&["one two", "three"]);
        let result = round_trip(
            &c,
            "bb",
            &IdentityTranslator,
            &IdentityTranslator,
            &cache,
            &TranslateOptions::default(),
        )
        .unwrap();
        assert_eq!(result.back, c.segments());
        assert_eq!(result.forward, c.segments());
        assert_eq!(result.fwd_system, "identity");
    }

    #[test]
    fn reverse_words_is_an_involution() {
        let (_dir, cache) = temp_cache();
        let c = corpus(&["one two three", "four five"]);
        let result = round_trip(
            &c,
            "bb",
            &ReverseWordsTranslator,
            &ReverseWordsTranslator,
            &cache,
            &TranslateOptions::default(),
        )
        .unwrap();
        assert_eq!(result.back, c.segments());
        assert_eq!(result.forward[0], "three two one");
    }

    #[test]
    fn full_dropout_empties_every_reconstruction() {
        let (_dir, cache) = temp_cache();
        let c = corpus(&["one two three", "four five"]);
        let fwd = DropoutTranslator::new(Arc::new(IdentityTranslator), 1.0, 7).unwrap();
        let result = round_trip(
            &c,
            "bb",
            &fwd,
            &IdentityTranslator,
            &cache,
            &TranslateOptions::default(),
        )
        .unwrap();
        assert!(result.back.iter().all(String::is_empty));
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let (_dir, cache) = temp_cache();
        let c = Corpus::new("aa", Vec::new()).unwrap();
        assert!(matches!(
            round_trip(
                &c,
                "bb",
                &IdentityTranslator,
                &IdentityTranslator,
                &cache,
                &TranslateOptions::default()
            ),
            Err(RttError::EmptyCorpus)
        ));
    }

    #[test]
    fn cache_hits_skip_the_underlying_translator() {
        let (_dir, cache) = temp_cache();
        let counting = CountingTranslator::new(Arc::new(IdentityTranslator));
        let texts: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let opts = TranslateOptions::default();

        let first = cached_translate(&cache, &counting, &texts, "aa", "bb", &opts).unwrap();
        assert_eq!(first, texts);
        assert_eq!(counting.texts_translated(), 3);

        let second = cached_translate(&cache, &counting, &texts, "aa", "bb", &opts).unwrap();
        assert_eq!(second, texts);
        assert_eq!(counting.calls(), 1, "second run must be pure cache hits");
    }

    #[test]
    fn mixed_batch_forwards_only_the_misses() {
        let (_dir, cache) = temp_cache();
        let counting = CountingTranslator::new(Arc::new(IdentityTranslator));
        let opts = TranslateOptions::default();

        let warm: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        cached_translate(&cache, &counting, &warm, "aa", "bb", &opts).unwrap();
        assert_eq!(counting.texts_translated(), 3);

        let mixed: Vec<String> =
            ["a", "x", "b", "y", "c"].iter().map(|s| s.to_string()).collect();
        let out = cached_translate(&cache, &counting, &mixed, "aa", "bb", &opts).unwrap();
        assert_eq!(out, mixed, "output order must match input order");
        assert_eq!(counting.texts_translated(), 5, "exactly the 2 misses forwarded");
    }

    #[test]
    fn disjoint_second_batch_is_fully_forwarded() {
        let (_dir, cache) = temp_cache();
        let counting = CountingTranslator::new(Arc::new(IdentityTranslator));
        let opts = TranslateOptions::default();
        let first: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let second: Vec<String> = ["c", "d"].iter().map(|s| s.to_string()).collect();
        cached_translate(&cache, &counting, &first, "aa", "bb", &opts).unwrap();
        cached_translate(&cache, &counting, &second, "aa", "bb", &opts).unwrap();
        assert_eq!(counting.texts_translated(), 4);
    }

    #[test]
    fn direction_is_part_of_the_cache_key() {
        let (_dir, cache) = temp_cache();
        let counting = CountingTranslator::new(Arc::new(IdentityTranslator));
        let opts = TranslateOptions::default();
        let texts: Vec<String> = vec!["a".to_string()];
        cached_translate(&cache, &counting, &texts, "aa", "bb", &opts).unwrap();
        cached_translate(&cache, &counting, &texts, "bb", "aa", &opts).unwrap();
        assert_eq!(counting.texts_translated(), 2);
    }

    #[test]
    fn order_preserved_across_many_small_batches() {
        let (_dir, cache) = temp_cache();
        let texts: Vec<String> = (0..50).map(|i| format!("seg {}", i)).collect();
        let opts = TranslateOptions { batch_size: 3, concurrency: 4 };
        let out =
            cached_translate(&cache, &ReverseWordsTranslator, &texts, "aa", "bb", &opts).unwrap();
        for (i, line) in out.iter().enumerate() {
            assert_eq!(*line, format!("{} seg", i));
        }
    }

    struct FailingTranslator;

    impl Translator for FailingTranslator {
        fn system_id(&self) -> &str {
            "failing"
        }
        fn translate_batch(
            &self,
            _texts: &[String],
            _src: &str,
            _tgt: &str,
        ) -> Result<Vec<String>, RttError> {
            Err(RttError::Transport { attempts: 4, detail: "boom".to_string() })
        }
    }

    #[test]
    fn batch_failures_carry_the_batch_index_and_classify_as_adapter() {
        let (_dir, cache) = temp_cache();
        let texts: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        let opts = TranslateOptions { batch_size: 4, concurrency: 1 };
        let err =
            cached_translate(&cache, &FailingTranslator, &texts, "aa", "bb", &opts).unwrap_err();
        match &err {
            RttError::Batch { index, source } => {
                assert_eq!(*index, 0);
                assert!(matches!(**source, RttError::Transport { .. }));
            }
            other => panic!("unexpected error {:?}", other),
        }
        assert!(err.is_adapter_failure());
    }

    struct ShrinkingTranslator;

    impl Translator for ShrinkingTranslator {
        fn system_id(&self) -> &str {
            "shrinking"
        }
        fn translate_batch(
            &self,
            texts: &[String],
            _src: &str,
            _tgt: &str,
        ) -> Result<Vec<String>, RttError> {
            Ok(texts[..texts.len() - 1].to_vec())
        }
    }

    #[test]
    fn wrong_output_length_is_detected() {
        let (_dir, cache) = temp_cache();
        let texts: Vec<String> = vec!["a".into(), "b".into()];
        let err = cached_translate(
            &cache,
            &ShrinkingTranslator,
            &texts,
            "aa",
            "bb",
            &TranslateOptions::default(),
        )
        .unwrap_err();
        match err {
            RttError::Batch { source, .. } => {
                assert!(matches!(*source, RttError::OutputShape { expected: 2, got: 1, .. }));
            }
            other => panic!("unexpected error {:?}", other),
        }
    }
}
