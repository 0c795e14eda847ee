//! Trans-Score and Self-Score computation over translator pipelines, and
//! the self-describing score records they emit.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{align_parallel, Corpus, DatasetError, ParallelCorpus};
use crate::rtt::{cached_translate, RttError, TranslateOptions, TranslationCache, Translator};
use crate::textmetrics::{
    feature_stats, score_corpus, Aggregation, MetricError, MetricId, MetricName, Smoothing,
    SubwordVocab,
};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Rtt(#[from] RttError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("self_score needs a round-trip direction, got {0}")]
    NotRoundTrip(Direction),
    #[error("corpus is in {found:?} but the pair side is {expected:?}")]
    WrongLanguage { expected: String, found: String },
    #[error("{path}: line {line}: {detail}")]
    RecordParse { path: PathBuf, line: usize, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// What a record measures: a forward translation against references, or a
/// round trip starting from either side of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash)]
pub enum Direction {
    #[serde(rename = "a_to_b")]
    AToB,
    #[serde(rename = "a_rtt_b")]
    ARttB,
    #[serde(rename = "b_rtt_a")]
    BRttA,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::AToB => "a_to_b",
            Direction::ARttB => "a_rtt_b",
            Direction::BRttA => "b_rtt_a",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        match s {
            "a_to_b" => Some(Direction::AToB),
            "a_rtt_b" => Some(Direction::ARttB),
            "b_rtt_a" => Some(Direction::BRttA),
            _ => None,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One measurement. Carries every mode that affects the number, so a record
/// file is recomputable from cached translations alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub src_lang: String,
    pub tgt_lang: String,
    /// The system translating pair side A into side B.
    pub system: String,
    /// The system translating B back into A, for round-trip records.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub back_system: Option<String>,
    pub direction: Direction,
    pub metric: String,
    pub score: f64,
    /// Correct 4-gram count, bleu-family metrics only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max4_count: Option<u64>,
    /// Cumulative reference token count, bleu-family metrics only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ref_length: Option<u64>,
    pub aggregation: Aggregation,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub smoothing: Option<Smoothing>,
    pub segments: usize,
    pub degenerate: bool,
}

impl ScoreRecord {
    /// The stable output order: pair, system, direction, metric.
    pub fn sort_key(&self) -> (String, String, String, Direction, String) {
        (
            self.src_lang.clone(),
            self.tgt_lang.clone(),
            self.system.clone(),
            self.direction,
            self.metric.clone(),
        )
    }
}

pub fn sort_records(records: &mut [ScoreRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Everything scoring needs besides the corpus and the systems.
pub struct ScoreContext<'a> {
    pub cache: &'a TranslationCache,
    pub opts: TranslateOptions,
    pub vocab: Option<&'a SubwordVocab>,
}

fn finish_record(
    mut record: ScoreRecord,
    metric: &MetricId,
    hyps: &[String],
    refs: &[String],
    vocab: Option<&SubwordVocab>,
) -> Result<ScoreRecord, ScoreError> {
    let scored = score_corpus(metric, vocab, hyps, refs)?;
    record.score = scored.score;
    record.degenerate = scored.degenerate;
    if let Some(stats) = scored.bleu {
        let (max4, ref_len) = feature_stats(&stats);
        record.max4_count = Some(max4);
        record.ref_length = Some(ref_len);
    }
    if metric.name == MetricName::Chrf {
        record.smoothing = None;
    }
    Ok(record)
}

/// Trans-Score: translate the source side of a parallel corpus and score
/// the outputs against the references.
pub fn trans_score(
    sys_ab: &dyn Translator,
    parallel: &ParallelCorpus,
    metric: &MetricId,
    ctx: &ScoreContext,
) -> Result<ScoreRecord, ScoreError> {
    if parallel.is_empty() {
        return Err(ScoreError::Rtt(RttError::EmptyCorpus));
    }
    let sources = parallel.sources();
    let hyps = cached_translate(
        ctx.cache,
        sys_ab,
        &sources,
        &parallel.src_lang,
        &parallel.tgt_lang,
        &ctx.opts,
    )?;
    let record = ScoreRecord {
        src_lang: parallel.src_lang.clone(),
        tgt_lang: parallel.tgt_lang.clone(),
        system: sys_ab.system_id().to_string(),
        back_system: None,
        direction: Direction::AToB,
        metric: metric.name.as_str().to_string(),
        score: 0.0,
        max4_count: None,
        ref_length: None,
        aggregation: metric.aggregation,
        smoothing: Some(metric.smoothing),
        segments: parallel.len(),
        degenerate: false,
    };
    finish_record(record, metric, &hyps, &parallel.targets(), ctx.vocab)
}

/// Self-Score: round-trip the corpus and score the reconstruction against
/// the original text. `pair` is (side A, side B); `corpus` must be the
/// pair side the loop starts from.
pub fn self_score(
    direction: Direction,
    sys_ab: &dyn Translator,
    sys_ba: &dyn Translator,
    corpus: &Corpus,
    pair: (&str, &str),
    metric: &MetricId,
    ctx: &ScoreContext,
) -> Result<ScoreRecord, ScoreError> {
    let (lang_a, lang_b) = pair;
    let (start_lang, other_lang, fwd, back): (&str, &str, &dyn Translator, &dyn Translator) =
        match direction {
            Direction::ARttB => (lang_a, lang_b, sys_ab, sys_ba),
            Direction::BRttA => (lang_b, lang_a, sys_ba, sys_ab),
            Direction::AToB => return Err(ScoreError::NotRoundTrip(direction)),
        };
    if corpus.lang != start_lang {
        return Err(ScoreError::WrongLanguage {
            expected: start_lang.to_string(),
            found: corpus.lang.clone(),
        });
    }
    if corpus.is_empty() {
        return Err(ScoreError::Rtt(RttError::EmptyCorpus));
    }
    let sources = corpus.segments().to_vec();
    let outward = cached_translate(ctx.cache, fwd, &sources, start_lang, other_lang, &ctx.opts)?;
    let reconstructed =
        cached_translate(ctx.cache, back, &outward, other_lang, start_lang, &ctx.opts)?;
    let record = ScoreRecord {
        src_lang: lang_a.to_string(),
        tgt_lang: lang_b.to_string(),
        system: sys_ab.system_id().to_string(),
        back_system: Some(sys_ba.system_id().to_string()),
        direction,
        metric: metric.name.as_str().to_string(),
        score: 0.0,
        max4_count: None,
        ref_length: None,
        aggregation: metric.aggregation,
        smoothing: Some(metric.smoothing),
        segments: corpus.len(),
        degenerate: false,
    };
    finish_record(record, metric, &reconstructed, &sources, ctx.vocab)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOutcome {
    pub records: Vec<ScoreRecord>,
    /// Human-readable reasons for every (pair, record) left out.
    pub skipped: Vec<String>,
}

/// Score every requested pair in all three directions, for every system and
/// metric. Pairs missing a corpus, and forward records whose two corpora
/// cannot be aligned, are skipped with a diagnostic rather than failing the
/// rest of the matrix.
pub fn score_matrix(
    pairs: &[(String, String)],
    systems: &[&dyn Translator],
    corpora: &BTreeMap<String, Corpus>,
    metrics: &[MetricId],
    ctx: &ScoreContext,
) -> Result<MatrixOutcome, ScoreError> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (lang_a, lang_b) in pairs {
        let Some(corpus_a) = corpora.get(lang_a) else {
            skipped.push(format!("{}-{}: no corpus for {}", lang_a, lang_b, lang_a));
            continue;
        };
        let Some(corpus_b) = corpora.get(lang_b) else {
            skipped.push(format!("{}-{}: no corpus for {}", lang_a, lang_b, lang_b));
            continue;
        };
        let parallel = match align_parallel(corpus_a, corpus_b) {
            Ok(p) => Some(p),
            Err(DatasetError::AlignLength { left, right }) => {
                skipped.push(format!(
                    "{}-{}: forward records skipped, corpora not aligned ({} vs {})",
                    lang_a, lang_b, left, right
                ));
                None
            }
            Err(other) => return Err(other.into()),
        };
        for system in systems {
            for metric in metrics {
                if let Some(parallel) = &parallel {
                    records.push(trans_score(*system, parallel, metric, ctx)?);
                }
                records.push(self_score(
                    Direction::ARttB,
                    *system,
                    *system,
                    corpus_a,
                    (lang_a, lang_b),
                    metric,
                    ctx,
                )?);
                records.push(self_score(
                    Direction::BRttA,
                    *system,
                    *system,
                    corpus_b,
                    (lang_a, lang_b),
                    metric,
                    ctx,
                )?);
            }
        }
    }
    sort_records(&mut records);
    skipped.sort();
    Ok(MatrixOutcome { records, skipped })
}

/// First line of a record file; readers skip it by its "format" field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileMeta {
    pub format: String,
    pub format_version: u32,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config_digest: Option<String>,
}

impl FileMeta {
    pub fn new(format: &str, config_digest: Option<String>) -> FileMeta {
        FileMeta {
            format: format!("rtt-qe/{}", format),
            format_version: 1,
            tool_version: crate::TOOL_VERSION.to_string(),
            config_digest,
        }
    }
}

/// Write records as line-delimited JSON under a header line.
pub fn write_records(
    path: &Path,
    records: &[ScoreRecord],
    meta: &FileMeta,
) -> Result<(), ScoreError> {
    let io_err = |source| ScoreError::Io { path: path.to_path_buf(), source };
    let mut out = String::new();
    out.push_str(&serde_json::to_string(meta).expect("meta serializes"));
    out.push('\n');
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)
}

/// Read a record file, skipping header lines.
pub fn read_records(path: &Path) -> Result<Vec<ScoreRecord>, ScoreError> {
    let file = std::fs::File::open(path)
        .map_err(|source| ScoreError::Io { path: path.to_path_buf(), source })?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| ScoreError::Io { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| ScoreError::RecordParse {
                path: path.to_path_buf(),
                line: idx + 1,
                detail: e.to_string(),
            })?;
        if value.get("format").is_some() {
            continue;
        }
        let record: ScoreRecord =
            serde_json::from_value(value).map_err(|e| ScoreError::RecordParse {
                path: path.to_path_buf(),
                line: idx + 1,
                detail: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtt::{DropoutTranslator, IdentityTranslator, ReverseWordsTranslator};
    use std::sync::Arc;

    fn corpus(lang: &str, lines: &[&str]) -> Corpus {
        Corpus::new(lang, lines.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    struct Ctx {
        _dir: tempfile::TempDir,
        cache: TranslationCache,
    }

    impl Ctx {
        fn new() -> Ctx {
            let dir = tempfile::tempdir().unwrap();
            let cache = TranslationCache::open(dir.path()).unwrap();
            Ctx { _dir: dir, cache }
        }

        fn ctx(&self) -> ScoreContext<'_> {
            ScoreContext { cache: &self.cache, opts: TranslateOptions::default(), vocab: None }
        }
    }

    #[test]
    fn identity_trans_score_is_100_on_identical_references() {
        let h = Ctx::new();
        let a = corpus("aa", &["one two three four five", "six seven eight nine"]);
        let b = corpus("bb", &["one two three four five", "six seven eight nine"]);
        let parallel = align_parallel(&a, &b).unwrap();
        let record =
            trans_score(&IdentityTranslator, &parallel, &MetricId::bleu_13a(), &h.ctx()).unwrap();
        assert_eq!(record.score, 100.0);
        assert_eq!(record.direction, Direction::AToB);
        assert_eq!(record.system, "identity");
        assert!(record.back_system.is_none());
        assert_eq!(record.segments, 2);
        assert!(record.max4_count.is_some());
    }

    #[test]
    fn full_dropout_trans_score_is_degenerate_zero() {
        let h = Ctx::new();
        let a = corpus("aa", &["one two three four five"]);
        let parallel = align_parallel(&a, &a).unwrap();
        let fwd = DropoutTranslator::new(Arc::new(IdentityTranslator), 1.0, 3).unwrap();
        let record = trans_score(&fwd, &parallel, &MetricId::bleu_13a(), &h.ctx()).unwrap();
        assert_eq!(record.score, 0.0);
        assert!(record.degenerate);
    }

    #[test]
    fn identity_self_score_is_100_both_directions() {
        let h = Ctx::new();
        let a = corpus("aa", &["one two three four five"]);
        let b = corpus("bb", &["uno dos tres cuatro cinco"]);
        for (direction, start) in [(Direction::ARttB, &a), (Direction::BRttA, &b)] {
            let record = self_score(
                direction,
                &IdentityTranslator,
                &IdentityTranslator,
                start,
                ("aa", "bb"),
                &MetricId::bleu_13a(),
                &h.ctx(),
            )
            .unwrap();
            assert_eq!(record.score, 100.0, "{:?}", direction);
            assert_eq!((record.src_lang.as_str(), record.tgt_lang.as_str()), ("aa", "bb"));
            assert_eq!(record.back_system.as_deref(), Some("identity"));
        }
    }

    #[test]
    fn reverse_words_round_trip_scores_100() {
        let h = Ctx::new();
        let a = corpus("aa", &["one two three four five", "alpha beta gamma delta"]);
        let record = self_score(
            Direction::ARttB,
            &ReverseWordsTranslator,
            &ReverseWordsTranslator,
            &a,
            ("aa", "bb"),
            &MetricId::bleu_13a(),
            &h.ctx(),
        )
        .unwrap();
        assert_eq!(record.score, 100.0);
    }

    #[test]
    fn self_score_validates_direction_and_language() {
        let h = Ctx::new();
        let a = corpus("aa", &["x"]);
        assert!(matches!(
            self_score(
                Direction::AToB,
                &IdentityTranslator,
                &IdentityTranslator,
                &a,
                ("aa", "bb"),
                &MetricId::bleu_13a(),
                &h.ctx()
            ),
            Err(ScoreError::NotRoundTrip(Direction::AToB))
        ));
        assert!(matches!(
            self_score(
                Direction::BRttA,
                &IdentityTranslator,
                &IdentityTranslator,
                &a,
                ("aa", "bb"),
                &MetricId::bleu_13a(),
                &h.ctx()
            ),
            Err(ScoreError::WrongLanguage { .. })
        ));
    }

    #[test]
    fn matrix_cardinality_and_order() {
        let h = Ctx::new();
        let mut corpora = BTreeMap::new();
        corpora.insert("aa".to_string(), corpus("aa", &["one two three four five"]));
        corpora.insert("bb".to_string(), corpus("bb", &["uno dos tres cuatro cinco"]));
        let pairs = vec![("aa".to_string(), "bb".to_string()), ("bb".to_string(), "aa".to_string())];
        let systems: Vec<&dyn Translator> = vec![&IdentityTranslator];
        let metrics = vec![MetricId::bleu_13a(), MetricId::chrf()];
        let outcome = score_matrix(&pairs, &systems, &corpora, &metrics, &h.ctx()).unwrap();
        assert_eq!(outcome.records.len(), 12, "2 pairs x 3 directions x 2 metrics");
        assert!(outcome.skipped.is_empty());
        let mut sorted = outcome.records.clone();
        sort_records(&mut sorted);
        assert_eq!(sorted, outcome.records, "records come out in stable order");
    }

    #[test]
    fn matrix_skips_missing_corpora_with_diagnostics() {
        let h = Ctx::new();
        let mut corpora = BTreeMap::new();
        corpora.insert("aa".to_string(), corpus("aa", &["one"]));
        let pairs = vec![("aa".to_string(), "bb".to_string())];
        let systems: Vec<&dyn Translator> = vec![&IdentityTranslator];
        let outcome =
            score_matrix(&pairs, &systems, &corpora, &[MetricId::bleu_13a()], &h.ctx()).unwrap();
        assert!(outcome.records.is_empty());
        assert_eq!(outcome.skipped.len(), 1);
        assert!(outcome.skipped[0].contains("no corpus for bb"));
    }

    #[test]
    fn matrix_handles_unaligned_corpora() {
        let h = Ctx::new();
        let mut corpora = BTreeMap::new();
        corpora.insert("aa".to_string(), corpus("aa", &["one two", "three four"]));
        corpora.insert("bb".to_string(), corpus("bb", &["uno dos"]));
        let pairs = vec![("aa".to_string(), "bb".to_string())];
        let systems: Vec<&dyn Translator> = vec![&IdentityTranslator];
        let outcome =
            score_matrix(&pairs, &systems, &corpora, &[MetricId::bleu_13a()], &h.ctx()).unwrap();
        // Both self records survive; the forward record is skipped.
        assert_eq!(outcome.records.len(), 2);
        assert!(outcome.records.iter().all(|r| r.direction != Direction::AToB));
        assert_eq!(outcome.skipped.len(), 1);
    }

    #[test]
    fn empty_pair_list_is_empty_output() {
        let h = Ctx::new();
        let outcome = score_matrix(
            &[],
            &[&IdentityTranslator as &dyn Translator],
            &BTreeMap::new(),
            &[MetricId::bleu_13a()],
            &h.ctx(),
        )
        .unwrap();
        assert!(outcome.records.is_empty());
        assert!(outcome.skipped.is_empty());
    }

    #[test]
    fn records_round_trip_through_jsonl() {
        let h = Ctx::new();
        let a = corpus("aa", &["one two three four five"]);
        let parallel = align_parallel(&a, &a).unwrap();
        let mut records = vec![
            trans_score(&IdentityTranslator, &parallel, &MetricId::bleu_13a(), &h.ctx()).unwrap(),
            self_score(
                Direction::ARttB,
                &IdentityTranslator,
                &IdentityTranslator,
                &a,
                ("aa", "aa2"),
                &MetricId::chrf(),
                &h.ctx(),
            )
            .unwrap(),
        ];
        sort_records(&mut records);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        write_records(&path, &records, &FileMeta::new("records", Some("digest".into()))).unwrap();
        let loaded = read_records(&path).unwrap();
        assert_eq!(loaded, records);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().contains("rtt-qe/records"));
    }

    #[test]
    fn record_parse_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"format\":\"rtt-qe/records\",\"format_version\":1,\"tool_version\":\"0\"}\nnot json\n").unwrap();
        let err = read_records(&path).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
