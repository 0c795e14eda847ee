//! Corpus loading, parallel alignment, and the language registry with its
//! Type I/II/III pair partition.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: line {line} is not valid UTF-8")]
    Utf8 { path: PathBuf, line: usize },
    #[error("segment {index} contains a line break")]
    SegmentLineBreak { index: usize },
    #[error("corpora differ in length: {left} vs {right} segments")]
    AlignLength { left: usize, right: usize },
    #[error("registry: {0}")]
    Registry(String),
    #[error("registry has no languages")]
    EmptyRegistry,
    #[error("duplicate language code {0:?}")]
    DuplicateLanguage(String),
}

/// A monolingual line corpus. Segment order is significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub lang: String,
    segments: Vec<String>,
}

impl Corpus {
    /// Segments must be single lines; alignment is positional and a stray
    /// line break would silently shift it.
    pub fn new(lang: &str, segments: Vec<String>) -> Result<Corpus, DatasetError> {
        for (index, seg) in segments.iter().enumerate() {
            if seg.contains('\n') || seg.contains('\r') {
                return Err(DatasetError::SegmentLineBreak { index });
            }
        }
        Ok(Corpus { lang: lang.to_string(), segments })
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Positionally aligned sentence pairs for one language direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub src_lang: String,
    pub tgt_lang: String,
    pairs: Vec<(String, String)>,
}

impl ParallelCorpus {
    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn sources(&self) -> Vec<String> {
        self.pairs.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn targets(&self) -> Vec<String> {
        self.pairs.iter().map(|(_, b)| b.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Load a one-segment-per-line UTF-8 corpus. A leading BOM is stripped, CRLF
/// and LF both accepted, text NFC-normalized, the trailing newline optional.
pub fn load_corpus(path: &Path, lang: &str) -> Result<Corpus, DatasetError> {
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bytes = bytes.strip_prefix(b"\xef\xbb\xbf").unwrap_or(&bytes);
    let mut segments = Vec::new();
    if !bytes.is_empty() {
        let mut pieces: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
        if pieces.last().is_some_and(|p| p.is_empty()) {
            pieces.pop();
        }
        for (idx, piece) in pieces.iter().enumerate() {
            let piece = piece.strip_suffix(b"\r").unwrap_or(piece);
            let line = std::str::from_utf8(piece).map_err(|_| DatasetError::Utf8 {
                path: path.to_path_buf(),
                line: idx + 1,
            })?;
            segments.push(line.nfc().collect());
        }
    }
    Corpus::new(lang, segments)
}

/// Inverse of [`load_corpus`]: one segment per line, LF endings, trailing
/// newline when nonempty.
pub fn save_corpus(path: &Path, corpus: &Corpus) -> Result<(), DatasetError> {
    let mut text = corpus.segments.join("\n");
    if !text.is_empty() || !corpus.segments.is_empty() {
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Positional alignment of two equal-length corpora.
pub fn align_parallel(a: &Corpus, b: &Corpus) -> Result<ParallelCorpus, DatasetError> {
    if a.len() != b.len() {
        return Err(DatasetError::AlignLength { left: a.len(), right: b.len() });
    }
    Ok(ParallelCorpus {
        src_lang: a.lang.clone(),
        tgt_lang: b.lang.clone(),
        pairs: a
            .segments
            .iter()
            .cloned()
            .zip(b.segments.iter().cloned())
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceClass {
    High,
    Medium,
    Low,
}

impl ResourceClass {
    fn parse(s: &str) -> Option<ResourceClass> {
        match s {
            "high" => Some(ResourceClass::High),
            "medium" => Some(ResourceClass::Medium),
            "low" => Some(ResourceClass::Low),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Usage {
    #[serde(rename = "train+test")]
    TrainTest,
    #[serde(rename = "test")]
    TestOnly,
}

impl Usage {
    fn parse(s: &str) -> Option<Usage> {
        match s {
            "train+test" => Some(Usage::TrainTest),
            "test" => Some(Usage::TestOnly),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageSpec {
    pub code: String,
    pub resource: ResourceClass,
    pub usage: Usage,
}

/// An ordered set of languages with unique codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    languages: Vec<LanguageSpec>,
}

const BUNDLED_AE33: &str = include_str!("../data/flores_ae33.csv");

impl Registry {
    pub fn new(languages: Vec<LanguageSpec>) -> Result<Registry, DatasetError> {
        let mut seen = std::collections::HashSet::new();
        for lang in &languages {
            if !seen.insert(lang.code.clone()) {
                return Err(DatasetError::DuplicateLanguage(lang.code.clone()));
            }
        }
        Ok(Registry { languages })
    }

    /// Parse the `code,resource,usage` CSV format.
    pub fn from_csv_str(text: &str) -> Result<Registry, DatasetError> {
        let mut languages = Vec::new();
        let mut saw_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line.to_ascii_lowercase() != "code,resource,usage" {
                    return Err(DatasetError::Registry(format!(
                        "line {}: expected header code,resource,usage, found {:?}",
                        idx + 1,
                        line
                    )));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(DatasetError::Registry(format!(
                    "line {}: expected 3 fields, found {}",
                    idx + 1,
                    fields.len()
                )));
            }
            if fields[0].is_empty() {
                return Err(DatasetError::Registry(format!("line {}: empty language code", idx + 1)));
            }
            let resource = ResourceClass::parse(fields[1]).ok_or_else(|| {
                DatasetError::Registry(format!(
                    "line {}: unknown resource class {:?}",
                    idx + 1,
                    fields[1]
                ))
            })?;
            let usage = Usage::parse(fields[2]).ok_or_else(|| {
                DatasetError::Registry(format!("line {}: unknown usage {:?}", idx + 1, fields[2]))
            })?;
            languages.push(LanguageSpec { code: fields[0].to_string(), resource, usage });
        }
        if !saw_header {
            return Err(DatasetError::Registry("missing header".to_string()));
        }
        Registry::new(languages)
    }

    pub fn from_csv_path(path: &Path) -> Result<Registry, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Registry::from_csv_str(&text)
    }

    /// The bundled 33-language registry: 20 train+test, 13 test-only.
    pub fn bundled_ae33() -> Registry {
        Registry::from_csv_str(BUNDLED_AE33).expect("bundled registry parses")
    }

    pub fn languages(&self) -> &[LanguageSpec] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }
}

/// Directed language pairs split by how much of the pair the predictor saw
/// in training: both sides (I), one side (II), neither (III).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPartition {
    pub type_i: Vec<(String, String)>,
    pub type_ii: Vec<(String, String)>,
    pub type_iii: Vec<(String, String)>,
}

impl PairPartition {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.type_i.len(), self.type_ii.len(), self.type_iii.len())
    }

    pub fn total(&self) -> usize {
        self.type_i.len() + self.type_ii.len() + self.type_iii.len()
    }
}

// The canonical "(a, b, c)" shape printed by the CLI.
impl fmt::Display for PairPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c) = self.counts();
        write!(f, "({}, {}, {})", a, b, c)
    }
}

/// Enumerate every directed pair of distinct languages and classify it by
/// the usage labels of its two sides.
pub fn enumerate_pairs(languages: &[LanguageSpec]) -> Result<PairPartition, DatasetError> {
    if languages.is_empty() {
        return Err(DatasetError::EmptyRegistry);
    }
    let mut seen = std::collections::HashSet::new();
    for lang in languages {
        if !seen.insert(lang.code.as_str()) {
            return Err(DatasetError::DuplicateLanguage(lang.code.clone()));
        }
    }
    let mut partition = PairPartition {
        type_i: Vec::new(),
        type_ii: Vec::new(),
        type_iii: Vec::new(),
    };
    for src in languages {
        for tgt in languages {
            if src.code == tgt.code {
                continue;
            }
            let pair = (src.code.clone(), tgt.code.clone());
            let train_sides = [src.usage, tgt.usage]
                .iter()
                .filter(|u| **u == Usage::TrainTest)
                .count();
            match train_sides {
                2 => partition.type_i.push(pair),
                1 => partition.type_ii.push(pair),
                _ => partition.type_iii.push(pair),
            }
        }
    }
    Ok(partition)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(code: &str, usage: Usage) -> LanguageSpec {
        LanguageSpec { code: code.to_string(), resource: ResourceClass::High, usage }
    }

    #[test]
    fn bundled_registry_has_the_20_13_split() {
        let reg = Registry::bundled_ae33();
        assert_eq!(reg.len(), 33);
        let train = reg.languages().iter().filter(|l| l.usage == Usage::TrainTest).count();
        assert_eq!(train, 20);
        assert_eq!(reg.len() - train, 13);
    }

    #[test]
    fn bundled_partition_counts() {
        let reg = Registry::bundled_ae33();
        let partition = enumerate_pairs(reg.languages()).unwrap();
        assert_eq!(partition.counts(), (380, 520, 156));
        assert_eq!(partition.total(), 33 * 32);
    }

    #[test]
    fn small_partitions() {
        let one = [spec("aa", Usage::TrainTest)];
        assert_eq!(enumerate_pairs(&one).unwrap().counts(), (0, 0, 0));

        let mixed = [
            spec("aa", Usage::TrainTest),
            spec("bb", Usage::TrainTest),
            spec("cc", Usage::TestOnly),
            spec("dd", Usage::TestOnly),
        ];
        assert_eq!(enumerate_pairs(&mixed).unwrap().counts(), (2, 8, 2));
    }

    #[test]
    fn duplicate_codes_rejected() {
        let dup = [spec("aa", Usage::TrainTest), spec("aa", Usage::TestOnly)];
        assert!(matches!(
            enumerate_pairs(&dup),
            Err(DatasetError::DuplicateLanguage(_))
        ));
    }

    #[test]
    fn empty_registry_rejected() {
        assert!(matches!(enumerate_pairs(&[]), Err(DatasetError::EmptyRegistry)));
    }

    #[test]
    fn csv_parse_round_trip() {
        let reg = Registry::from_csv_str("code,resource,usage\nxx,low,test\nyy,high,train+test\n")
            .unwrap();
        assert_eq!(reg.len(), 2);
        assert_eq!(reg.languages()[0].code, "xx");
        assert_eq!(reg.languages()[0].resource, ResourceClass::Low);
        assert_eq!(reg.languages()[1].usage, Usage::TrainTest);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = Registry::from_csv_str("code,resource,usage\nxx,low\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let err = Registry::from_csv_str("nope\n").unwrap_err();
        assert!(err.to_string().contains("header"));
        let err = Registry::from_csv_str("code,resource,usage\nxx,nope,test\n").unwrap_err();
        assert!(err.to_string().contains("resource"));
    }

    #[test]
    fn corpus_rejects_embedded_line_breaks() {
        assert!(matches!(
            Corpus::new("xx", vec!["ok".into(), "bad\nline".into()]),
            Err(DatasetError::SegmentLineBreak { index: 1 })
        ));
    }

    #[test]
    fn align_parallel_is_positional() {
        let a = Corpus::new("aa", vec!["1".into(), "2".into()]).unwrap();
        let b = Corpus::new("bb", vec!["x".into(), "y".into()]).unwrap();
        let p = align_parallel(&a, &b).unwrap();
        assert_eq!(p.pairs(), &[("1".to_string(), "x".to_string()), ("2".into(), "y".into())]);

        let short = Corpus::new("bb", vec!["x".into()]).unwrap();
        assert!(matches!(
            align_parallel(&a, &short),
            Err(DatasetError::AlignLength { left: 2, right: 1 })
        ));
    }
}
