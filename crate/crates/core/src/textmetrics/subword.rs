use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use super::tokenize::normalize_nfc;
use super::MetricError;

/// Plain-text subword vocabulary for spBLEU: one token per line, resolved by
/// greedy longest match. Duplicate entries keep the earliest line.
#[derive(Debug, Clone)]
pub struct SubwordVocab {
    tokens: HashSet<String>,
    max_chars: usize,
}

impl SubwordVocab {
    pub fn from_lines<I, S>(lines: I) -> Result<SubwordVocab, MetricError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut tokens = HashSet::new();
        let mut max_chars = 0;
        for (idx, line) in lines.into_iter().enumerate() {
            let token = normalize_nfc(line.as_ref().trim_end_matches(['\r', '\n']));
            if token.is_empty() {
                continue;
            }
            if token.chars().any(char::is_whitespace) {
                return Err(MetricError::VocabToken { line: idx + 1 });
            }
            if tokens.insert(token.clone()) {
                max_chars = max_chars.max(token.chars().count());
            }
        }
        if tokens.is_empty() {
            return Err(MetricError::EmptyVocab);
        }
        Ok(SubwordVocab { tokens, max_chars })
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<SubwordVocab, MetricError> {
        let lines: Vec<String> = BufReader::new(reader)
            .lines()
            .collect::<Result<_, _>>()
            .map_err(|_| MetricError::EmptyVocab)?;
        SubwordVocab::from_lines(lines)
    }

    pub fn from_path(path: &Path) -> Result<SubwordVocab, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        SubwordVocab::from_lines(text.lines())
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Subword tokenization: whitespace split, then each word segmented
    /// greedily left to right by the longest vocabulary entry. Characters
    /// not covered by any entry become single-character tokens.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let normalized = normalize_nfc(text);
        let mut out = Vec::new();
        for word in normalized.split_whitespace() {
            let chars: Vec<char> = word.chars().collect();
            let mut pos = 0;
            while pos < chars.len() {
                let longest = (chars.len() - pos).min(self.max_chars.max(1));
                let mut taken = 1;
                for len in (1..=longest).rev() {
                    let candidate: String = chars[pos..pos + len].iter().collect();
                    if self.tokens.contains(&candidate) {
                        taken = len;
                        break;
                    }
                }
                out.push(chars[pos..pos + taken].iter().collect());
                pos += taken;
            }
        }
        out
    }
}
