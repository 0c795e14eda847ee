use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ngram::ngram_counts;
use super::MetricError;

pub const BLEU_ORDER: usize = 4;

/// Sufficient statistics of corpus BLEU. Additive: the stats of a corpus are
/// the elementwise sum of its per-segment stats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BleuStats {
    /// Clipped n-gram matches for orders 1..=4.
    pub match_counts: [u64; BLEU_ORDER],
    /// Candidate n-gram totals for orders 1..=4: max(0, hyp_len - k + 1).
    pub total_counts: [u64; BLEU_ORDER],
    /// Hypothesis token count (c).
    pub hyp_len: u64,
    /// Reference token count (r).
    pub ref_len: u64,
}

impl BleuStats {
    pub fn add(&mut self, other: &BleuStats) {
        for k in 0..BLEU_ORDER {
            self.match_counts[k] += other.match_counts[k];
            self.total_counts[k] += other.total_counts[k];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a BleuStats>) -> BleuStats {
        let mut acc = BleuStats::default();
        for part in parts {
            acc.add(part);
        }
        acc
    }
}

/// Per-segment BLEU statistics with n-gram clipping against the reference.
pub fn bleu_stats(hyp: &[String], reference: &[String]) -> BleuStats {
    let mut stats = BleuStats {
        hyp_len: hyp.len() as u64,
        ref_len: reference.len() as u64,
        ..BleuStats::default()
    };
    for k in 1..=BLEU_ORDER {
        // Orders are small constants, so the unwraps cannot fire.
        let hyp_grams = ngram_counts(hyp, k).unwrap();
        let ref_grams = ngram_counts(reference, k).unwrap();
        stats.match_counts[k - 1] = hyp_grams.clipped_matches(&ref_grams);
        stats.total_counts[k - 1] = hyp.len().saturating_sub(k - 1) as u64;
    }
    stats
}

/// Standard BLEU brevity penalty. Defined as 0 at c = 0 (continuous limit,
/// avoids dividing by zero).
pub fn brevity_penalty(c: u64, r: u64) -> f64 {
    if c >= r {
        1.0
    } else if c == 0 {
        0.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// Zero-precision handling for BLEU's geometric mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// Any zero precision forces score 0.
    None,
    /// Zero match counts are replaced by eps / total.
    Floor(f64),
    /// k added to matches and totals for orders above 1.
    AddK(u64),
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Floor(0.1)
    }
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothing::None => write!(f, "none"),
            Smoothing::Floor(eps) => write!(f, "floor({})", eps),
            Smoothing::AddK(k) => write!(f, "add-k({})", k),
        }
    }
}

impl FromStr for Smoothing {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MetricError::UnknownSmoothing(s.to_string());
        let s = s.trim();
        if s == "none" {
            return Ok(Smoothing::None);
        }
        if s == "floor" {
            return Ok(Smoothing::Floor(0.1));
        }
        if s == "add-k" {
            return Ok(Smoothing::AddK(1));
        }
        if let Some(rest) = s.strip_prefix("floor(").and_then(|r| r.strip_suffix(')')) {
            let eps: f64 = rest.parse().map_err(|_| bad())?;
            if !(eps.is_finite() && eps > 0.0) {
                return Err(bad());
            }
            return Ok(Smoothing::Floor(eps));
        }
        if let Some(rest) = s.strip_prefix("add-k(").and_then(|r| r.strip_suffix(')')) {
            let k: u64 = rest.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            return Ok(Smoothing::AddK(k));
        }
        Err(bad())
    }
}

impl Serialize for Smoothing {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Smoothing {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuOutcome {
    pub score: f64,
    /// Set when the stats carried no candidate unigrams (empty hypotheses);
    /// the score is forced to 0.
    pub degenerate: bool,
}

/// BLEU over aggregated statistics:
/// 100 * BP(c, r) * exp(sum over k of ln(p_k) / 4).
pub fn aggregate_bleu(stats: &BleuStats, smoothing: Smoothing) -> BleuOutcome {
    if stats.total_counts[0] == 0 {
        return BleuOutcome { score: 0.0, degenerate: true };
    }
    let mut log_sum = 0.0;
    for k in 0..BLEU_ORDER {
        let mut matches = stats.match_counts[k] as f64;
        let mut total = stats.total_counts[k] as f64;
        if let Smoothing::AddK(add) = smoothing {
            if k > 0 {
                matches += add as f64;
                total += add as f64;
            }
        }
        let p = if total == 0.0 {
            0.0
        } else if matches == 0.0 {
            match smoothing {
                Smoothing::Floor(eps) => eps / total,
                _ => 0.0,
            }
        } else {
            matches / total
        };
        if p <= 0.0 {
            return BleuOutcome { score: 0.0, degenerate: false };
        }
        log_sum += p.ln() / BLEU_ORDER as f64;
    }
    let bp = brevity_penalty(stats.hyp_len, stats.ref_len);
    BleuOutcome { score: 100.0 * bp * log_sum.exp(), degenerate: false }
}

/// Auxiliary predictor features from aggregated stats: correct 4-gram count
/// and cumulative reference length.
pub fn feature_stats(stats: &BleuStats) -> (u64, u64) {
    (stats.match_counts[BLEU_ORDER - 1], stats.ref_len)
}
