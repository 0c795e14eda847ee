//! Measurement suite: prediction error statistics, Pearson and Kendall
//! correlations, score-record correlation tables, and system ranking.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::{Direction, ScoreRecord};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("need at least 2 observations, got {0}")]
    TooFew(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("{0} input is constant, correlation undefined")]
    ConstantInput(&'static str),
    #[error("duplicate system id {0:?}")]
    DuplicateSystem(String),
}

fn check_finite(values: &[f64], what: &'static str) -> Result<(), AnalysisError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite(what));
    }
    Ok(())
}

fn check_aligned(x: &[f64], y: &[f64]) -> Result<(), AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(AnalysisError::Empty);
    }
    check_finite(x, "first argument")?;
    check_finite(y, "second argument")
}

/// Mean absolute error and root-mean-square error of predictions against
/// ground truth.
pub fn error_stats(pred: &[f64], truth: &[f64]) -> Result<(f64, f64), AnalysisError> {
    check_aligned(pred, truth)?;
    let n = pred.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        let e = p - t;
        abs_sum += e.abs();
        sq_sum += e * e;
    }
    Ok((abs_sum / n, (sq_sum / n).sqrt()))
}

/// Pearson's r. Errors out (rather than reporting 0) when either vector is
/// constant, so undefined correlations cannot silently enter a table.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    check_aligned(x, y)?;
    let n = x.len();
    if n < 2 {
        return Err(AnalysisError::TooFew(n));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(AnalysisError::ConstantInput("first"));
    }
    if syy == 0.0 {
        return Err(AnalysisError::ConstantInput("second"));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

fn tied_pair_count<K: PartialEq>(sorted_keys: &[K]) -> u64 {
    let mut pairs = 0u64;
    let mut run = 1u64;
    for i in 1..sorted_keys.len() {
        if sorted_keys[i] == sorted_keys[i - 1] {
            run += 1;
        } else {
            pairs += run * (run - 1) / 2;
            run = 1;
        }
    }
    pairs + run * (run - 1) / 2
}

/// Strict inversions in `values`, counted by merge sort. Equal elements are
/// not inversions.
fn count_inversions(values: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = values.split_at_mut(mid);
    let mut inversions =
        count_inversions(left, &mut scratch[..mid]) + count_inversions(right, &mut scratch[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if left[i].total_cmp(&right[j]).is_le() {
            scratch[k] = left[i];
            i += 1;
        } else {
            scratch[k] = right[j];
            inversions += (left.len() - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < left.len() {
        scratch[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        scratch[k] = right[j];
        j += 1;
        k += 1;
    }
    values.copy_from_slice(&scratch[..n]);
    inversions
}

/// Kendall's tau-b. Pairs tied in one variable enter only that side's tie
/// term; pairs tied in both are excluded throughout. Sort-and-merge, so
/// O(n log n) rather than the O(n²) pair scan.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    check_aligned(x, y)?;
    let n = x.len();
    if n < 2 {
        return Err(AnalysisError::TooFew(n));
    }
    // Adding 0.0 collapses -0.0 into 0.0 so bit-level tie grouping agrees
    // with numeric equality.
    let x: Vec<f64> = x.iter().map(|v| v + 0.0).collect();
    let y: Vec<f64> = y.iter().map(|v| v + 0.0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let n1 = tied_pair_count(&xs);
    let joint: Vec<(u64, u64)> = xs.iter().zip(&ys).map(|(a, b)| (a.to_bits(), b.to_bits())).collect();
    let n3 = tied_pair_count(&joint);
    let mut y_sorted = ys.clone();
    y_sorted.sort_by(f64::total_cmp);
    let n2 = tied_pair_count(&y_sorted);

    if n1 == n0 {
        return Err(AnalysisError::ConstantInput("first"));
    }
    if n2 == n0 {
        return Err(AnalysisError::ConstantInput("second"));
    }

    let mut scratch = vec![0.0; n];
    let discordant = count_inversions(&mut ys, &mut scratch);

    let numerator = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * discordant as f64;
    let denominator = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Ok(numerator / denominator)
}

/// Prediction quality in one bundle. Correlations are absent (with a note)
/// when they are undefined on the data, never silently zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub mae: f64,
    pub rmse: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pearson_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kendall_tau: Option<f64>,
    pub n: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

pub fn error_report(pred: &[f64], truth: &[f64]) -> Result<ErrorReport, AnalysisError> {
    let (mae, rmse) = error_stats(pred, truth)?;
    let mut notes = Vec::new();
    let pearson = match pearson_r(pred, truth) {
        Ok(r) => Some(r),
        Err(e @ (AnalysisError::ConstantInput(_) | AnalysisError::TooFew(_))) => {
            notes.push(format!("pearson_r unavailable: {}", e));
            None
        }
        Err(e) => return Err(e),
    };
    let tau = match kendall_tau(pred, truth) {
        Ok(t) => Some(t),
        Err(e @ (AnalysisError::ConstantInput(_) | AnalysisError::TooFew(_))) => {
            notes.push(format!("kendall_tau unavailable: {}", e));
            None
        }
        Err(e) => return Err(e),
    };
    Ok(ErrorReport {
        mae,
        rmse,
        pearson_r: pearson,
        kendall_tau: tau,
        n: pred.len(),
        notes,
    })
}

/// One correlation table row: Pearson's r between a round-trip score and
/// the forward score of the same system and metric, over language pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub system: String,
    pub metric: String,
    pub direction: Direction,
    pub n: usize,
    pub pearson_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

/// Correlate every system's round-trip scores with its forward scores,
/// language pairs as observations. Combinations with under 2 usable pairs,
/// or with constant scores, become diagnostics instead of rows.
pub fn correlation_report(records: &[ScoreRecord]) -> CorrelationReport {
    // (system, metric) -> pair -> score, separately for each direction.
    type PairScores = BTreeMap<(String, String), f64>;
    let mut forward: BTreeMap<(String, String), PairScores> = BTreeMap::new();
    let mut selves: BTreeMap<(String, String, Direction), PairScores> = BTreeMap::new();
    for r in records {
        let pair = (r.src_lang.clone(), r.tgt_lang.clone());
        match r.direction {
            Direction::AToB => {
                forward
                    .entry((r.system.clone(), r.metric.clone()))
                    .or_default()
                    .insert(pair, r.score);
            }
            d => {
                selves
                    .entry((r.system.clone(), r.metric.clone(), d))
                    .or_default()
                    .insert(pair, r.score);
            }
        }
    }
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for ((system, metric, direction), self_scores) in &selves {
        let label = format!("{} {} {}", system, metric, direction);
        let Some(trans_scores) = forward.get(&(system.clone(), metric.clone())) else {
            diagnostics.push(format!("{}: no forward records", label));
            continue;
        };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (pair, self_score) in self_scores {
            if let Some(trans) = trans_scores.get(pair) {
                xs.push(*self_score);
                ys.push(*trans);
            }
        }
        if xs.len() < 2 {
            diagnostics.push(format!(
                "{}: only {} pair(s) with both scores, need 2",
                label,
                xs.len()
            ));
            continue;
        }
        match pearson_r(&xs, &ys) {
            Ok(r) => rows.push(CorrelationRow {
                system: system.clone(),
                metric: metric.clone(),
                direction: *direction,
                n: xs.len(),
                pearson_r: r,
            }),
            Err(e) => diagnostics.push(format!("{}: {}", label, e)),
        }
    }
    CorrelationReport { rows, diagnostics }
}

/// Ranks for scores sorted descending (rank 1 is the highest score), ties
/// sharing the average of the positions they span.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average 1-based rank.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub system: String,
    pub predicted: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSystem {
    pub system: String,
    pub predicted: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth: Option<f64>,
    pub predicted_rank: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub true_rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    /// Best predicted system first.
    pub systems: Vec<RankedSystem>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kendall_tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pearson_r: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

/// Rank systems by predicted score, and against the true scores when every
/// entry has one.
pub fn rank_systems(entries: &[RankEntry]) -> Result<RankingReport, AnalysisError> {
    if entries.len() < 2 {
        return Err(AnalysisError::TooFew(entries.len()));
    }
    for (i, e) in entries.iter().enumerate() {
        if entries[..i].iter().any(|prev| prev.system == e.system) {
            return Err(AnalysisError::DuplicateSystem(e.system.clone()));
        }
    }
    let predicted: Vec<f64> = entries.iter().map(|e| e.predicted).collect();
    check_finite(&predicted, "predicted scores")?;
    let truths: Option<Vec<f64>> = entries.iter().map(|e| e.truth).collect();
    if let Some(t) = &truths {
        check_finite(t, "true scores")?;
    }
    let predicted_ranks = average_ranks(&predicted);
    let true_ranks = truths.as_ref().map(|t| average_ranks(t));

    let mut notes = Vec::new();
    let (mut tau, mut r) = (None, None);
    if let Some(t) = &truths {
        match kendall_tau(&predicted, t) {
            Ok(v) => tau = Some(v),
            Err(e) => notes.push(format!("kendall_tau unavailable: {}", e)),
        }
        match pearson_r(&predicted, t) {
            Ok(v) => r = Some(v),
            Err(e) => notes.push(format!("pearson_r unavailable: {}", e)),
        }
    } else if entries.iter().any(|e| e.truth.is_some()) {
        notes.push("true scores incomplete, correlations skipped".to_string());
    }

    let mut systems: Vec<RankedSystem> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| RankedSystem {
            system: e.system.clone(),
            predicted: e.predicted,
            truth: e.truth,
            predicted_rank: predicted_ranks[i],
            true_rank: true_ranks.as_ref().map(|r| r[i]),
        })
        .collect();
    systems.sort_by(|a, b| {
        a.predicted_rank.total_cmp(&b.predicted_rank).then_with(|| a.system.cmp(&b.system))
    });
    Ok(RankingReport { systems, kendall_tau: tau, pearson_r: r, notes })
}

/// Aligned-column plain-text table; two spaces between columns.
pub fn format_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let cols = headers.len();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(cols) {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut write_row = |cells: &[String]| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate().take(cols) {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            if i + 1 < cols {
                for _ in cell.chars().count()..widths[i] {
                    line.push(' ');
                }
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };
    write_row(&headers.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    write_row(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for row in rows {
        write_row(row);
    }
    out
}
