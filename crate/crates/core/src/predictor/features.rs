//! Feature vectors assembled from score records: the round-trip score
//! itself plus the auxiliary statistics bleu-family metrics expose.

use std::collections::BTreeMap;

use super::PredictorError;
use crate::scoring::{Direction, ScoreRecord};

/// What a feature reads off a score record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    /// The round-trip score.
    SelfScore,
    /// Correct 4-gram count from the record's aggregated statistics.
    Max4Count,
    /// Cumulative reference token count.
    RefLength,
}

impl FeatureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureKind::SelfScore => "self_score",
            FeatureKind::Max4Count => "max4_count",
            FeatureKind::RefLength => "ref_length",
        }
    }
}

/// One named feature: a kind, the round-trip direction it reads, and
/// optionally the metric the source record must carry. Canonical syntax is
/// `kind(direction)` or `kind(direction,metric)`, e.g.
/// `self_score(a_rtt_b,bleu-13a)` or `ref_length(b_rtt_a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureKey {
    pub kind: FeatureKind,
    pub direction: Direction,
    pub metric: Option<String>,
}

impl FeatureKey {
    pub fn new(
        kind: FeatureKind,
        direction: Direction,
        metric: Option<String>,
    ) -> Result<FeatureKey, PredictorError> {
        let key = FeatureKey { kind, direction, metric };
        if direction == Direction::AToB {
            return Err(PredictorError::BadFeatureName {
                name: key.to_string(),
                detail: "features read round-trip records, not forward records".to_string(),
            });
        }
        if kind == FeatureKind::SelfScore && key.metric.is_none() {
            return Err(PredictorError::BadFeatureName {
                name: key.to_string(),
                detail: "self_score needs a metric".to_string(),
            });
        }
        Ok(key)
    }

    pub fn parse(name: &str) -> Result<FeatureKey, PredictorError> {
        let bad = |detail: &str| PredictorError::BadFeatureName {
            name: name.to_string(),
            detail: detail.to_string(),
        };
        let name = name.trim();
        let open = name.find('(').ok_or_else(|| bad("expected kind(direction[,metric])"))?;
        if !name.ends_with(')') {
            return Err(bad("expected kind(direction[,metric])"));
        }
        let kind = match &name[..open] {
            "self_score" => FeatureKind::SelfScore,
            "max4_count" => FeatureKind::Max4Count,
            "ref_length" => FeatureKind::RefLength,
            other => return Err(bad(&format!("unknown feature kind {:?}", other))),
        };
        let inner = &name[open + 1..name.len() - 1];
        let mut parts = inner.splitn(2, ',');
        let dir_text = parts.next().unwrap_or("").trim();
        let direction = Direction::parse(dir_text)
            .ok_or_else(|| bad(&format!("unknown direction {:?}", dir_text)))?;
        let metric = match parts.next() {
            Some(m) if !m.trim().is_empty() => Some(m.trim().to_string()),
            Some(_) => return Err(bad("empty metric")),
            None => None,
        };
        FeatureKey::new(kind, direction, metric)
    }
}

impl std::fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.metric {
            Some(m) => write!(f, "{}({},{})", self.kind.as_str(), self.direction, m),
            None => write!(f, "{}({})", self.kind.as_str(), self.direction),
        }
    }
}

/// Which round-trip directions a spec draws from. Single-direction specs
/// are the reduced predictor that needs monolingual text on one side only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionMode {
    Both,
    AOnly,
    BOnly,
}

/// An ordered, duplicate-free list of features. The order fixes the layout
/// of every feature row and weight vector built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    keys: Vec<FeatureKey>,
}

impl FeatureSpec {
    pub fn new(keys: Vec<FeatureKey>) -> Result<FeatureSpec, PredictorError> {
        if keys.is_empty() {
            return Err(PredictorError::EmptySpec);
        }
        for (i, key) in keys.iter().enumerate() {
            if keys[..i].contains(key) {
                return Err(PredictorError::DuplicateFeature(key.to_string()));
            }
        }
        Ok(FeatureSpec { keys })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<FeatureSpec, PredictorError> {
        let keys = names
            .iter()
            .map(|n| FeatureKey::parse(n.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        FeatureSpec::new(keys)
    }

    /// Both round-trip scores under one metric, the standard two-feature
    /// predictor shape.
    pub fn self_scores_both(metric: &str) -> FeatureSpec {
        FeatureSpec {
            keys: vec![
                FeatureKey {
                    kind: FeatureKind::SelfScore,
                    direction: Direction::ARttB,
                    metric: Some(metric.to_string()),
                },
                FeatureKey {
                    kind: FeatureKind::SelfScore,
                    direction: Direction::BRttA,
                    metric: Some(metric.to_string()),
                },
            ],
        }
    }

    /// One round-trip score only, the reduced single-direction predictor.
    pub fn self_score_single(direction: Direction, metric: &str) -> FeatureSpec {
        assert_ne!(direction, Direction::AToB, "single-direction spec needs a round trip");
        FeatureSpec {
            keys: vec![FeatureKey {
                kind: FeatureKind::SelfScore,
                direction,
                metric: Some(metric.to_string()),
            }],
        }
    }

    pub fn keys(&self) -> &[FeatureKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.keys.iter().map(|k| k.to_string()).collect()
    }

    pub fn direction_mode(&self) -> DirectionMode {
        let has_a = self.keys.iter().any(|k| k.direction == Direction::ARttB);
        let has_b = self.keys.iter().any(|k| k.direction == Direction::BRttA);
        match (has_a, has_b) {
            (true, false) => DirectionMode::AOnly,
            (false, true) => DirectionMode::BOnly,
            _ => DirectionMode::Both,
        }
    }
}

/// One assembled feature vector, tagged with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub pair: (String, String),
    pub system: String,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
    /// One line per (pair, system) group that could not produce a row.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub pair: (String, String),
    pub system: String,
    pub features: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub samples: Vec<TrainingSample>,
    pub diagnostics: Vec<String>,
}

fn feature_value(key: &FeatureKey, group: &[&ScoreRecord]) -> Result<f64, String> {
    let mut values: Vec<f64> = Vec::new();
    for record in group {
        if record.direction != key.direction {
            continue;
        }
        if let Some(metric) = &key.metric {
            if &record.metric != metric {
                continue;
            }
        }
        let value = match key.kind {
            FeatureKind::SelfScore => Some(record.score),
            FeatureKind::Max4Count => record.max4_count.map(|v| v as f64),
            FeatureKind::RefLength => record.ref_length.map(|v| v as f64),
        };
        if let Some(v) = value {
            if !values.contains(&v) {
                values.push(v);
            }
        }
    }
    match values.len() {
        0 => Err(format!("missing feature {}", key)),
        1 => Ok(values[0]),
        _ => Err(format!("ambiguous feature {} ({} conflicting records)", key, values.len())),
    }
}

fn group_records(records: &[ScoreRecord]) -> BTreeMap<(String, String, String), Vec<&ScoreRecord>> {
    let mut groups: BTreeMap<(String, String, String), Vec<&ScoreRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.src_lang.clone(), record.tgt_lang.clone(), record.system.clone()))
            .or_default()
            .push(record);
    }
    groups
}

/// One feature row per (language pair, system) found in `records`. Groups
/// missing any feature named by the spec are reported, not silently
/// dropped, and do not fail the rest of the table.
pub fn build_features(
    records: &[ScoreRecord],
    spec: &FeatureSpec,
) -> Result<FeatureTable, PredictorError> {
    if spec.is_empty() {
        return Err(PredictorError::EmptySpec);
    }
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for ((src, tgt, system), group) in group_records(records) {
        let mut features = Vec::with_capacity(spec.len());
        let mut failure = None;
        for key in spec.keys() {
            match feature_value(key, &group) {
                Ok(v) => features.push(v),
                Err(why) => {
                    failure = Some(why);
                    break;
                }
            }
        }
        match failure {
            None => rows.push(FeatureRow { pair: (src, tgt), system, features }),
            Some(why) => diagnostics.push(format!("{}-{} [{}]: {}", src, tgt, system, why)),
        }
    }
    Ok(FeatureTable { rows, diagnostics })
}

/// Join feature rows with forward-translation targets under the named
/// metric. Rows without a usable target become diagnostics.
pub fn build_training_set(
    records: &[ScoreRecord],
    spec: &FeatureSpec,
    target_metric: &str,
) -> Result<TrainingSet, PredictorError> {
    let table = build_features(records, spec)?;
    let groups = group_records(records);
    let mut samples = Vec::new();
    let mut diagnostics = table.diagnostics;
    for row in table.rows {
        let group = &groups[&(row.pair.0.clone(), row.pair.1.clone(), row.system.clone())];
        let mut targets: Vec<f64> = Vec::new();
        for record in group {
            if record.direction == Direction::AToB && record.metric == target_metric {
                if !targets.contains(&record.score) {
                    targets.push(record.score);
                }
            }
        }
        match targets.len() {
            1 => samples.push(TrainingSample {
                pair: row.pair,
                system: row.system,
                features: row.features,
                target: targets[0],
            }),
            0 => diagnostics.push(format!(
                "{}-{} [{}]: missing forward {} target",
                row.pair.0, row.pair.1, row.system, target_metric
            )),
            n => diagnostics.push(format!(
                "{}-{} [{}]: {} conflicting forward {} targets",
                row.pair.0, row.pair.1, row.system, n, target_metric
            )),
        }
    }
    diagnostics.sort();
    Ok(TrainingSet { samples, diagnostics })
}
