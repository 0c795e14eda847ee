//! End-to-end behavioral guarantees, one test per guarantee, each measured
//! against an independent oracle and a runtime budget. Oracles here are
//! written from the definitions, never by calling the code under test.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rtt_qe::analysis::{kendall_tau, pearson_r, rank_systems, RankEntry};
use rtt_qe::dataset::{
    align_parallel, enumerate_pairs, Corpus, LanguageSpec, Registry, ResourceClass, Usage,
};
use rtt_qe::predictor::{
    build_features, build_training_set, fit_ols, predict_rows, FeatureSpec, TrainingSample,
};
use rtt_qe::rtt::{
    copy_stats, round_trip, CountingTranslator, DropoutTranslator, IdentityTranslator,
    ReverseWordsTranslator, TranslateOptions, TranslationCache, Translator,
};
use rtt_qe::scoring::{self_score, trans_score, Direction, ScoreContext, ScoreRecord};
use rtt_qe::textmetrics::{
    chrf_score, normalize_nfc, score_corpus, tokenize_13a, Aggregation, MetricId, Smoothing,
    SubwordVocab, CHRF_BETA,
};

const WORDS: &[&str] = &[
    "the", "cat", "sat", "on", "a", "mat", "dog", "ran", "far", "blue", "sky", "over", "老",
    "naïve", "café", "42", "3.5", "zwölf", "und", "river", "stone", "wind", "lamp", "door",
];

const MARKS: &[&str] = &["!", "?", ",", ".", ";", "µ"];

fn random_segment(rng: &mut ChaCha8Rng, min_words: usize, max_words: usize) -> String {
    let n = rng.gen_range(min_words..=max_words);
    let mut parts = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.gen_bool(0.15) {
            parts.push(MARKS[rng.gen_range(0..MARKS.len())].to_string());
        } else {
            parts.push(WORDS[rng.gen_range(0..WORDS.len())].to_string());
        }
    }
    parts.join(" ")
}

fn random_corpus(rng: &mut ChaCha8Rng, segments: usize, min_words: usize) -> Vec<String> {
    (0..segments).map(|_| random_segment(rng, min_words, min_words + 7)).collect()
}

#[test]
fn acceptance_01_partition_counts() {
    let started = Instant::now();

    let bundled = Registry::bundled_ae33();
    let partition = enumerate_pairs(bundled.languages()).unwrap();
    assert_eq!(partition.counts(), (380, 520, 156), "bundled registry partition");
    assert_eq!(partition.to_string(), "(380, 520, 156)");

    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let p = rng.gen_range(0..=40usize);
        let q = rng.gen_range(0..=40usize);
        if p + q == 0 {
            continue;
        }
        let mut languages = Vec::new();
        for i in 0..p {
            languages.push(LanguageSpec {
                code: format!("t{i}"),
                resource: ResourceClass::High,
                usage: Usage::TrainTest,
            });
        }
        for i in 0..q {
            languages.push(LanguageSpec {
                code: format!("e{i}"),
                resource: ResourceClass::Low,
                usage: Usage::TestOnly,
            });
        }
        let part = enumerate_pairs(&languages).unwrap();
        let (i, ii, iii) = part.counts();
        assert_eq!(i, p * p.saturating_sub(1), "type I at p={p} q={q}");
        assert_eq!(ii, 2 * p * q, "type II at p={p} q={q}");
        assert_eq!(iii, q * q.saturating_sub(1), "type III at p={p} q={q}");
        let n = p + q;
        assert_eq!(i + ii + iii, n * (n - 1), "closed-form identity at p={p} q={q}");
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1s");
    println!("acceptance 1 (partition counts): PASS in {elapsed:?}");
}

/// Corpus BLEU recounted from the definition with plain hash maps.
fn oracle_bleu(hyps: &[String], refs: &[String], floor: Option<f64>) -> f64 {
    let mut matches = [0u64; 4];
    let mut totals = [0u64; 4];
    let (mut hyp_len, mut ref_len) = (0u64, 0u64);
    for (hyp, reference) in hyps.iter().zip(refs) {
        let ht = tokenize_13a(hyp);
        let rt = tokenize_13a(reference);
        hyp_len += ht.len() as u64;
        ref_len += rt.len() as u64;
        for order in 1..=4usize {
            let count = |tokens: &[String]| {
                let mut map: HashMap<String, u64> = HashMap::new();
                for window in tokens.windows(order) {
                    *map.entry(window.join("\u{1f}")).or_insert(0) += 1;
                }
                map
            };
            let hyp_grams = count(&ht);
            let ref_grams = count(&rt);
            for (gram, &n) in &hyp_grams {
                matches[order - 1] += n.min(*ref_grams.get(gram).unwrap_or(&0));
            }
            totals[order - 1] += ht.len().saturating_sub(order - 1) as u64;
        }
    }
    let mut log_sum = 0.0;
    for k in 0..4 {
        let p = if totals[k] == 0 {
            0.0
        } else if matches[k] == 0 {
            floor.map(|eps| eps / totals[k] as f64).unwrap_or(0.0)
        } else {
            matches[k] as f64 / totals[k] as f64
        };
        if p <= 0.0 {
            return 0.0;
        }
        log_sum += p.ln() / 4.0;
    }
    let bp = if hyp_len >= ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    100.0 * bp * log_sum.exp()
}

#[test]
fn acceptance_02_bleu_oracle() {
    let started = Instant::now();

    let hyp = vec!["it is a guide to action".to_string()];
    let reference =
        vec!["it is a guide to action which ensures that the military".to_string()];
    let metric = MetricId::bleu_13a().with_smoothing(Smoothing::None);
    let out = score_corpus(&metric, None, &hyp, &reference).unwrap();
    assert!(
        (out.score - 43.46).abs() <= 0.01,
        "guide-to-action hand value: got {}",
        out.score
    );

    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for case in 0..50 {
        let n = rng.gen_range(1..=8usize);
        let hyps: Vec<String> = (0..n).map(|_| random_segment(&mut rng, 0, 9)).collect();
        let refs: Vec<String> = (0..n).map(|_| random_segment(&mut rng, 1, 9)).collect();
        for (smoothing, floor) in [(Smoothing::None, None), (Smoothing::Floor(0.1), Some(0.1))] {
            let metric = MetricId::bleu_13a().with_smoothing(smoothing);
            let fast = score_corpus(&metric, None, &hyps, &refs).unwrap().score;
            let slow = oracle_bleu(&hyps, &refs, floor);
            assert!(
                (fast - slow).abs() <= 1e-6,
                "case {case} {smoothing:?}: {fast} vs oracle {slow}"
            );
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5s");
    println!("acceptance 2 (BLEU oracle): PASS in {elapsed:?}");
}

/// Segment chrF recounted from the definition.
fn oracle_chrf(pairs: &[(String, String)], beta: f64) -> f64 {
    let chars = |text: &str| -> Vec<char> {
        normalize_nfc(text).chars().filter(|c| !c.is_whitespace()).collect()
    };
    let mut matches = [0u64; 6];
    let mut hyp_totals = [0u64; 6];
    let mut ref_totals = [0u64; 6];
    for (hyp, reference) in pairs {
        let hc = chars(hyp);
        let rc = chars(reference);
        for order in 1..=6usize {
            let count = |cs: &[char]| {
                let mut map: HashMap<String, u64> = HashMap::new();
                for window in cs.windows(order) {
                    *map.entry(window.iter().collect()).or_insert(0) += 1;
                }
                map
            };
            let hyp_grams = count(&hc);
            let ref_grams = count(&rc);
            for (gram, &n) in &hyp_grams {
                matches[order - 1] += n.min(*ref_grams.get(gram).unwrap_or(&0));
            }
            hyp_totals[order - 1] += hc.len().saturating_sub(order - 1) as u64;
            ref_totals[order - 1] += rc.len().saturating_sub(order - 1) as u64;
        }
    }
    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut included = 0u32;
    for k in 0..6 {
        if hyp_totals[k] == 0 && ref_totals[k] == 0 {
            continue;
        }
        included += 1;
        if hyp_totals[k] > 0 {
            precision_sum += matches[k] as f64 / hyp_totals[k] as f64;
        }
        if ref_totals[k] > 0 {
            recall_sum += matches[k] as f64 / ref_totals[k] as f64;
        }
    }
    if included == 0 {
        return 0.0;
    }
    let precision = precision_sum / f64::from(included);
    let recall = recall_sum / f64::from(included);
    if precision + recall == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    100.0 * (1.0 + b2) * precision * recall / (b2 * precision + recall)
}

#[test]
fn acceptance_03_chrf_oracle() {
    let started = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..10 {
        let n = rng.gen_range(1..6);
        let segments = random_corpus(&mut rng, n, 1);
        for aggregation in [Aggregation::CorpusLevel, Aggregation::SentenceAverage] {
            let metric = MetricId::chrf().with_aggregation(aggregation);
            let out = score_corpus(&metric, None, &segments, &segments).unwrap();
            assert_eq!(out.score, 100.0, "identity chrF must be exactly 100");
        }
    }

    for case in 0..50 {
        let hyp = random_segment(&mut rng, 0, 9);
        let reference = random_segment(&mut rng, 1, 9);
        let fast = chrf_score(&hyp, &reference, CHRF_BETA);
        let slow = oracle_chrf(&[(hyp.clone(), reference.clone())], CHRF_BETA);
        assert!((fast - slow).abs() <= 1e-6, "pair {case}: {fast} vs oracle {slow}");
    }

    for case in 0..10 {
        let n = rng.gen_range(1..=6usize);
        let pairs: Vec<(String, String)> = (0..n)
            .map(|_| (random_segment(&mut rng, 0, 9), random_segment(&mut rng, 1, 9)))
            .collect();
        let hyps: Vec<String> = pairs.iter().map(|(h, _)| h.clone()).collect();
        let refs: Vec<String> = pairs.iter().map(|(_, r)| r.clone()).collect();
        let fast = score_corpus(&MetricId::chrf(), None, &hyps, &refs).unwrap().score;
        let slow = oracle_chrf(&pairs, CHRF_BETA);
        assert!((fast - slow).abs() <= 1e-6, "corpus {case}: {fast} vs oracle {slow}");
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5s");
    println!("acceptance 3 (chrF oracle): PASS in {elapsed:?}");
}

fn ols_samples(rows: &[Vec<f64>], targets: &[f64]) -> Vec<TrainingSample> {
    rows.iter()
        .zip(targets)
        .enumerate()
        .map(|(i, (row, &t))| TrainingSample {
            pair: ("aa".to_string(), "bb".to_string()),
            system: format!("s{i}"),
            features: row.clone(),
            target: t,
        })
        .collect()
}

#[test]
fn acceptance_04_ols() {
    let started = Instant::now();
    let spec2 = FeatureSpec::self_scores_both("bleu-13a");

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let planted = |x1: f64, x2: f64| 0.7 * x1 + 0.2 * x2 + 5.0;

    let rows: Vec<Vec<f64>> =
        (0..40).map(|_| vec![rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)]).collect();
    let exact: Vec<f64> = rows.iter().map(|r| planted(r[0], r[1])).collect();
    let model = fit_ols(&ols_samples(&rows, &exact), &spec2, MetricId::bleu_13a(), false).unwrap();
    assert!((model.weights[0] - 0.7).abs() <= 1e-9, "w1 {}", model.weights[0]);
    assert!((model.weights[1] - 0.2).abs() <= 1e-9, "w2 {}", model.weights[1]);
    assert!((model.intercept - 5.0).abs() <= 1e-9, "intercept {}", model.intercept);

    let gauss = |rng: &mut ChaCha8Rng| {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let noisy_rows: Vec<Vec<f64>> =
        (0..1000).map(|_| vec![rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)]).collect();
    let noisy: Vec<f64> =
        noisy_rows.iter().map(|r| planted(r[0], r[1]) + 0.1 * gauss(&mut rng)).collect();
    let noisy_model =
        fit_ols(&ols_samples(&noisy_rows, &noisy), &spec2, MetricId::bleu_13a(), false).unwrap();
    assert!((noisy_model.weights[0] - 0.7).abs() <= 0.02, "noisy w1 {}", noisy_model.weights[0]);
    assert!((noisy_model.weights[1] - 0.2).abs() <= 0.02, "noisy w2 {}", noisy_model.weights[1]);
    assert!((noisy_model.intercept - 5.0).abs() <= 0.02, "noisy b {}", noisy_model.intercept);

    let residuals: Vec<f64> = noisy_rows
        .iter()
        .zip(&noisy)
        .map(|(r, &t)| {
            t - (noisy_model.intercept
                + noisy_model.weights[0] * r[0]
                + noisy_model.weights[1] * r[1])
        })
        .collect();
    let res_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    assert!(
        residuals.iter().sum::<f64>().abs() <= 1e-6 * (1.0 + res_norm * (1000f64).sqrt()),
        "intercept orthogonality"
    );
    for j in 0..2 {
        let col_norm = noisy_rows.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt();
        let dot: f64 = noisy_rows.iter().zip(&residuals).map(|(r, res)| r[j] * res).sum();
        assert!(dot.abs() <= 1e-6 * (1.0 + col_norm * res_norm), "column {j} orthogonality");
    }

    // Rank-deficient: duplicated feature column against an SVD pseudo-inverse.
    let dup_rows: Vec<Vec<f64>> = (0..50)
        .map(|_| {
            let v = rng.gen_range(0.0..10.0);
            vec![v, v]
        })
        .collect();
    let dup_targets: Vec<f64> = dup_rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
    let dup_model =
        fit_ols(&ols_samples(&dup_rows, &dup_targets), &spec2, MetricId::bleu_13a(), false)
            .unwrap();
    let design = nalgebra::DMatrix::from_fn(dup_rows.len(), 3, |i, j| {
        if j == 0 {
            1.0
        } else {
            dup_rows[i][j - 1]
        }
    });
    let y = nalgebra::DVector::from_vec(dup_targets.clone());
    let pinv = design.svd(true, true).pseudo_inverse(1e-10).unwrap();
    let beta = pinv * y;
    assert!((dup_model.intercept - beta[0]).abs() <= 1e-9, "pinv intercept");
    assert!((dup_model.weights[0] - beta[1]).abs() <= 1e-9, "pinv w1");
    assert!((dup_model.weights[1] - beta[2]).abs() <= 1e-9, "pinv w2");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1s");
    println!("acceptance 4 (OLS): PASS in {elapsed:?}");
}

fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

fn brute_tau_b(x: &[f64], y: &[f64]) -> f64 {
    use std::cmp::Ordering;
    let n = x.len();
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).unwrap();
            let dy = y[i].partial_cmp(&y[j]).unwrap();
            if dx == Ordering::Equal {
                tied_x += 1;
            }
            if dy == Ordering::Equal {
                tied_y += 1;
            }
            if dx != Ordering::Equal && dy != Ordering::Equal {
                if dx == dy {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    (concordant - discordant) as f64 / (((n0 - tied_x) as f64) * ((n0 - tied_y) as f64)).sqrt()
}

#[test]
fn acceptance_05_correlation_oracles() {
    let started = Instant::now();

    let x = [1.0, 2.0, 2.0, 3.0];
    let y = [1.0, 2.0, 3.0, 4.0];
    let tau = kendall_tau(&x, &y).unwrap();
    assert!((tau - 5.0 / 30f64.sqrt()).abs() <= 1e-15, "hand tau {tau}");

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for case in 0..200 {
        let n = rng.gen_range(2..=200usize);
        let tied = case % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| {
            if tied {
                f64::from(rng.gen_range(0..6u8))
            } else {
                rng.gen_range(-100.0..100.0)
            }
        };
        let mut xs: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let mut ys: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        if xs.iter().all(|v| *v == xs[0]) {
            xs[n - 1] += 1.0;
        }
        if ys.iter().all(|v| *v == ys[0]) {
            ys[n - 1] += 1.0;
        }
        let fast_r = pearson_r(&xs, &ys).unwrap();
        let slow_r = brute_pearson(&xs, &ys);
        assert!((fast_r - slow_r).abs() <= 1e-12, "case {case} pearson {fast_r} vs {slow_r}");
        let fast_tau = kendall_tau(&xs, &ys).unwrap();
        let slow_tau = brute_tau_b(&xs, &ys);
        assert!(
            (fast_tau - slow_tau).abs() <= 1e-12,
            "case {case} tau {fast_tau} vs {slow_tau}"
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5s");
    println!("acceptance 5 (correlation oracles): PASS in {elapsed:?}");
}

#[test]
fn acceptance_06_mock_shared_task() {
    let started = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let sources = random_corpus(&mut rng, 1000, 10);
    let references: Vec<String> = sources.iter().map(|s| format!("{s} fin")).collect();
    let corpus_a = Corpus::new("aa", sources).unwrap();
    let corpus_b = Corpus::new("bb", references).unwrap();
    let parallel = align_parallel(&corpus_a, &corpus_b).unwrap();

    let identity = IdentityTranslator;
    let systems: Vec<DropoutTranslator> = (0..=16u32)
        .map(|i| {
            DropoutTranslator::new(Arc::new(IdentityTranslator), f64::from(i) / 20.0, 42)
                .unwrap()
                .with_id(&format!("drop-{:02}", i * 5))
        })
        .collect();

    let dir = tempfile::tempdir().unwrap();
    let cache = TranslationCache::open(dir.path()).unwrap();
    let ctx = ScoreContext { cache: &cache, opts: TranslateOptions::default(), vocab: None };
    let metric = MetricId::chrf();

    let mut records: Vec<ScoreRecord> = Vec::new();
    for system in &systems {
        records.push(trans_score(system, &parallel, &metric, &ctx).unwrap());
        records.push(
            self_score(Direction::ARttB, system, &identity, &corpus_a, ("aa", "bb"), &metric, &ctx)
                .unwrap(),
        );
    }

    // Train on every other competitor, then score all seventeen.
    let spec = FeatureSpec::self_score_single(Direction::ARttB, "chrf");
    let training_records: Vec<ScoreRecord> = records
        .iter()
        .filter(|r| {
            let rate: u32 = r.system.strip_prefix("drop-").unwrap().parse().unwrap();
            (rate / 5) % 2 == 0
        })
        .cloned()
        .collect();
    let training = build_training_set(&training_records, &spec, "chrf").unwrap();
    assert_eq!(training.samples.len(), 9, "nine of seventeen competitors train");
    let model = fit_ols(&training.samples, &spec, metric.clone(), false).unwrap();

    let table = build_features(&records, &spec).unwrap();
    assert_eq!(table.rows.len(), 17);
    let predictions = predict_rows(&model, &table.rows, false).unwrap();
    let truth: BTreeMap<&str, f64> = records
        .iter()
        .filter(|r| r.direction == Direction::AToB)
        .map(|r| (r.system.as_str(), r.score))
        .collect();

    let entries: Vec<RankEntry> = table
        .rows
        .iter()
        .zip(&predictions)
        .map(|(row, &p)| RankEntry {
            system: row.system.clone(),
            predicted: p,
            truth: Some(truth[row.system.as_str()]),
        })
        .collect();
    let report = rank_systems(&entries).unwrap();
    let tau = report.kendall_tau.expect("all truths present");
    let r = report.pearson_r.expect("all truths present");
    assert_eq!(tau, 1.0, "predicted ranking must match the true ranking exactly");
    assert!(r >= 0.98, "pearson r {r} below 0.98");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}, budget 60s");
    println!("acceptance 6 (mock shared task): PASS, tau=1.00 r={r:.4}, in {elapsed:?}");
}

#[test]
fn acceptance_07_identity_back_collapse() {
    let started = Instant::now();

    let vocab = SubwordVocab::from_lines(WORDS.iter().copied().filter(|w| w.is_ascii())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let identity = IdentityTranslator;

    for case in 0..20u64 {
        let n = rng.gen_range(3..12);
        let segments = random_corpus(&mut rng, n, 1);
        let corpus_a = Corpus::new("aa", segments.clone()).unwrap();
        let as_reference = Corpus::new("bb", segments).unwrap();
        let parallel = align_parallel(&corpus_a, &as_reference).unwrap();

        let forward: Arc<dyn Translator> = match case % 3 {
            0 => Arc::new(IdentityTranslator),
            1 => Arc::new(ReverseWordsTranslator),
            _ => Arc::new(
                DropoutTranslator::new(
                    Arc::new(ReverseWordsTranslator),
                    rng.gen_range(0.1..0.7),
                    rng.gen(),
                )
                .unwrap(),
            ),
        };
        let aggregation = if (case / 3) % 2 == 0 {
            Aggregation::CorpusLevel
        } else {
            Aggregation::SentenceAverage
        };
        for base in [MetricId::bleu_13a(), MetricId::spbleu(), MetricId::chrf()] {
            let metric = base.with_aggregation(aggregation);
            let dir = tempfile::tempdir().unwrap();
            let cache = TranslationCache::open(dir.path()).unwrap();
            let ctx = ScoreContext {
                cache: &cache,
                opts: TranslateOptions::default(),
                vocab: Some(&vocab),
            };
            let self_record = self_score(
                Direction::ARttB,
                forward.as_ref(),
                &identity,
                &corpus_a,
                ("aa", "bb"),
                &metric,
                &ctx,
            )
            .unwrap();
            let trans_record = trans_score(forward.as_ref(), &parallel, &metric, &ctx).unwrap();
            assert_eq!(
                self_record.score.to_bits(),
                trans_record.score.to_bits(),
                "case {case} {:?} {:?}: self {} vs trans {}",
                metric.name,
                aggregation,
                self_record.score,
                trans_record.score
            );
        }
    }

    let elapsed = started.elapsed();
    println!("acceptance 7 (identity-back collapse): PASS in {elapsed:?}");
}

#[test]
fn acceptance_08_cache_contract() {
    let started = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let corpus = Corpus::new("aa", random_corpus(&mut rng, 50, 3)).unwrap();
    let fwd = CountingTranslator::new(Arc::new(
        DropoutTranslator::new(Arc::new(ReverseWordsTranslator), 0.3, 7).unwrap(),
    ));
    let back = CountingTranslator::new(Arc::new(ReverseWordsTranslator));
    let dir = tempfile::tempdir().unwrap();
    let cache = TranslationCache::open(dir.path()).unwrap();
    let opts = TranslateOptions::default();

    let first = round_trip(&corpus, "bb", &fwd, &back, &cache, &opts).unwrap();
    let fwd_calls = fwd.texts_translated();
    let back_calls = back.texts_translated();
    assert_eq!(fwd_calls, 50);
    assert_eq!(back_calls, 50);

    let second = round_trip(&corpus, "bb", &fwd, &back, &cache, &opts).unwrap();
    assert_eq!(fwd.texts_translated(), fwd_calls, "repeat run must not translate forward");
    assert_eq!(back.texts_translated(), back_calls, "repeat run must not translate back");
    assert_eq!(first.forward, second.forward, "forward outputs byte-identical");
    assert_eq!(first.back, second.back, "back outputs byte-identical");

    let elapsed = started.elapsed();
    println!("acceptance 8 (cache contract): PASS in {elapsed:?}");
}

#[test]
fn acceptance_09_copy_stats() {
    let started = Instant::now();

    let identical = vec!["a b c".to_string(), "x y".to_string()];
    let stats = copy_stats(&identical, &identical).unwrap();
    assert_eq!(stats.avg_copy_pct, 100.0);
    assert_eq!(stats.avg_copy_pct_source, 100.0);

    let sources = vec!["a b c".to_string()];
    let disjoint = vec!["x y z".to_string()];
    let stats = copy_stats(&sources, &disjoint).unwrap();
    assert_eq!(stats.avg_copy_count, 0.0);
    assert_eq!(stats.avg_copy_pct, 0.0);

    let stats = copy_stats(&["a b c".to_string()], &["a x".to_string()]).unwrap();
    assert_eq!(stats.avg_copy_count, 1.0, "one token copied");
    assert_eq!(stats.avg_copy_pct, 50.0, "half of the output is copied");

    let elapsed = started.elapsed();
    println!("acceptance 9 (copy stats): PASS in {elapsed:?}");
}

#[test]
fn acceptance_10_dropout_monotonicity() {
    let started = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let corpus = Corpus::new("aa", random_corpus(&mut rng, 1000, 8)).unwrap();
    let identity = IdentityTranslator;
    let dir = tempfile::tempdir().unwrap();
    let cache = TranslationCache::open(dir.path()).unwrap();
    let ctx = ScoreContext { cache: &cache, opts: TranslateOptions::default(), vocab: None };
    let metric = MetricId::chrf();

    let mut scores = Vec::new();
    for i in 0..=16u32 {
        let rate = f64::from(i) / 20.0;
        let system = DropoutTranslator::new(Arc::new(IdentityTranslator), rate, 42)
            .unwrap()
            .with_id(&format!("drop-{:02}", i * 5));
        let record =
            self_score(Direction::ARttB, &system, &identity, &corpus, ("aa", "bb"), &metric, &ctx)
                .unwrap();
        scores.push((rate, record.score));
    }
    assert_eq!(scores[0].1, 100.0, "zero dropout reconstructs the source exactly");
    for window in scores.windows(2) {
        let (r1, s1) = window[0];
        let (r2, s2) = window[1];
        assert!(
            s2 <= s1,
            "chrf self-score rose from {s1} to {s2} between rates {r1} and {r2}"
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("acceptance 10 (dropout monotonicity): PASS in {elapsed:?}");
}
