//! Command implementations. Every output file is deterministic for a given
//! config, inputs, and warm cache: contents carry no clock-derived values
//! (model timestamps honor SOURCE_DATE_EPOCH), and metadata embeds the
//! config digest and tool version.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{
    CliError, CopystatsArgs, EvalArgs, FitArgs, PartitionArgs, PredictArgs, RankArgs,
    RoundtripArgs, ScoreArgs, SynthArgs,
};
use crate::analysis::{error_report, format_table, rank_systems, RankEntry};
use crate::config::{RunConfig, SystemSpec};
use crate::dataset::{enumerate_pairs, load_corpus, save_corpus, Corpus, Registry, Usage};
use crate::predictor::{
    build_features, build_training_set, fit_ols, load_model, predict_rows, save_model, FeatureSpec,
};
use crate::rtt::{copy_stats, round_trip, RttError, TranslationCache, Translator};
use crate::scoring::{
    read_records, score_matrix, write_records, Direction, FileMeta, ScoreContext, ScoreRecord,
};

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn open_cache(config: &RunConfig) -> Result<TranslationCache, CliError> {
    let dir = config.cache_dir.clone().unwrap_or_else(|| PathBuf::from(".rtt-qe-cache"));
    TranslationCache::open(&dir).map_err(|e| CliError::Rtt(RttError::from(e)))
}

fn meta(config: &RunConfig, format: &str) -> FileMeta {
    FileMeta::new(format, Some(config.digest()))
}

/// Filename fragment: anything outside [A-Za-z0-9._-] becomes '-'.
fn safe_component(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '-' })
        .collect();
    out.truncate(48);
    if out.is_empty() {
        out.push('x');
    }
    out
}

fn write_json_report<T: serde::Serialize>(
    path: &Path,
    config: &RunConfig,
    format: &str,
    report: &T,
) -> Result<(), CliError> {
    let value = serde_json::json!({ "meta": meta(config, format), "report": report });
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    write_file(path, &text)
}

fn plot_csv(
    path: &Path,
    config: &RunConfig,
    columns: &str,
    rows: &[String],
) -> Result<(), CliError> {
    let mut text = format!(
        "# rtt-qe plot data\n# tool_version: {}\n# config_digest: {}\n{}\n",
        crate::TOOL_VERSION,
        config.digest(),
        columns
    );
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    write_file(path, &text)
}

pub fn roundtrip(config: &RunConfig, args: &RoundtripArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus, &args.src)?;
    let fwd = config.build_system(&args.fwd)?;
    let back_name = args.back.as_deref().unwrap_or(&args.fwd);
    let back = config.build_system(back_name)?;
    let cache = open_cache(config)?;
    let result =
        round_trip(&corpus, &args.tgt, fwd.as_ref(), back.as_ref(), &cache, &config.translate_options())?;

    let dir = match &args.out_dir {
        Some(d) => {
            std::fs::create_dir_all(d)
                .map_err(|source| CliError::Io { path: d.clone(), source })?;
            d.clone()
        }
        None => args.corpus.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")),
    };
    let base = args
        .corpus
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    let fwd_tag = safe_component(&args.fwd);
    let back_tag = safe_component(back_name);
    let forward_path =
        dir.join(format!("{}.{}.{}.txt", base, fwd_tag, safe_component(&args.tgt)));
    let back_path = dir.join(format!(
        "{}.{}+{}.{}.txt",
        base,
        fwd_tag,
        back_tag,
        safe_component(&args.src)
    ));
    let meta_path = dir.join(format!("{}.{}+{}.meta.json", base, fwd_tag, back_tag));

    save_corpus(&forward_path, &Corpus::new(&args.tgt, result.forward.clone())?)?;
    save_corpus(&back_path, &Corpus::new(&args.src, result.back.clone())?)?;
    let sidecar = serde_json::json!({
        "format": "rtt-qe/roundtrip-meta",
        "format_version": 1,
        "tool_version": crate::TOOL_VERSION,
        "config_digest": config.digest(),
        "src_lang": args.src,
        "tgt_lang": args.tgt,
        "fwd_system": result.fwd_system,
        "back_system": result.back_system,
        "segments": result.sources.len(),
        "forward_file": forward_path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "back_file": back_path.file_name().map(|n| n.to_string_lossy().into_owned()),
    });
    let mut sidecar_text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    sidecar_text.push('\n');
    write_file(&meta_path, &sidecar_text)?;

    println!("segments: {}", result.sources.len());
    println!("forward: {}", forward_path.display());
    println!("back: {}", back_path.display());
    Ok(())
}

fn parse_pairs(texts: &[String]) -> Result<Vec<(String, String)>, CliError> {
    texts
        .iter()
        .map(|t| {
            let bad = || CliError::Validation(format!("pair {:?} is not SRC-TGT", t));
            let (a, b) = t.split_once('-').ok_or_else(bad)?;
            if a.is_empty() || b.is_empty() || b.contains('-') {
                return Err(bad());
            }
            Ok((a.to_string(), b.to_string()))
        })
        .collect()
}

fn parse_corpora(specs: &[String]) -> Result<BTreeMap<String, Corpus>, CliError> {
    let mut map = BTreeMap::new();
    for spec in specs {
        let (lang, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("corpus {:?} is not LANG=PATH", spec)))?;
        if lang.is_empty() || path.is_empty() {
            return Err(CliError::Validation(format!("corpus {:?} is not LANG=PATH", spec)));
        }
        if map.contains_key(lang) {
            return Err(CliError::Validation(format!("corpus for {:?} given twice", lang)));
        }
        map.insert(lang.to_string(), load_corpus(Path::new(path), lang)?);
    }
    Ok(map)
}

/// CSV rows pairing each round-trip score with its system's forward score.
fn scatter_rows(records: &[ScoreRecord]) -> Vec<String> {
    let mut forward: BTreeMap<(&str, &str, &str, &str), f64> = BTreeMap::new();
    for r in records {
        if r.direction == Direction::AToB {
            forward.insert(
                (r.src_lang.as_str(), r.tgt_lang.as_str(), r.system.as_str(), r.metric.as_str()),
                r.score,
            );
        }
    }
    let mut rows = Vec::new();
    for r in records {
        if r.direction == Direction::AToB {
            continue;
        }
        let key =
            (r.src_lang.as_str(), r.tgt_lang.as_str(), r.system.as_str(), r.metric.as_str());
        if let Some(trans) = forward.get(&key) {
            rows.push(format!(
                "{},{},{}-{},{},{},{}",
                r.score, trans, r.src_lang, r.tgt_lang, r.system, r.metric, r.direction
            ));
        }
    }
    rows
}

pub fn score(config: &RunConfig, args: &ScoreArgs) -> Result<(), CliError> {
    let pairs = parse_pairs(&args.pairs)?;
    let corpora = parse_corpora(&args.corpora)?;
    let system_names: Vec<String> = if args.systems.is_empty() {
        config.systems.keys().cloned().collect()
    } else {
        args.systems.clone()
    };
    if system_names.is_empty() {
        return Err(CliError::Validation(
            "no systems: pass --systems or define systems in the config".to_string(),
        ));
    }
    let metrics =
        config.metric_ids(if args.metrics.is_empty() { None } else { Some(&args.metrics) })?;
    let vocab = config.load_vocab(&metrics)?;
    let cache = open_cache(config)?;
    let ctx = ScoreContext {
        cache: &cache,
        opts: config.translate_options(),
        vocab: vocab.as_ref(),
    };
    let systems: Vec<Arc<dyn Translator>> = system_names
        .iter()
        .map(|n| config.build_system(n))
        .collect::<Result<_, _>>()?;
    let system_refs: Vec<&dyn Translator> = systems.iter().map(|s| s.as_ref()).collect();

    let outcome = score_matrix(&pairs, &system_refs, &corpora, &metrics, &ctx)?;
    for skip in &outcome.skipped {
        eprintln!("skipped: {}", skip);
    }
    write_records(&args.out, &outcome.records, &meta(config, "records"))?;
    if let Some(plot) = &args.plot_data {
        plot_csv(
            plot,
            config,
            "self_score,trans_score,pair,system,metric,direction",
            &scatter_rows(&outcome.records),
        )?;
    }

    let rows: Vec<Vec<String>> = outcome
        .records
        .iter()
        .map(|r| {
            vec![
                format!("{}-{}", r.src_lang, r.tgt_lang),
                r.system.clone(),
                r.direction.to_string(),
                r.metric.clone(),
                format!("{:.2}", r.score),
            ]
        })
        .collect();
    print!("{}", format_table(&["pair", "system", "direction", "metric", "score"], &rows));
    println!("wrote {} records to {}", outcome.records.len(), args.out.display());
    Ok(())
}

pub fn fit(config: &RunConfig, args: &FitArgs) -> Result<(), CliError> {
    let mut records = Vec::new();
    for path in &args.records {
        records.extend(read_records(path)?);
    }
    let target_name = match &args.target_metric {
        Some(name) => name.clone(),
        None => config
            .metrics
            .names
            .first()
            .cloned()
            .ok_or_else(|| CliError::Validation("config names no metrics".to_string()))?,
    };
    let spec = if args.features.is_empty() {
        FeatureSpec::self_scores_both(&target_name)
    } else {
        FeatureSpec::from_names(&args.features)?
    };
    let set = build_training_set(&records, &spec, &target_name)?;
    for d in &set.diagnostics {
        eprintln!("skipped: {}", d);
    }
    if set.samples.is_empty() {
        return Err(CliError::Validation("no usable training samples".to_string()));
    }
    let target_id = config.metric_ids(Some(std::slice::from_ref(&target_name)))?.remove(0);
    let model = fit_ols(&set.samples, &spec, target_id, args.standardize)?;
    save_model(&args.out, &model)?;
    let sidecar = serde_json::json!({
        "format": "rtt-qe/model-meta",
        "format_version": 1,
        "tool_version": crate::TOOL_VERSION,
        "config_digest": config.digest(),
        "model_file": args.out.file_name().map(|n| n.to_string_lossy().into_owned()),
        "training_samples": model.training.n_samples,
    });
    let mut sidecar_text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    sidecar_text.push('\n');
    let meta_path = sidecar_path(&args.out);
    write_file(&meta_path, &sidecar_text)?;

    let mut rows: Vec<Vec<String>> = model
        .spec
        .names()
        .iter()
        .zip(&model.weights)
        .map(|(n, w)| vec![n.clone(), format!("{}", w)])
        .collect();
    rows.push(vec!["(intercept)".to_string(), format!("{}", model.intercept)]);
    print!("{}", format_table(&["feature", "weight"], &rows));
    println!("samples: {}", model.training.n_samples);
    println!("model: {}", args.out.display());
    Ok(())
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(".meta.json");
    path.with_file_name(name)
}

pub fn predict(config: &RunConfig, args: &PredictArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let records = read_records(&args.records)?;
    let table = build_features(&records, &model.spec)?;
    for d in &table.diagnostics {
        eprintln!("skipped: {}", d);
    }
    if table.rows.is_empty() {
        return Err(CliError::Validation(
            "no feature rows could be built from the records".to_string(),
        ));
    }
    let predictions = predict_rows(&model, &table.rows, args.clamp)?;

    let mut text = serde_json::to_string(&meta(config, "predictions")).expect("meta serializes");
    text.push('\n');
    for (row, p) in table.rows.iter().zip(&predictions) {
        let line = serde_json::json!({
            "src_lang": row.pair.0,
            "tgt_lang": row.pair.1,
            "system": row.system,
            "target_metric": model.target_metric.name.as_str(),
            "prediction": p,
            "clamped": args.clamp,
        });
        text.push_str(&serde_json::to_string(&line).expect("prediction serializes"));
        text.push('\n');
    }
    write_file(&args.out, &text)?;

    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .zip(&predictions)
        .map(|(row, p)| {
            vec![
                format!("{}-{}", row.pair.0, row.pair.1),
                row.system.clone(),
                format!("{:.2}", p),
            ]
        })
        .collect();
    print!("{}", format_table(&["pair", "system", "prediction"], &rows));
    println!("wrote {} predictions to {}", predictions.len(), args.out.display());
    Ok(())
}

fn read_floats(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, token) in text.split_whitespace().enumerate() {
        let value = token.parse::<f64>().map_err(|_| {
            CliError::Validation(format!(
                "{}: value {} ({:?}) is not a number",
                path.display(),
                i + 1,
                token
            ))
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn eval(config: &RunConfig, args: &EvalArgs) -> Result<(), CliError> {
    let pred = read_floats(&args.pred)?;
    let truth = read_floats(&args.truth)?;
    let report = error_report(&pred, &truth)?;
    println!("n: {}", report.n);
    println!("mae: {}", report.mae);
    println!("rmse: {}", report.rmse);
    match report.pearson_r {
        Some(r) => println!("pearson_r: {}", r),
        None => println!("pearson_r: undefined"),
    }
    match report.kendall_tau {
        Some(t) => println!("kendall_tau: {}", t),
        None => println!("kendall_tau: undefined"),
    }
    for note in &report.notes {
        eprintln!("note: {}", note);
    }
    if let Some(out) = &args.out {
        write_json_report(out, config, "eval-report", &report)?;
    }
    if let Some(plot) = &args.plot_data {
        let rows: Vec<String> =
            pred.iter().zip(&truth).map(|(p, t)| format!("{},{}", p, t)).collect();
        plot_csv(plot, config, "pred,truth", &rows)?;
    }
    Ok(())
}

fn parse_entries(path: &Path) -> Result<Vec<RankEntry>, CliError> {
    let text = read_file(path)?;
    let mut entries = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_content {
            seen_content = true;
            if fields.first() == Some(&"system") {
                continue;
            }
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(CliError::Validation(format!(
                "{}: line {}: expected system,predicted[,truth]",
                path.display(),
                idx + 1
            )));
        }
        let number = |text: &str| {
            text.parse::<f64>().map_err(|_| {
                CliError::Validation(format!(
                    "{}: line {}: {:?} is not a number",
                    path.display(),
                    idx + 1,
                    text
                ))
            })
        };
        let predicted = number(fields[1])?;
        let truth = match fields.get(2) {
            Some(t) if !t.is_empty() => Some(number(t)?),
            _ => None,
        };
        entries.push(RankEntry { system: fields[0].to_string(), predicted, truth });
    }
    Ok(entries)
}

fn rank_display(rank: f64) -> String {
    if rank.fract() == 0.0 {
        format!("{}", rank as i64)
    } else {
        format!("{}", rank)
    }
}

pub fn rank(config: &RunConfig, args: &RankArgs) -> Result<(), CliError> {
    let entries = parse_entries(&args.entries)?;
    let report = rank_systems(&entries)?;
    let rows: Vec<Vec<String>> = report
        .systems
        .iter()
        .map(|s| {
            vec![
                rank_display(s.predicted_rank),
                s.system.clone(),
                format!("{:.4}", s.predicted),
                s.truth.map(|t| format!("{:.4}", t)).unwrap_or_else(|| "-".to_string()),
                s.true_rank.map(rank_display).unwrap_or_else(|| "-".to_string()),
            ]
        })
        .collect();
    print!(
        "{}",
        format_table(&["rank", "system", "predicted", "truth", "true_rank"], &rows)
    );
    if let Some(tau) = report.kendall_tau {
        println!("kendall_tau: {}", tau);
    }
    if let Some(r) = report.pearson_r {
        println!("pearson_r: {}", r);
    }
    for note in &report.notes {
        eprintln!("note: {}", note);
    }
    if let Some(out) = &args.out {
        write_json_report(out, config, "ranking-report", &report)?;
    }
    Ok(())
}

pub fn copystats(_config: &RunConfig, args: &CopystatsArgs) -> Result<(), CliError> {
    let source = load_corpus(&args.source, "source")?;
    let output = load_corpus(&args.output, "output")?;
    let stats = copy_stats(source.segments(), output.segments())?;
    if args.verbose {
        println!("{}", format_args!("{}\t{}\t{}", "sentence", "copied", "pct"));
        for (i, (s, o)) in source.segments().iter().zip(output.segments()).enumerate() {
            let one = copy_stats(std::slice::from_ref(s), std::slice::from_ref(o))?;
            println!("{}\t{}\t{:.2}", i + 1, one.avg_copy_count, one.avg_copy_pct);
        }
    }
    println!("sentences: {}", stats.sentences);
    println!("avg_copy_count: {}", stats.avg_copy_count);
    println!("avg_copy_pct: {}", stats.avg_copy_pct);
    println!("avg_copy_pct_source: {}", stats.avg_copy_pct_source);
    Ok(())
}

pub fn synth(config: &RunConfig, args: &SynthArgs) -> Result<(), CliError> {
    let seed = args.seed.or(config.seed).ok_or_else(|| {
        CliError::Validation("synth needs a seed: pass --seed or set one in the config".to_string())
    })?;
    let mut out_config = config.clone();
    out_config.seed = Some(seed);
    let mut names: Vec<(String, f64)> = Vec::new();
    for i in 0..=16u32 {
        let rate = f64::from(i) / 20.0;
        let name = format!("drop-{:02}", i * 5);
        out_config
            .systems
            .insert(name.clone(), SystemSpec::Dropout { rate, base: Some(args.base.clone()) });
        names.push((name, rate));
    }
    // Surfaces unknown bases and reference cycles before anything is written.
    out_config.build_system("drop-00")?;
    let mut text = serde_json::to_string_pretty(&out_config).expect("config serializes");
    text.push('\n');
    write_file(&args.out, &text)?;

    let rows: Vec<Vec<String>> =
        names.iter().map(|(n, r)| vec![n.clone(), format!("{}", r)]).collect();
    print!("{}", format_table(&["system", "rate"], &rows));
    println!("systems: {}", names.len());
    println!("config: {}", args.out.display());
    Ok(())
}

pub fn partition(_config: &RunConfig, args: &PartitionArgs) -> Result<(), CliError> {
    let registry = match &args.registry {
        Some(path) => Registry::from_csv_path(path)?,
        None => Registry::bundled_ae33(),
    };
    let partition = enumerate_pairs(registry.languages())?;
    let train_test =
        registry.languages().iter().filter(|l| l.usage == Usage::TrainTest).count();
    println!(
        "languages: {} train+test, {} test-only",
        train_test,
        registry.len() - train_test
    );
    println!("pairs (Type I, Type II, Type III): {}", partition);
    println!("total ordered pairs: {}", partition.total());
    Ok(())
}
