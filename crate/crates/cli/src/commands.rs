use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use uptake_core::corpus::{
    aggregate_labels, extract_pairs, level_counts, load_annotations, load_pairs, load_transcripts, read_gold_labels,
    read_zscores, write_gold_labels, write_pairs, write_zscores, zscore_judgments, ExchangePair, ExtractConfig,
    TranscriptFormat,
};
use uptake_core::embeddings::{SentenceVectorStore, WordVectorStore};
use uptake_core::nuc::{
    accuracy, balanced_cross_entropy, build_nuc_dataset, read_nuc_dataset, score_corpus_pjsd, split_holdout,
    train_reference_classifier, write_nuc_dataset, ClassifierParams, Featurizer, TrainHyper, TrainingSet,
};
use uptake_core::similarity::{score_all, MetricContext, MetricId, MetricName};
use uptake_core::stats::{
    bootstrap_ci, conversation_aggregate, cue_rates, fleiss_kappa, leave_out_agreement, ols_named, phenomenon_delta,
    quantile_transform, read_tags, residual_gap_set, spearman, ttest_two_sample, PhenomenonMapping, RatingMatrix,
};
use uptake_core::textprep::{Preprocessor, StopwordList};
use uptake_core::{selftest, ScoreTable};

use crate::args::*;

/// Files a data-producing command read and wrote.
pub struct Produced {
    pub primary: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn write_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(path)?;
    body(&mut w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn load_labels(path: &Path) -> Result<BTreeMap<String, f64>> {
    let labels = read_gold_labels(open(path)?).with_context(|| format!("reading labels {}", path.display()))?;
    Ok(labels.into_iter().map(|l| (l.pair_id, l.value)).collect())
}

fn load_scores(path: &Path) -> Result<ScoreTable> {
    ScoreTable::load(path).with_context(|| format!("reading scores {}", path.display()))
}

fn load_words(path: Option<&PathBuf>) -> Result<Option<WordVectorStore<f64>>> {
    path.map(|p| WordVectorStore::load(p).with_context(|| format!("reading vectors {}", p.display())))
        .transpose()
}

pub fn run(command: &Command, seed: u64) -> Result<Option<Produced>> {
    match command {
        Command::Extract(a) => extract(a),
        Command::AnnotateAgg(a) => annotate_agg(a),
        Command::Score(a) => score(a),
        Command::NucBuild(a) => nuc_build(a, seed),
        Command::NucTrain(a) => nuc_train(a, seed),
        Command::NucScore(a) => nuc_score(a, seed),
        Command::EvalCorr(a) => eval_corr(a, seed),
        Command::EvalAgreement(a) => eval_agreement(a),
        Command::AnalyzeResiduals(a) => analyze_residuals(a),
        Command::AnalyzeDamsl(a) => analyze_damsl(a),
        Command::AnalyzeOutcomes(a) => analyze_outcomes(a),
        Command::Selftest(a) => run_selftest(a),
    }
}

fn extract(a: &ExtractArgs) -> Result<Option<Produced>> {
    let format = match a.format {
        Format::Jsonl => TranscriptFormat::Jsonl,
        Format::Csv => TranscriptFormat::Csv,
    };
    let transcripts = load_transcripts(&a.input, format)?;
    let cfg = ExtractConfig {
        min_s_tokens: a.min_s_tokens,
        inaudible_marker: a.inaudible_marker.clone(),
        source: a.source.clone(),
    };
    let pairs = extract_pairs(&transcripts, &cfg);
    if pairs.is_empty() {
        warn!("no pairs survived extraction");
    }
    info!("{} transcripts, {} pairs", transcripts.len(), pairs.len());
    write_with(&a.out, |w| Ok(write_pairs(&pairs, w)?))?;
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs: vec![a.input.clone()],
        outputs: vec![a.out.clone()],
    }))
}

fn annotate_agg(a: &AnnotateAggArgs) -> Result<Option<Produced>> {
    let judgments = load_annotations(&a.input)?;
    let labels = aggregate_labels(&judgments);
    info!("{} judgments, {} labelled pairs", judgments.len(), labels.len());
    write_with(&a.out, |w| Ok(write_gold_labels(&labels, w)?))?;
    let mut outputs = vec![a.out.clone()];
    if let Some(path) = &a.zscores_out {
        let z = zscore_judgments(&judgments);
        write_with(path, |w| Ok(write_zscores(&z, w)?))?;
        outputs.push(path.clone());
    }
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs: vec![a.input.clone()],
        outputs,
    }))
}

fn score(a: &ScoreArgs) -> Result<Option<Produced>> {
    let pairs = load_pairs(&a.pairs)?;
    let mut inputs = vec![a.pairs.clone()];
    let words = load_words(a.vectors.as_ref())?;
    let sentences = a
        .sent_vectors
        .as_ref()
        .map(|p| SentenceVectorStore::<f64>::load(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    inputs.extend(a.vectors.iter().chain(&a.sent_vectors).cloned());

    let mut pre = Preprocessor::new();
    let stop_id = match &a.stopwords {
        Some(path) => {
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "custom".into());
            pre.register(StopwordList::from_path(id.clone(), path)?);
            inputs.push(path.clone());
            Some(id)
        }
        None => None,
    };

    let mut metrics: Vec<MetricId> = if a.metrics.is_empty() {
        let mut names = vec![
            MetricName::Lcs,
            MetricName::PctSInT,
            MetricName::PctTInS,
            MetricName::Jaccard,
            MetricName::Bleu,
        ];
        if words.is_some() {
            names.extend([MetricName::GloveAlign, MetricName::GloveUtt]);
        }
        if sentences.is_some() {
            names.extend([MetricName::SentCosine, MetricName::SentInner]);
        }
        names.into_iter().map(MetricId::new).collect()
    } else {
        a.metrics
            .iter()
            .map(|m| m.parse::<MetricId>())
            .collect::<uptake_core::Result<_>>()?
    };
    if let Some(id) = &stop_id {
        for m in &mut metrics {
            m.profile = m.profile.clone().with_stopword_list(id.clone());
        }
    }

    let mut ctx = MetricContext::new(&pre);
    ctx.words = words.as_ref();
    ctx.sentences = sentences.as_ref();
    let outcome = score_all(&pairs, &metrics, &ctx)?;
    let mut table = outcome.table;
    info!(
        "{} pairs x {} metrics, {} missing cells",
        pairs.len(),
        metrics.len(),
        outcome.missing
    );

    if let Some(path) = &a.external {
        let ext = load_scores(path)?;
        if !ext.has_column("external") {
            bail!("{} has no `external` column", path.display());
        }
        let mut only = ScoreTable::new(["external"]);
        let mut dropped = 0;
        for (id, v) in ext.column("external")? {
            if table.row(id).is_some() {
                only.insert_row(id, vec![v])?;
            } else {
                dropped += 1;
            }
        }
        if dropped > 0 {
            warn!("{dropped} external score(s) name unknown pairs and were dropped");
        }
        table = table.merge(&only)?;
        inputs.push(path.clone());
    }

    write_with(&a.out, |w| Ok(table.write_csv(w)?))?;
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs,
        outputs: vec![a.out.clone()],
    }))
}

fn nuc_build(a: &NucBuildArgs, seed: u64) -> Result<Option<Produced>> {
    let pairs = load_pairs(&a.pairs)?;
    let examples = build_nuc_dataset(&pairs, a.k, seed)?;
    info!("{} pairs -> {} examples", pairs.len(), examples.len());
    write_with(&a.out, |w| Ok(write_nuc_dataset(&examples, w)?))?;
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs: vec![a.pairs.clone()],
        outputs: vec![a.out.clone()],
    }))
}

#[derive(Serialize)]
struct HeldOut {
    n_examples: usize,
    balanced_cross_entropy: f64,
    pjsd: f64,
    accuracy: f64,
}

fn nuc_train(a: &NucTrainArgs, seed: u64) -> Result<Option<Produced>> {
    let examples = read_nuc_dataset(open(&a.data)?)?;
    let words = load_words(a.features.vectors.as_ref())?;
    let pre = Preprocessor::new();
    let mut ctx = MetricContext::new(&pre);
    ctx.words = words.as_ref();
    let featurizer = Featurizer::new(ctx);
    let hyper = TrainHyper {
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        batch_size: a.batch_size,
        l2: a.l2,
        seed,
    };
    let (train, held) = match a.holdout {
        Some(f) if !(0.0..1.0).contains(&f) => bail!("--holdout must be in [0, 1), got {f}"),
        Some(f) => split_holdout(&examples, f, seed),
        None => (examples, Vec::new()),
    };
    let outcome = train_reference_classifier(&train, &featurizer, &hyper)?;
    if let Some(last) = outcome.history.last() {
        info!("final epoch loss {:.5}", last.loss);
    }
    write_with(&a.out, |w| {
        Ok(w.write_all((outcome.params.to_json() + "\n").as_bytes())?)
    })?;
    let mut outputs = vec![a.out.clone()];

    if let Some(path) = &a.history_out {
        let mut w = csv_writer(path)?;
        w.write_record(["epoch", "loss", "objective", "mean_pjsd"])?;
        for e in &outcome.history {
            w.write_record([
                e.epoch.to_string(),
                e.loss.to_string(),
                e.objective.to_string(),
                opt(e.mean_pjsd),
            ])?;
        }
        w.flush()?;
        outputs.push(path.clone());
    }

    let held_out = if held.is_empty() {
        None
    } else {
        let ce = balanced_cross_entropy(&outcome.params, &featurizer, &held)?;
        let set = TrainingSet::from_examples(&held, &featurizer);
        Some(HeldOut {
            n_examples: held.len(),
            balanced_cross_entropy: ce,
            pjsd: std::f64::consts::LN_2 - ce,
            accuracy: accuracy(&outcome.params, &set),
        })
    };
    let summary = summary_path(&a.out);
    write_json(
        &summary,
        &json!({
            "command": "nuc-train",
            "seed": seed,
            "n_train_examples": train.len(),
            "history": outcome.history,
            "held_out": held_out,
        }),
    )?;
    outputs.push(summary);

    let mut inputs = vec![a.data.clone()];
    inputs.extend(a.features.vectors.iter().cloned());
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs,
        outputs,
    }))
}

fn nuc_score(a: &NucScoreArgs, seed: u64) -> Result<Option<Produced>> {
    let pairs = load_pairs(&a.pairs)?;
    let params = ClassifierParams::<f64>::load(&a.params)?;
    let words = load_words(a.features.vectors.as_ref())?;
    let pre = Preprocessor::new();
    let mut ctx = MetricContext::new(&pre);
    ctx.words = words.as_ref();
    let featurizer = Featurizer::new(ctx);
    let table = score_corpus_pjsd(&params, &featurizer, &pairs, a.k, seed)?;
    write_with(&a.out, |w| Ok(table.write_csv(w)?))?;
    let mut inputs = vec![a.pairs.clone(), a.params.clone()];
    inputs.extend(a.features.vectors.iter().cloned());
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs,
        outputs: vec![a.out.clone()],
    }))
}

#[derive(Serialize)]
struct CorrRow {
    metric: String,
    n: usize,
    rho: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    iterations: Option<usize>,
    degenerate: usize,
    outside_ci: bool,
    error: Option<String>,
}

fn eval_corr(a: &EvalCorrArgs, seed: u64) -> Result<Option<Produced>> {
    let table = load_scores(&a.scores)?;
    let labels = load_labels(&a.labels)?;
    let metrics: Vec<String> = if a.metrics.is_empty() {
        table.columns().to_vec()
    } else {
        a.metrics.clone()
    };
    let mut rows = Vec::new();
    for m in &metrics {
        let col = table.column_map(m)?;
        let (x, y): (Vec<f64>, Vec<f64>) = labels
            .iter()
            .filter_map(|(id, &l)| col.get(id).map(|&s| (s, l)))
            .unzip();
        let row = match bootstrap_ci(&x, &y, a.iterations, a.level, seed) {
            Ok(r) => CorrRow {
                metric: m.clone(),
                n: r.n,
                rho: Some(r.rho),
                ci_low: r.ci_low,
                ci_high: r.ci_high,
                iterations: r.iterations,
                degenerate: r.degenerate,
                outside_ci: r.outside_ci,
                error: None,
            },
            Err(e) => {
                warn!("{m}: {e}");
                CorrRow {
                    metric: m.clone(),
                    n: x.len(),
                    rho: spearman(&x, &y).ok().map(|r| r.rho),
                    ci_low: None,
                    ci_high: None,
                    iterations: None,
                    degenerate: 0,
                    outside_ci: false,
                    error: Some(e.to_string()),
                }
            }
        };
        if row.outside_ci {
            warn!("{m}: point estimate lies outside its bootstrap interval");
        }
        rows.push(row);
    }

    let mut w = csv_writer(&a.out)?;
    w.write_record([
        "metric",
        "n",
        "rho",
        "ci_low",
        "ci_high",
        "iterations",
        "degenerate",
        "outside_ci",
    ])?;
    for r in &rows {
        w.write_record([
            r.metric.clone(),
            r.n.to_string(),
            opt(r.rho),
            opt(r.ci_low),
            opt(r.ci_high),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            r.degenerate.to_string(),
            r.outside_ci.to_string(),
        ])?;
    }
    w.flush()?;
    let summary = summary_path(&a.out);
    write_json(
        &summary,
        &json!({ "command": "eval-corr", "seed": seed, "level": a.level, "results": rows }),
    )?;
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs: vec![a.scores.clone(), a.labels.clone()],
        outputs: vec![a.out.clone(), summary],
    }))
}

/// Fleiss' kappa over the items rated by the most common number of raters.
fn kappa_from_counts(counts: &[(String, [usize; 3])]) -> (Option<f64>, usize, Option<String>) {
    let mut by_size: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, c) in counts {
        *by_size.entry(c.iter().sum()).or_default() += 1;
    }
    let Some((&size, _)) = by_size.iter().max_by_key(|(&s, &n)| (n, s)) else {
        return (None, 0, Some("no on-topic judgments".into()));
    };
    let rows: Vec<Vec<usize>> = counts
        .iter()
        .filter(|(_, c)| c.iter().sum::<usize>() == size)
        .map(|(_, c)| c.to_vec())
        .collect();
    match fleiss_kappa::<f64>(&rows) {
        Ok(k) => (Some(k), rows.len(), None),
        Err(e) => (None, rows.len(), Some(e.to_string())),
    }
}

fn eval_agreement(a: &EvalAgreementArgs) -> Result<Option<Produced>> {
    let (z, kappa, input) = match (&a.annotations, &a.zscores) {
        (Some(path), _) => {
            let j = load_annotations(path)?;
            (
                zscore_judgments(&j),
                Some(kappa_from_counts(&level_counts(&j))),
                path.clone(),
            )
        }
        (None, Some(path)) => (read_zscores(open(path)?)?, None, path.clone()),
        (None, None) => bail!("need --annotations or --zscores"),
    };
    let matrix = RatingMatrix::from_zscores(&z);
    let agreement = leave_out_agreement(&matrix.z)?;
    info!(
        "leave-out agreement {:.4} over {} raters",
        agreement.mean,
        matrix.raters.len()
    );

    let mut w = csv_writer(&a.out)?;
    w.write_record(["rater_id", "n_items", "rho"])?;
    for (r, rho) in matrix.raters.iter().zip(&agreement.per_rater) {
        let n = matrix.z[matrix.raters.iter().position(|x| x == r).unwrap()]
            .iter()
            .filter(|v| v.is_some())
            .count();
        w.write_record([r.clone(), n.to_string(), opt(*rho)])?;
    }
    w.flush()?;
    let summary = summary_path(&a.out);
    let kappa_json = kappa.map(|(k, n, err)| json!({ "kappa": k, "n_items": n, "error": err }));
    write_json(
        &summary,
        &json!({
            "command": "eval-agreement",
            "n_raters": matrix.raters.len(),
            "n_items": matrix.items.len(),
            "leave_out_mean": agreement.mean,
            "fleiss": kappa_json,
        }),
    )?;
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs: vec![input],
        outputs: vec![a.out.clone(), summary],
    }))
}

fn analyze_residuals(a: &AnalyzeResidualsArgs) -> Result<Option<Produced>> {
    let labels = load_labels(&a.labels)?;
    let table = load_scores(&a.scores)?;
    let gap = residual_gap_set(
        &labels,
        &table.column_map(&a.a)?,
        &table.column_map(&a.b)?,
        a.threshold_sd,
    )?;
    info!("{} of {} pairs selected", gap.selected.len(), gap.d.len());
    let mut w = csv_writer(&a.out)?;
    w.write_record(["pair_id", "d", "selected"])?;
    for (id, d) in &gap.d {
        w.write_record([id.clone(), d.to_string(), gap.selected.contains(id).to_string()])?;
    }
    w.flush()?;
    let summary = summary_path(&a.out);
    write_json(
        &summary,
        &json!({
            "command": "analyze-residuals",
            "a": a.a,
            "b": a.b,
            "threshold_sd": a.threshold_sd,
            "n": gap.d.len(),
            "n_selected": gap.selected.len(),
            "mean": gap.mean,
            "sd": gap.sd,
            "cutoff": gap.cutoff,
        }),
    )?;
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs: vec![a.labels.clone(), a.scores.clone()],
        outputs: vec![a.out.clone(), summary],
    }))
}

/// Quantile-transformed values of a column over all rows where it is present.
fn quantiles(table: &ScoreTable, column: &str) -> Result<BTreeMap<String, f64>> {
    let col = table.column_map(column)?;
    let q = quantile_transform(&col.values().copied().collect::<Vec<_>>());
    Ok(col.into_keys().zip(q).collect())
}

fn analyze_damsl(a: &AnalyzeDamslArgs) -> Result<Option<Produced>> {
    let table = load_scores(&a.scores)?;
    let tags = read_tags(open(&a.tags)?)?;
    let deltas = phenomenon_delta(
        &quantiles(&table, &a.a)?,
        &quantiles(&table, &a.b)?,
        &tags,
        &PhenomenonMapping::default(),
    )?;
    let mut w = csv_writer(&a.out)?;
    w.write_record(["phenomenon", "n", "delta", "p_value"])?;
    for d in &deltas {
        w.write_record([d.phenomenon.to_string(), d.n.to_string(), opt(d.delta), opt(d.p_value)])?;
    }
    w.flush()?;
    let summary = summary_path(&a.out);
    write_json(
        &summary,
        &json!({ "command": "analyze-damsl", "a": a.a, "b": a.b, "n_tagged": tags.len(), "results": deltas }),
    )?;
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs: vec![a.scores.clone(), a.tags.clone()],
        outputs: vec![a.out.clone(), summary],
    }))
}

fn read_outcomes(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut rd = csv::Reader::from_reader(open(path)?);
    let header = rd.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["conversation", "outcome"] {
        bail!("{}: header must be conversation,outcome", path.display());
    }
    let mut out = BTreeMap::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.with_context(|| format!("{}, line {line}", path.display()))?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .with_context(|| format!("{}, line {line}: bad outcome {:?}", path.display(), &rec[1]))?;
        if !v.is_finite() {
            bail!("{}, line {line}: non-finite outcome", path.display());
        }
        if out.insert(rec[0].to_string(), v).is_some() {
            bail!("{}, line {line}: duplicate conversation {:?}", path.display(), &rec[0]);
        }
    }
    Ok(out)
}

struct ConversationRow {
    conversation: String,
    n_pairs: usize,
    score: f64,
    question_rate: f64,
    exclamation_rate: f64,
    outcome: f64,
}

fn analyze_outcomes(a: &AnalyzeOutcomesArgs) -> Result<Option<Produced>> {
    let pairs: Vec<ExchangePair> = load_pairs(&a.pairs)?;
    let table = load_scores(&a.scores)?;
    let outcomes = read_outcomes(&a.outcomes)?;
    let scores: BTreeMap<String, (f64, usize)> = conversation_aggregate(&table, &a.metric, &pairs)?
        .into_iter()
        .map(|c| (c.conversation, (c.mean, c.n_pairs)))
        .collect();
    let mut rows = Vec::new();
    for cue in cue_rates(&pairs) {
        let (Some(&(score, n_scored)), Some(&outcome)) =
            (scores.get(&cue.conversation), outcomes.get(&cue.conversation))
        else {
            continue;
        };
        rows.push(ConversationRow {
            conversation: cue.conversation,
            n_pairs: n_scored,
            score,
            question_rate: cue.question_rate,
            exclamation_rate: cue.exclamation_rate,
            outcome,
        });
    }
    let missing = outcomes.len().saturating_sub(rows.len());
    if missing > 0 {
        warn!("{missing} conversation(s) with an outcome have no scored pairs");
    }
    info!("{} conversations", rows.len());

    let predictors: [(&str, fn(&ConversationRow) -> f64); 3] = [
        (a.metric.as_str(), |r| r.score),
        ("question_rate", |r| r.question_rate),
        ("exclamation_rate", |r| r.exclamation_rate),
    ];
    let y: Vec<f64> = rows.iter().map(|r| r.outcome).collect();
    let size: Vec<f64> = rows.iter().map(|r| r.n_pairs as f64).collect();
    // conversation length is a control only when it is not constant
    let size_varies = size.windows(2).any(|w| w[0] != w[1]);
    let mut results = Vec::new();
    for (name, get) in predictors {
        let x: Vec<f64> = rows.iter().map(get).collect();
        let result = if a.ttest {
            if let Some(bad) = y.iter().find(|&&v| v != 0.0 && v != 1.0) {
                bail!("--ttest needs outcomes of 0 or 1, found {bad}");
            }
            let (hi, lo): (Vec<(f64, f64)>, Vec<(f64, f64)>) =
                x.iter().copied().zip(y.iter().copied()).partition(|p| p.1 == 1.0);
            let hi: Vec<f64> = hi.into_iter().map(|p| p.0).collect();
            let lo: Vec<f64> = lo.into_iter().map(|p| p.0).collect();
            match ttest_two_sample(&hi, &lo) {
                Ok(t) => json!({ "predictor": name, "ttest": t, "n_outcome_1": hi.len(), "n_outcome_0": lo.len() }),
                Err(e) => json!({ "predictor": name, "error": e.to_string() }),
            }
        } else {
            let mut regressors = vec![(name.to_string(), x)];
            if size_varies {
                regressors.push(("n_pairs".to_string(), size.clone()));
            }
            match ols_named(&y, &regressors) {
                Ok(r) => json!({
                    "predictor": name,
                    "term": r.term(name),
                    "r_squared": r.r_squared,
                    "n": r.n,
                    "df": r.df,
                    "approximate": r.approximate,
                }),
                Err(e) => json!({ "predictor": name, "error": e.to_string() }),
            }
        };
        if let Some(e) = result.get("error") {
            warn!("{name}: {e}");
        }
        results.push(result);
    }

    let mut w = csv_writer(&a.out)?;
    w.write_record([
        "conversation",
        "n_pairs",
        &a.metric,
        "question_rate",
        "exclamation_rate",
        "outcome",
    ])?;
    for r in &rows {
        w.write_record([
            r.conversation.clone(),
            r.n_pairs.to_string(),
            r.score.to_string(),
            r.question_rate.to_string(),
            r.exclamation_rate.to_string(),
            r.outcome.to_string(),
        ])?;
    }
    w.flush()?;
    let summary = summary_path(&a.out);
    write_json(
        &summary,
        &json!({
            "command": "analyze-outcomes",
            "metric": a.metric,
            "test": if a.ttest { "welch-t" } else { "ols" },
            "controls": if !a.ttest && size_varies { vec!["n_pairs"] } else { vec![] },
            "n_conversations": rows.len(),
            "results": results,
        }),
    )?;
    Ok(Some(Produced {
        primary: a.out.clone(),
        inputs: vec![a.pairs.clone(), a.scores.clone(), a.outcomes.clone()],
        outputs: vec![a.out.clone(), summary],
    }))
}

fn run_selftest(a: &SelftestArgs) -> Result<Option<Produced>> {
    let checks = selftest::run();
    let report = selftest::report(&checks);
    match &a.out {
        Some(path) => write_with(path, |w| Ok(w.write_all(report.as_bytes())?))?,
        None => print!("{report}"),
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(None)
}
