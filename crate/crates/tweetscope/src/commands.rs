//! One function per subcommand. Each returns a JSON summary for stdout.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tweetscope_core::annotate::{AnnotationSession, SampleItem, SessionEvent, SessionStatus};
use tweetscope_core::cluster::{
    elbow_select, minibatch_kmeans, seed_for_k, stratified_sample, tfidf_fit_transform, ClusterModel, ElbowCurve,
    TfIdfModel,
};
use tweetscope_core::ingest::{
    dedupe, filter_corpus, merge_case_counts, CaseSource, CorpusFilter, CorpusManifest, DateWindow, TweetRecord,
};
use tweetscope_core::lda::{
    build_corpus, topic_overlap, topic_prevalence_report, train_with, Dictionary, LdaModel, LdaParams, ReportOrder,
};
use tweetscope_core::textnorm::{preprocess as preprocess_doc, StopwordList, TokenizedDoc};
use tweetscope_core::timeseries::{align, bucket_daily, case_series, pearson, DailySeries, SeriesName};

use crate::archive::{parse_hashtag_list, parse_tweet_stream, LineError};
use crate::artifact::{csv_reader, read_json, read_jsonl, write_csv, write_json, write_jsonl, Layout};
use crate::cases::{read_case_table, RowError};
use crate::config::PipelineConfig;
use crate::store::SessionStore;

pub const CORPUS: &str = "corpus";
pub const DOCS: &str = "tokenized_docs";
pub const LDA_MODEL: &str = "lda_model";
pub const CLUSTER_MODEL: &str = "cluster_model";

fn layout(cfg: &PipelineConfig) -> Layout {
    Layout { dir: cfg.output_dir() }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IngestReport {
    #[serde(flatten)]
    pub manifest: CorpusManifest,
    pub lines_parsed: usize,
    pub parse_errors: Vec<LineError>,
    pub filtered_out: usize,
    pub outside_window: usize,
    pub window: Option<DateWindow>,
}

pub fn ingest(cfg: &PipelineConfig) -> anyhow::Result<Value> {
    let archive = cfg.input(&cfg.paths.archive, "archive")?;
    let tags_path = cfg.input(&cfg.paths.hashtags, "hashtag list")?;
    let tags = parse_hashtag_list(&std::fs::read_to_string(&tags_path)?);
    let filter = CorpusFilter::new(&tags, &cfg.ingest.lang, &cfg.ingest.kinds)?;

    let f = File::open(&archive).with_context(|| format!("opening {}", archive.display()))?;
    let parsed = parse_tweet_stream(BufReader::new(f)).with_context(|| format!("reading {}", archive.display()))?;
    let lines_parsed = parsed.records.len();
    let (unique, duplicate_dropped) = dedupe(parsed.records);
    let before = unique.len();
    let kept = filter_corpus(unique, &filter);
    let filtered_out = before - kept.len();
    let window = cfg.date_window();
    let before = kept.len();
    let kept: Vec<TweetRecord> = kept.into_iter().filter(|r| window.is_none_or(|w| w.contains(r.day()))).collect();
    let outside_window = before - kept.len();
    for e in &parsed.errors {
        log::warn!("{}: line {}: {}", archive.display(), e.line, e.message);
    }

    let report = IngestReport {
        manifest: CorpusManifest::from_records(&kept, duplicate_dropped),
        lines_parsed,
        parse_errors: parsed.errors,
        filtered_out,
        outside_window,
        window,
    };
    let l = layout(cfg);
    let hash = cfg.hash();
    write_jsonl(&l.corpus(), CORPUS, &hash, &kept)?;
    write_json(&l.manifest(), "manifest", &hash, &report)?;
    Ok(to_json(&report))
}

fn load_corpus(cfg: &PipelineConfig) -> anyhow::Result<Vec<TweetRecord>> {
    Ok(read_jsonl(&layout(cfg).corpus(), CORPUS).context("run `ingest` first")?.1)
}

pub fn preprocess(cfg: &PipelineConfig) -> anyhow::Result<Value> {
    let records = load_corpus(cfg)?;
    let (stopwords, rejected) = match &cfg.paths.stopwords {
        Some(_) => {
            let p = cfg.input(&cfg.paths.stopwords, "stopword list")?;
            StopwordList::parse(&std::fs::read_to_string(&p)?, &cfg.normalization, &p.display().to_string())
        }
        None => (StopwordList::default(), Vec::new()),
    };
    for r in &rejected {
        log::warn!("stopword entry {r:?} does not normalize to a single token; ignored");
    }
    let docs: Vec<TokenizedDoc> =
        records.iter().map(|r| preprocess_doc(&r.id, &r.text, &cfg.normalization, &stopwords)).collect();
    let empty = docs.iter().filter(|d| d.tokens.is_empty()).count();
    let report = json!({
        "docs": docs.len(),
        "empty_docs": empty,
        "tokens": docs.iter().map(|d| d.tokens.len()).sum::<usize>(),
        "stopwords": stopwords.words.len(),
        "rejected_stopwords": rejected,
    });
    let l = layout(cfg);
    let hash = cfg.hash();
    write_jsonl(&l.docs(), DOCS, &hash, &docs)?;
    write_json(&l.preprocess_report(), "preprocess_report", &hash, &report)?;
    Ok(report)
}

fn load_docs(cfg: &PipelineConfig) -> anyhow::Result<Vec<TokenizedDoc>> {
    Ok(read_jsonl(&layout(cfg).docs(), DOCS).context("run `preprocess` first")?.1)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LdaModelFile {
    pub params: LdaParams,
    pub min_doc_freq: usize,
    pub max_doc_fraction: f64,
    /// Documents left out of the model because they had no tokens.
    pub excluded: Vec<String>,
    pub dictionary: Dictionary,
    pub model: LdaModel,
}

pub fn lda_train(cfg: &PipelineConfig) -> anyhow::Result<Value> {
    let docs = load_docs(cfg)?;
    let build = build_corpus(&docs, cfg.lda.min_doc_freq, cfg.lda.max_doc_fraction)?;
    let params = cfg.lda.params();
    let mut broken = None;
    let model = train_with(&build.corpus, &params, |m| {
        if broken.is_none() {
            broken = m.check_invariants().err().map(|e| format!("iteration {}: {e}", m.iterations_run));
        }
        if m.iterations_run % 100 == 0 {
            log::info!("lda: iteration {}/{}", m.iterations_run, params.iterations);
        }
    })?;
    if let Some(e) = broken {
        bail!("count invariant violated at {e}");
    }
    let summary = json!({
        "docs": model.num_docs(),
        "excluded_docs": build.excluded.len(),
        "vocab_size": model.vocab_size,
        "tokens": model.total_tokens(),
        "num_topics": model.num_topics,
        "iterations": model.iterations_run,
        "alpha_sum": model.alpha_sum(),
    });
    let file = LdaModelFile {
        params,
        min_doc_freq: cfg.lda.min_doc_freq,
        max_doc_fraction: cfg.lda.max_doc_fraction,
        excluded: build.excluded,
        dictionary: build.dictionary,
        model,
    };
    write_json(&layout(cfg).lda_model(), LDA_MODEL, &cfg.hash(), &file)?;
    Ok(summary)
}

fn load_lda(cfg: &PipelineConfig, path: Option<&Path>) -> anyhow::Result<LdaModelFile> {
    let p = path.map_or_else(|| layout(cfg).lda_model(), Path::to_path_buf);
    Ok(read_json(&p, LDA_MODEL).context("run `lda-train` first")?.data)
}

pub fn lda_report(
    cfg: &PipelineConfig,
    order: ReportOrder,
    count: usize,
    model: Option<&Path>,
    out: Option<PathBuf>,
) -> anyhow::Result<Value> {
    let f = load_lda(cfg, model)?;
    let report = topic_prevalence_report(&f.model, &f.dictionary, order, count);
    let name = match order {
        ReportOrder::Descending => format!("lda_top_{count}.csv"),
        ReportOrder::Ascending => format!("lda_bottom_{count}.csv"),
    };
    let out = out.unwrap_or_else(|| layout(cfg).dir.join(name));
    let rows = report.iter().map(|t| {
        let words: Vec<&str> = t.top_words.iter().map(|(w, _)| w.as_str()).collect();
        vec![t.topic_id.to_string(), t.percent.to_string(), t.starred.to_string(), words.join("|")]
    });
    write_csv(&out, &cfg.hash(), &["topic_id", "percent", "starred", "top_words"], rows)?;
    Ok(json!({ "path": out, "topics": report }))
}

pub fn lda_overlap(
    cfg: &PipelineConfig,
    model: Option<&Path>,
    top_n: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<Value> {
    let f = load_lda(cfg, model)?;
    let pairs = topic_overlap(&f.model, &f.dictionary, top_n);
    let out = out.unwrap_or_else(|| layout(cfg).dir.join(format!("lda_overlap_k{}.csv", f.model.num_topics)));
    let rows = pairs.iter().map(|p| vec![p.topic_a.to_string(), p.topic_b.to_string(), p.jaccard.to_string()]);
    write_csv(&out, &cfg.hash(), &["topic_a", "topic_b", "jaccard"], rows)?;
    let max = pairs.iter().map(|p| p.jaccard).fold(0.0, f64::max);
    let mean = if pairs.is_empty() { 0.0 } else { pairs.iter().map(|p| p.jaccard).sum::<f64>() / pairs.len() as f64 };
    Ok(
        json!({ "path": out, "num_topics": f.model.num_topics, "pairs": pairs.len(), "max_jaccard": max, "mean_jaccard": mean }),
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterModelFile {
    pub tweet_ids: Vec<String>,
    pub tfidf: TfIdfModel,
    /// Rows with no known token, kept as zero vectors.
    pub zero_rows: Vec<usize>,
    pub elbow: Option<ElbowCurve>,
    pub model: ClusterModel,
}

pub fn cluster(cfg: &PipelineConfig) -> anyhow::Result<Value> {
    let docs = load_docs(cfg)?;
    let out = tfidf_fit_transform(&docs)?;
    let rows = out.matrix.n_rows();
    let base = cfg.cluster.kmeans(0, cfg.cluster.seed);
    let elbow = match cfg.cluster.k {
        Some(_) => None,
        None => {
            let ks: Vec<usize> = cfg.cluster.candidate_ks.iter().copied().filter(|&k| k <= rows).collect();
            if ks.len() < cfg.cluster.candidate_ks.len() {
                log::warn!("dropping candidate k above the {rows} documents");
            }
            Some(elbow_select(&out.matrix, &ks, &base)?)
        }
    };
    let k = cfg.cluster.k.or(elbow.as_ref().map(|e| e.chosen_k)).expect("k or elbow");
    let model = minibatch_kmeans(&out.matrix, &cfg.cluster.kmeans(k, seed_for_k(cfg.cluster.seed, k)))?;

    let l = layout(cfg);
    let hash = cfg.hash();
    let ids: Vec<String> = docs.iter().map(|d| d.tweet_id.clone()).collect();
    write_csv(
        &l.clusters_csv(),
        &hash,
        &["tweet_id", "cluster_id"],
        ids.iter().zip(&model.labels).map(|(id, c)| vec![id.clone(), c.to_string()]),
    )?;
    if let Some(e) = &elbow {
        let rows = e
            .candidate_ks
            .iter()
            .zip(&e.inertias)
            .map(|(k, i)| vec![k.to_string(), i.to_string(), (*k == e.chosen_k).to_string()]);
        write_csv(&l.elbow_csv(), &hash, &["k", "inertia", "chosen"], rows)?;
    }
    let summary = json!({
        "docs": rows,
        "vocab_size": out.model.idf.len(),
        "zero_rows": out.zero_rows.len(),
        "k": k,
        "inertia": model.inertia,
        "cluster_ratios": model.cluster_ratios,
        "elbow": elbow,
    });
    let file = ClusterModelFile { tweet_ids: ids, tfidf: out.model, zero_rows: out.zero_rows, elbow, model };
    write_json(&l.cluster_model(), CLUSTER_MODEL, &hash, &file)?;
    Ok(summary)
}

pub fn store(cfg: &PipelineConfig) -> SessionStore {
    SessionStore::new(cfg.session_dir())
}

pub fn sample(cfg: &PipelineConfig, session_id: &str) -> anyhow::Result<Value> {
    let l = layout(cfg);
    let cm: ClusterModelFile = read_json(&l.cluster_model(), CLUSTER_MODEL).context("run `cluster` first")?.data;
    let texts: HashMap<String, String> = load_corpus(cfg)?.into_iter().map(|r| (r.id, r.text)).collect();
    let picked = stratified_sample(&cm.tweet_ids, &cm.model.labels, cfg.cluster.per_cluster_n, cfg.cluster.seed)?;
    let mut items = Vec::new();
    for (&cluster_id, ids) in &picked {
        for id in ids {
            let text = texts.get(id).with_context(|| format!("tweet {id} is clustered but not in the corpus"))?;
            items.push(SampleItem { tweet_id: id.clone(), cluster_id, text: text.clone() });
        }
    }
    let event = SessionEvent::Create {
        session_id: session_id.into(),
        annotators: cfg.annotate.annotators.clone(),
        label_set: cfg.annotate.labels.clone(),
        items,
        cluster_ratios: cm.model.cluster_ratios.clone(),
    };
    let st = store(cfg);
    let hash = cfg.hash();
    let session = if st.exists(session_id) {
        // re-running with the same inputs is a no-op; anything else would
        // clobber human work
        let existing = st.events(session_id)?;
        if existing.first().map(|e| &e.event) != Some(&event) {
            bail!("session {session_id} already exists with a different sample");
        }
        st.load(session_id)?
    } else {
        st.create(event, Some(&hash))?
    };
    write_csv(
        &l.sample_csv(),
        &hash,
        &["cluster_id", "tweet_id"],
        session.items().iter().map(|i| vec![i.cluster_id.to_string(), i.tweet_id.clone()]),
    )?;
    let per_cluster: BTreeMap<u32, usize> = picked.iter().map(|(c, v)| (*c, v.len())).collect();
    Ok(json!({
        "session": session_id,
        "items": session.items().len(),
        "per_cluster": per_cluster,
        "annotators": session.annotators(),
    }))
}

fn progress(s: &AnnotationSession) -> Value {
    let missing: BTreeMap<String, usize> = s.missing_counts().into_iter().collect();
    let by_annotator: BTreeMap<&str, usize> =
        s.annotators().iter().map(|a| (a.as_str(), s.items().len() - missing.get(a).copied().unwrap_or(0))).collect();
    json!({ "session": s.session_id(), "status": s.status(), "total": s.items().len(), "labeled": by_annotator })
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    annotator: String,
    tweet_id: String,
    label: String,
}

pub enum LabelInput {
    One { annotator: String, tweet_id: String, label: String },
    File(PathBuf),
}

pub fn label(cfg: &PipelineConfig, session_id: &str, input: LabelInput) -> anyhow::Result<Value> {
    let st = store(cfg);
    let mut s = st.load(session_id)?;
    let rows = match input {
        LabelInput::One { annotator, tweet_id, label } => vec![LabelRow { annotator, tweet_id, label }],
        LabelInput::File(p) => {
            let mut r = csv_reader(&p)?;
            r.deserialize().collect::<Result<Vec<LabelRow>, _>>().with_context(|| format!("reading {}", p.display()))?
        }
    };
    for (i, r) in rows.into_iter().enumerate() {
        st.commit(&mut s, SessionEvent::Label { annotator: r.annotator, tweet_id: r.tweet_id, label: r.label })
            .with_context(|| format!("label {}", i + 1))?;
    }
    Ok(progress(&s))
}

pub fn disagreements(cfg: &PipelineConfig, session_id: &str) -> anyhow::Result<Value> {
    let st = store(cfg);
    let mut s = st.load(session_id)?;
    if s.status() == SessionStatus::Labeling {
        st.commit(&mut s, SessionEvent::OpenAdjudication)?;
    }
    Ok(json!({ "session": session_id, "status": s.status(), "queue": s.disagreement_queue()? }))
}

pub fn adjudicate(cfg: &PipelineConfig, session_id: &str, tweet_id: &str, label: &str) -> anyhow::Result<Value> {
    let st = store(cfg);
    let mut s = st.load(session_id)?;
    st.commit(&mut s, SessionEvent::Adjudicate { tweet_id: tweet_id.into(), label: label.into() })?;
    Ok(json!({ "session": session_id, "status": s.status(), "remaining": s.disagreement_queue()?.len() }))
}

pub fn kappa(cfg: &PipelineConfig, session_id: &str) -> anyhow::Result<Value> {
    let s = store(cfg).load(session_id)?;
    let k = s.cohen_kappa()?;
    write_json(&layout(cfg).dir.join(format!("kappa_{session_id}.json")), "kappa", &cfg.hash(), &k)?;
    let mut v = to_json(&k);
    v["status"] = to_json(&s.status());
    Ok(v)
}

pub fn estimate(cfg: &PipelineConfig, session_id: &str) -> anyhow::Result<Value> {
    let s = store(cfg).load(session_id)?;
    let e = s.weighted_category_estimate()?;
    let l = layout(cfg);
    let hash = cfg.hash();
    write_csv(
        &l.dir.join(format!("estimate_{session_id}.csv")),
        &hash,
        &["label", "share"],
        e.per_label_share.iter().map(|x| vec![x.label.clone(), x.share.to_string()]),
    )?;
    let opt = |x: &Option<String>| x.clone().unwrap_or_default();
    write_csv(
        &l.dir.join(format!("final_labels_{session_id}.csv")),
        &hash,
        &["tweet_id", "cluster_id", "annotator_a_label", "annotator_b_label", "final_label"],
        s.final_rows().iter().map(|r| {
            vec![
                r.tweet_id.clone(),
                r.cluster_id.to_string(),
                opt(&r.annotator_a_label),
                opt(&r.annotator_b_label),
                opt(&r.final_label),
            ]
        }),
    )?;
    write_json(&l.dir.join(format!("estimate_{session_id}.json")), "estimate", &hash, &e)?;
    Ok(to_json(&e))
}

#[derive(Debug, Serialize)]
struct PairResult {
    pair: (SeriesName, SeriesName),
    #[serde(flatten)]
    outcome: Value,
}

pub fn timeseries(cfg: &PipelineConfig) -> anyhow::Result<Value> {
    let tweets = bucket_daily(&load_corpus(cfg)?);
    let mut row_errors: Vec<RowError> = Vec::new();
    let mut read = |p: &Option<PathBuf>, what: &str, src: CaseSource| -> anyhow::Result<Vec<_>> {
        if p.is_none() {
            return Ok(Vec::new());
        }
        let path = cfg.input(p, what)?;
        let (rows, errs) =
            read_case_table(File::open(&path)?, src).with_context(|| format!("reading {}", path.display()))?;
        row_errors.extend(errs);
        Ok(rows)
    };
    let ministry = read(&cfg.paths.ministry_cases, "ministry case table", CaseSource::Ministry)?;
    let fallback = read(&cfg.paths.fallback_cases, "fallback case table", CaseSource::Fallback)?;
    let merged = merge_case_counts(ministry, fallback)?;
    let cases = case_series(&merged);

    let mut tidy: BTreeMap<(NaiveDate, SeriesName), Option<f64>> = BTreeMap::new();
    for s in [&tweets, &cases] {
        for (d, n, v) in s.tidy_rows() {
            tidy.insert((d, n), v);
        }
    }
    let l = layout(cfg);
    let hash = cfg.hash();
    write_csv(
        &l.timeseries_csv(),
        &hash,
        &["date", "series", "value"],
        tidy.iter().map(|((d, n), v)| vec![d.to_string(), n.to_string(), v.map(|x| x.to_string()).unwrap_or_default()]),
    )?;

    let mut pairs = Vec::new();
    if !merged.is_empty() {
        for a in [SeriesName::Original, SeriesName::Retweet, SeriesName::Reply, SeriesName::Quote] {
            if !has_values(&tweets, a) {
                continue;
            }
            for b in [SeriesName::Confirmed, SeriesName::Deaths, SeriesName::Recovered] {
                let outcome = align(&tweets, a, &cases, b, cfg.date_window())
                    .and_then(|p| pearson(&p))
                    .map(|r| json!({ "pearson_r": r.pearson_r, "n_overlap": r.n_overlap, "window": r.window }))
                    .unwrap_or_else(|e| json!({ "error": e.to_string() }));
                pairs.push(PairResult { pair: (a, b), outcome });
            }
        }
    }
    let report = json!({
        "tweet_days": tweets.dates.len(),
        "case_days": merged.len(),
        "case_sources": merged.iter().fold(BTreeMap::<String, usize>::new(), |mut m, r| { *m.entry(r.source.to_string()).or_default() += 1; m }),
        "row_errors": row_errors,
        "correlations": pairs,
    });
    write_json(&l.correlation(), "correlation", &hash, &report)?;
    Ok(report)
}

fn has_values(s: &DailySeries, n: SeriesName) -> bool {
    s.get(n).is_some_and(|v| v.iter().any(|x| x.is_some_and(|x| x > 0.0)))
}
