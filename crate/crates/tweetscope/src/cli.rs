use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::Value;
use tweetscope_core::lda::ReportOrder;

use crate::commands::{self, LabelInput};
use crate::config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(name = "tweetscope", version, about = "Tweet corpus topic modeling, clustering and annotation")]
pub struct Cli {
    /// TOML config; relative paths inside it resolve against its directory.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `paths.output_dir`.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SessionArg {
    #[arg(long, default_value = "default")]
    pub session: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Archive to filtered, deduplicated corpus plus manifest.
    Ingest {
        #[arg(long)]
        archive: Option<PathBuf>,
        #[arg(long)]
        hashtags: Option<PathBuf>,
    },
    /// Corpus to normalized, stopword-filtered token lists.
    Preprocess {
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Train the topic model.
    LdaTrain {
        #[arg(long)]
        topics: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Most or least prevalent topics as CSV.
    #[command(group(ArgGroup::new("order").required(true).args(["top", "bottom"])))]
    LdaReport {
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        bottom: Option<usize>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Top-word Jaccard overlap between every pair of topics.
    LdaOverlap {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        top_words: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// TF-IDF, elbow search and mini-batch k-means.
    Cluster {
        /// Use this k and skip the elbow search.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Draw the per-cluster sample and open an annotation session.
    Sample {
        #[command(flatten)]
        session: SessionArg,
        #[arg(long)]
        per_cluster: Option<usize>,
        /// Two comma-separated annotator ids.
        #[arg(long, value_delimiter = ',')]
        annotators: Option<Vec<String>>,
    },
    /// Record labels, one at a time or from a CSV (annotator,tweet_id,label).
    #[command(group(ArgGroup::new("input").required(true).args(["file", "annotator"])))]
    Label {
        #[command(flatten)]
        session: SessionArg,
        #[arg(long, requires_all = ["tweet", "label"])]
        annotator: Option<String>,
        #[arg(long)]
        tweet: Option<String>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long, conflicts_with = "annotator")]
        file: Option<PathBuf>,
    },
    /// End labeling and list disputed tweets.
    Disagreements {
        #[command(flatten)]
        session: SessionArg,
    },
    /// Set the final label of a disputed tweet.
    Adjudicate {
        #[command(flatten)]
        session: SessionArg,
        #[arg(long)]
        tweet: String,
        #[arg(long)]
        label: String,
    },
    /// Cohen's kappa over doubly labeled tweets.
    Kappa {
        #[command(flatten)]
        session: SessionArg,
    },
    /// Cluster-weighted label shares of a closed session.
    Estimate {
        #[command(flatten)]
        session: SessionArg,
    },
    /// Daily volume by kind, case counts and their correlation.
    Timeseries {
        #[arg(long)]
        ministry: Option<PathBuf>,
        #[arg(long)]
        fallback: Option<PathBuf>,
    },
    /// Serve the annotation API and, if configured, the static UI.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Preprocess { .. } => "preprocess",
            Command::LdaTrain { .. } => "lda-train",
            Command::LdaReport { .. } => "lda-report",
            Command::LdaOverlap { .. } => "lda-overlap",
            Command::Cluster { .. } => "cluster",
            Command::Sample { .. } => "sample",
            Command::Label { .. } => "label",
            Command::Disagreements { .. } => "disagreements",
            Command::Adjudicate { .. } => "adjudicate",
            Command::Kappa { .. } => "kappa",
            Command::Estimate { .. } => "estimate",
            Command::Timeseries { .. } => "timeseries",
            Command::Serve { .. } => "serve",
        }
    }
}

// Flags given on the command line are relative to the working directory,
// unlike paths in the config file.
fn cwd_path(p: PathBuf) -> anyhow::Result<PathBuf> {
    Ok(if p.is_absolute() { p } else { std::env::current_dir()?.join(p) })
}

/// Loads the config, applies flag overrides and runs the command.
pub fn run(cli: Cli) -> anyhow::Result<Value> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    if let Some(d) = cli.output_dir {
        cfg.paths.output_dir = cwd_path(d)?;
    }
    match cli.command {
        Command::Ingest { archive, hashtags } => {
            if let Some(p) = archive {
                cfg.paths.archive = Some(cwd_path(p)?);
            }
            if let Some(p) = hashtags {
                cfg.paths.hashtags = Some(cwd_path(p)?);
            }
            commands::ingest(&cfg)
        }
        Command::Preprocess { stopwords } => {
            if let Some(p) = stopwords {
                cfg.paths.stopwords = Some(cwd_path(p)?);
            }
            commands::preprocess(&cfg)
        }
        Command::LdaTrain { topics, iterations, seed } => {
            if let Some(k) = topics {
                cfg.lda.num_topics = k;
            }
            if let Some(n) = iterations {
                cfg.lda.iterations = n;
            }
            if let Some(s) = seed {
                cfg.lda.seed = s;
            }
            commands::lda_train(&cfg)
        }
        Command::LdaReport { top, bottom, model, out } => {
            let (order, n) = match (top, bottom) {
                (Some(n), _) => (ReportOrder::Descending, n),
                (None, Some(n)) => (ReportOrder::Ascending, n),
                (None, None) => unreachable!("clap requires one"),
            };
            let model = model.map(cwd_path).transpose()?;
            commands::lda_report(&cfg, order, n, model.as_deref(), out.map(cwd_path).transpose()?)
        }
        Command::LdaOverlap { model, top_words, out } => {
            let model = model.map(cwd_path).transpose()?;
            commands::lda_overlap(&cfg, model.as_deref(), top_words, out.map(cwd_path).transpose()?)
        }
        Command::Cluster { k, seed } => {
            if k.is_some() {
                cfg.cluster.k = k;
            }
            if let Some(s) = seed {
                cfg.cluster.seed = s;
            }
            commands::cluster(&cfg)
        }
        Command::Sample { session, per_cluster, annotators } => {
            if let Some(n) = per_cluster {
                cfg.cluster.per_cluster_n = n;
            }
            if let Some(a) = annotators {
                cfg.annotate.annotators = a;
            }
            commands::sample(&cfg, &session.session)
        }
        Command::Label { session, annotator, tweet, label, file } => {
            let input = match (file, annotator) {
                (Some(f), _) => LabelInput::File(cwd_path(f)?),
                (None, Some(annotator)) => LabelInput::One {
                    annotator,
                    tweet_id: tweet.expect("clap requires tweet"),
                    label: label.expect("clap requires label"),
                },
                (None, None) => unreachable!("clap requires one"),
            };
            commands::label(&cfg, &session.session, input)
        }
        Command::Disagreements { session } => commands::disagreements(&cfg, &session.session),
        Command::Adjudicate { session, tweet, label } => commands::adjudicate(&cfg, &session.session, &tweet, &label),
        Command::Kappa { session } => commands::kappa(&cfg, &session.session),
        Command::Estimate { session } => commands::estimate(&cfg, &session.session),
        Command::Timeseries { ministry, fallback } => {
            if let Some(p) = ministry {
                cfg.paths.ministry_cases = Some(cwd_path(p)?);
            }
            if let Some(p) = fallback {
                cfg.paths.fallback_cases = Some(cwd_path(p)?);
            }
            commands::timeseries(&cfg)
        }
        Command::Serve { bind, static_dir } => {
            let bind = bind.unwrap_or_else(|| cfg.service.bind.clone());
            let static_dir = match static_dir {
                Some(d) => Some(cwd_path(d)?),
                None => cfg.service.static_dir.as_ref().map(|d| cfg.resolve(d)),
            };
            let store = commands::store(&cfg);
            tokio::runtime::Runtime::new()?.block_on(crate::server::serve(store, &bind, static_dir))?;
            Ok(Value::Null)
        }
    }
}
