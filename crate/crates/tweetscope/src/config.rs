//! TOML pipeline configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tweetscope_core::annotate::LabelSet;
use tweetscope_core::cluster::KMeansParams;
use tweetscope_core::ingest::{DateWindow, TweetKind};
use tweetscope_core::lda::LdaParams;
use tweetscope_core::textnorm::NormalizationConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub archive: Option<PathBuf>,
    pub hashtags: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub ministry_cases: Option<PathBuf>,
    pub fallback_cases: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            archive: None,
            hashtags: None,
            stopwords: None,
            ministry_cases: None,
            fallback_cases: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub lang: String,
    pub kinds: Vec<TweetKind>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { lang: "fa".into(), kinds: vec![TweetKind::Original] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Defaults to 5 / num_topics.
    pub alpha0: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub optimize_interval: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub min_doc_freq: usize,
    pub max_doc_fraction: f64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        let p = LdaParams::new(50);
        LdaConfig {
            num_topics: p.num_topics,
            alpha0: None,
            beta: p.beta,
            iterations: p.iterations,
            optimize_interval: p.optimize_interval,
            burn_in: p.burn_in,
            seed: p.seed,
            min_doc_freq: 1,
            max_doc_fraction: 1.0,
        }
    }
}

impl LdaConfig {
    pub fn params(&self) -> LdaParams {
        let mut p = LdaParams::new(self.num_topics);
        if let Some(a) = self.alpha0 {
            p.alpha0 = a;
        }
        p.beta = self.beta;
        p.iterations = self.iterations;
        p.optimize_interval = self.optimize_interval;
        p.burn_in = self.burn_in;
        p.seed = self.seed;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub candidate_ks: Vec<usize>,
    /// Skips the elbow search when set.
    pub k: Option<usize>,
    pub batch_size: usize,
    pub max_iters: usize,
    pub n_init: usize,
    pub per_cluster_n: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        let p = KMeansParams::new(0, 0);
        ClusterConfig {
            candidate_ks: (2..=16).collect(),
            k: None,
            batch_size: p.batch_size,
            max_iters: p.max_iters,
            n_init: p.n_init,
            per_cluster_n: 30,
            seed: 0,
        }
    }
}

impl ClusterConfig {
    pub fn kmeans(&self, k: usize, seed: u64) -> KMeansParams {
        KMeansParams { k, batch_size: self.batch_size, max_iters: self.max_iters, seed, n_init: self.n_init, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateConfig {
    pub labels: LabelSet,
    pub annotators: Vec<String>,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        AnnotateConfig { labels: LabelSet::default(), annotators: vec!["annotator_a".into(), "annotator_b".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    /// Relative to the output directory unless absolute.
    pub session_dir: PathBuf,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { bind: "127.0.0.1:8080".into(), session_dir: PathBuf::from("sessions"), static_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub window: Option<Window>,
    pub ingest: IngestConfig,
    pub normalization: NormalizationConfig,
    pub lda: LdaConfig,
    pub cluster: ClusterConfig,
    pub annotate: AnnotateConfig,
    pub service: ServiceConfig,
    /// Directory relative paths are resolved against; the config file's
    /// directory, or the working directory without a file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(PipelineConfig { base_dir: PathBuf::from("."), ..Default::default() });
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if cfg.base_dir.as_os_str().is_empty() {
            cfg.base_dir = PathBuf::from(".");
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.normalization.validate()?;
        if let Some(w) = self.window {
            DateWindow::new(w.start, w.end)?;
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Resolved path of a configured input, which must exist.
    pub fn input(&self, p: &Option<PathBuf>, what: &str) -> anyhow::Result<PathBuf> {
        let Some(p) = p else { bail!("no {what} path configured") };
        let p = self.resolve(p);
        if !p.exists() {
            bail!("{what} {} does not exist", p.display());
        }
        Ok(p)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.paths.output_dir)
    }

    pub fn session_dir(&self) -> PathBuf {
        let d = &self.service.session_dir;
        if d.is_absolute() {
            d.clone()
        } else {
            self.output_dir().join(d)
        }
    }

    pub fn date_window(&self) -> Option<DateWindow> {
        self.window.map(|w| DateWindow { start: w.start, end: w.end })
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
