//! Run configuration. Sources layer as defaults, then a flat `key = value`
//! file, then individual overrides (usually command-line flags).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::STOPWORDS_VERSION;
use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;
use crate::ranker::TrainingConfig;
use crate::scoring::ScorerSet;
use crate::search::EngineId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub pageviews: Option<PathBuf>,
    pub webmock: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    /// Fold redirect records into synonyms when indexing.
    pub redirects: bool,
    pub learner: String,
    pub training: TrainingConfig,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            index: None,
            pageviews: None,
            webmock: None,
            model: None,
            pipeline: PipelineConfig::default(),
            redirects: true,
            learner: "logistic".into(),
            training: TrainingConfig::default(),
            workers: 1,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected a boolean, got `{v}`"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

fn parse_engines(v: &str) -> Result<Vec<EngineId>> {
    let mut out = Vec::new();
    for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let e: EngineId = name.parse()?;
        if !out.contains(&e) {
            out.push(e);
        }
    }
    Ok(out)
}

fn join_engines(v: &[EngineId]) -> String {
    v.iter().map(|e| e.name()).collect::<Vec<_>>().join(",")
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "-".into())
}

impl RunConfig {
    /// Every key accepted by [`RunConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "corpus",
        "index",
        "pageviews",
        "webmock",
        "model",
        "engines",
        "passage_engines",
        "cap.vsm",
        "cap.qlm",
        "cap.webmock",
        "cap.total",
        "caps",
        "depth",
        "mu",
        "weight.content",
        "weight.title",
        "passage_depth",
        "synonym_candidates",
        "redirects",
        "scorers",
        "phrase_max_k",
        "learner",
        "train.rate",
        "train.epochs",
        "train.l2",
        "train.positive_weight",
        "seed",
        "workers",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let path = || (v != "-" && !v.is_empty()).then(|| PathBuf::from(v));
        let p = &mut self.pipeline;
        match key.trim() {
            "corpus" => self.corpus = path(),
            "index" => self.index = path(),
            "pageviews" => self.pageviews = path(),
            "webmock" => self.webmock = path(),
            "model" => self.model = path(),
            "engines" => p.engines = parse_engines(v)?,
            "passage_engines" => p.passage_engines = parse_engines(v)?,
            "cap.vsm" => p.engine.caps.vsm = parse_num(key, v)?,
            "cap.qlm" => p.engine.caps.qlm = parse_num(key, v)?,
            "cap.webmock" => p.engine.caps.webmock = parse_num(key, v)?,
            "cap.total" => p.engine.caps.total = parse_num(key, v)?,
            "caps" => p.engine.caps_enabled = parse_bool(key, v)?,
            "depth" => {
                p.engine.depth = if v == "auto" {
                    None
                } else {
                    Some(parse_num(key, v)?)
                }
            }
            "mu" => p.engine.mu = parse_num(key, v)?,
            "weight.content" => p.engine.content_weight = parse_num(key, v)?,
            "weight.title" => p.engine.title_weight = parse_num(key, v)?,
            "passage_depth" => p.passage_depth = parse_num(key, v)?,
            "synonym_candidates" => p.synonym_candidates = parse_bool(key, v)?,
            "redirects" => self.redirects = parse_bool(key, v)?,
            "scorers" => p.scorers = ScorerSet::parse_list(v)?,
            "phrase_max_k" => p.phrase_max_k = parse_num(key, v)?,
            "learner" => self.learner = v.to_string(),
            "train.rate" => self.training.learning_rate = parse_num(key, v)?,
            "train.epochs" => self.training.epochs = parse_num(key, v)?,
            "train.l2" => self.training.l2 = parse_num(key, v)?,
            "train.positive_weight" => {
                self.training.positive_weight = if v == "auto" {
                    None
                } else {
                    Some(parse_num(key, v)?)
                }
            }
            "seed" => self.training.seed = parse_num(key, v)?,
            "workers" => self.workers = parse_num(key, v)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Apply `key = value` lines. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.pipeline;
        let caps = &p.engine.caps;
        if [caps.vsm, caps.qlm, caps.webmock, caps.total].contains(&0) {
            return Err(Error::Config("engine caps must be positive".into()));
        }
        if p.engine.depth == Some(0) {
            return Err(Error::Config("depth must be positive".into()));
        }
        if !(p.engine.content_weight >= 0.0 && p.engine.title_weight >= 0.0) {
            return Err(Error::Config("field weights must be >= 0".into()));
        }
        if p.engine.mu.is_nan() || p.engine.mu <= 0.0 {
            return Err(Error::Config("mu must be > 0".into()));
        }
        if p.passage_depth == 0 {
            return Err(Error::Config("passage_depth must be >= 1".into()));
        }
        if p.engines.is_empty() {
            return Err(Error::Config("at least one engine must be enabled".into()));
        }
        if p.engines.contains(&EngineId::Webmock) && self.webmock.is_none() {
            return Err(Error::Config(
                "engine webmock is enabled but no webmock fixture is set".into(),
            ));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        self.training.validate()
    }

    /// The fully resolved settings, as `key -> value`.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let p = &self.pipeline;
        let e = &p.engine;
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("corpus", show_path(&self.corpus));
        put("index", show_path(&self.index));
        put("pageviews", show_path(&self.pageviews));
        put("webmock", show_path(&self.webmock));
        put("model", show_path(&self.model));
        put("engines", join_engines(&p.engines));
        put("passage_engines", join_engines(&p.passage_engines));
        put("cap.vsm", e.caps.vsm.to_string());
        put("cap.qlm", e.caps.qlm.to_string());
        put("cap.webmock", e.caps.webmock.to_string());
        put("cap.total", e.caps.total.to_string());
        put("caps", if e.caps_enabled { "on" } else { "off" }.into());
        put("depth", e.depth.map_or("auto".into(), |d| d.to_string()));
        put("mu", e.mu.to_string());
        put("weight.content", e.content_weight.to_string());
        put("weight.title", e.title_weight.to_string());
        put("passage_depth", p.passage_depth.to_string());
        put("synonym_candidates", p.synonym_candidates.to_string());
        put("redirects", self.redirects.to_string());
        put("scorers", p.scorers.names().join(","));
        put("phrase_max_k", p.phrase_max_k.to_string());
        put("learner", self.learner.clone());
        put("train.rate", self.training.learning_rate.to_string());
        put("train.epochs", self.training.epochs.to_string());
        put("train.l2", self.training.l2.to_string());
        put(
            "train.positive_weight",
            self.training
                .positive_weight
                .map_or("auto".into(), |w| w.to_string()),
        );
        put("seed", self.training.seed.to_string());
        put("workers", self.workers.to_string());
        put("stopwords.version", STOPWORDS_VERSION.to_string());
        m
    }

    pub fn render(&self) -> String {
        self.resolved()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layering() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\nmu = 500\n\ncap.total=10\nengines = vsm, qlm\n")
            .unwrap();
        assert_eq!(cfg.pipeline.engine.mu, 500.0);
        assert_eq!(cfg.pipeline.engine.caps.total, 10);
        cfg.set("mu", "1000").unwrap();
        assert_eq!(cfg.pipeline.engine.mu, 1000.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn bad_lines() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_text("nonsense").is_err());
        assert!(cfg.apply_text("colour = blue").is_err());
        assert!(cfg.apply_text("mu = lots").is_err());
        assert!(cfg.apply_text("engines = vsm,google").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        cfg.set("engines", "vsm,webmock").unwrap();
        assert!(cfg.validate().is_err());
        cfg.set("webmock", "fixture.jsonl").unwrap();
        cfg.validate().unwrap();
        cfg.set("cap.qlm", "0").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn resolved_roundtrips_through_text() {
        let mut cfg = RunConfig::default();
        cfg.set("depth", "10").unwrap();
        cfg.set("caps", "off").unwrap();
        cfg.set("scorers", "ngram,rank").unwrap();
        let mut text = String::new();
        for (k, v) in cfg.resolved() {
            if k != "stopwords.version" {
                text.push_str(&format!("{k} = {v}\n"));
            }
        }
        let mut back = RunConfig::default();
        back.apply_text(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(RunConfig::KEYS.len(), cfg.resolved().len() - 1);
    }
}
