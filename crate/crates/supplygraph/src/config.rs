//! TOML run configuration. Every field is optional; command-line flags
//! override the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use supplygraph_core::algo::LouvainConfig;
use supplygraph_core::ingest::{BuildOptions, TextRule, TextRules};
use supplygraph_core::report::DEFAULT_K;
use supplygraph_core::StubPolicy;

use crate::error::{Error, Result};
use crate::fsutil::read_to_string;
use crate::graphio::{parse_stub_policy, RuleJson};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterSettings {
    /// Root directory of the bundled on-disk adapter.
    pub root: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LouvainSettings {
    pub resolution: Option<f64>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub snapshots: Vec<PathBuf>,
    pub adapter: Option<AdapterSettings>,
    /// `create` (default) or `reject`.
    pub stubs: Option<String>,
    #[serde(default)]
    pub louvain: LouvainSettings,
    pub k: Option<usize>,
    pub salt: Option<String>,
    pub parallelism: Option<usize>,
    /// Phrase rules added to the built-in ones.
    #[serde(default)]
    pub text_rules: Vec<RuleJson>,
    pub max_tokens: Option<usize>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.parallelism == Some(0) {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.k == Some(0) {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.max_tokens == Some(0) {
            return Err(Error::Config("max_tokens must be at least 1".into()));
        }
        if let Some(r) = self.louvain.resolution {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config("louvain.resolution must be positive".into()));
            }
        }
        self.stub_policy()?;
        if let Some(rule) = self.text_rules.iter().find(|r| r.phrase.trim().is_empty()) {
            return Err(Error::Config(format!("empty phrase in text rule for {}", rule.kind)));
        }
        Ok(())
    }

    pub fn stub_policy(&self) -> Result<StubPolicy> {
        match &self.stubs {
            None => Ok(StubPolicy::default()),
            Some(s) => parse_stub_policy(s)
                .ok_or_else(|| Error::Config(format!("stubs must be `create` or `reject`, got `{s}`"))),
        }
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(DEFAULT_K)
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism.unwrap_or(1)
    }

    pub fn build_options(&self) -> Result<BuildOptions> {
        let mut rules = TextRules::default();
        for r in &self.text_rules {
            rules = rules.with_rule(TextRule::new(&r.phrase, r.kind, r.list));
        }
        if let Some(t) = self.max_tokens {
            rules.max_tokens = t;
        }
        Ok(BuildOptions {
            stubs: self.stub_policy()?,
            rules,
        })
    }

    pub fn louvain(&self) -> LouvainConfig {
        let d = LouvainConfig::default();
        LouvainConfig {
            resolution: self.louvain.resolution.unwrap_or(d.resolution),
            seed: self.louvain.seed.unwrap_or(d.seed),
            restarts: self.louvain.restarts.unwrap_or(d.restarts),
            ..d
        }
    }
}
