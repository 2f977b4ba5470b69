//! Run configuration: JSON config file, CLI-flag overrides (flags win), and
//! validation with actionable messages. The fully resolved config is echoed
//! into every report so a run can be reproduced from its own output.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // Inputs.
    pub d_path: Option<String>,
    pub d_prime_path: Option<String>,
    /// Display names used in reports.
    pub d_name: String,
    pub d_prime_name: String,
    /// Label column for labeled pipelines (influence, grid prototypes).
    pub label_column: Option<String>,

    // Prototype construction.
    pub prototype_method: String,
    pub k_prototypes: usize,
    pub kmeans_max_iter: usize,
    pub grid_columns: Option<Vec<String>>,
    pub percentiles: Vec<f64>,
    pub label_tree_depth: usize,
    pub metric: String,
    pub label_aware: bool,
    /// Z-score both datasets by D's statistics before prototype work. Turn
    /// off for data already expressed in a common metric space (generated
    /// benchmarks, precomputed embeddings).
    pub normalize: bool,

    // Partial prototypes.
    pub partial_k: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta_percentile: f64,

    // Ensemble importance.
    pub bootstraps: usize,
    pub epsilon: f64,
    pub tree_depth: usize,
    pub lambda: f64,
    pub candidates_per_bootstrap: usize,
    pub feature_subsample: f64,
    pub background_cap: usize,
    pub max_thresholds_per_column: usize,

    // Influence.
    pub top_k: usize,
    pub l2: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub class_weighted: bool,

    // Attributes.
    pub attributes: Vec<String>,
    pub provider: String,
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub mock_fixture_path: Option<String>,
    pub mock_fixture_d_prime_path: Option<String>,
    pub humanize: bool,
    pub max_retries: usize,
    pub retry_base_delay_ms: u64,

    // Evaluation.
    pub eval_n: usize,
    pub eval_m: usize,
    pub eval_n_samples: usize,
    pub eval_k_values: Vec<usize>,
    pub eval_seeds: usize,
    pub eval_n_trials: usize,
    pub mixture_case: usize,

    // Embedding export.
    pub embedding: String,
    pub embedding_path: Option<String>,

    // Reproducibility.
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d_path: None,
            d_prime_path: None,
            d_name: "D".to_string(),
            d_prime_name: "D_prime".to_string(),
            label_column: None,
            prototype_method: "kmeans".to_string(),
            k_prototypes: 4,
            kmeans_max_iter: 200,
            grid_columns: None,
            percentiles: vec![10.0, 50.0, 90.0],
            label_tree_depth: 2,
            metric: "euclidean".to_string(),
            label_aware: false,
            normalize: true,
            partial_k: 3,
            c1: 0.0,
            c2: 0.0,
            c3: 1.0,
            delta_percentile: 10.0,
            bootstraps: 10,
            epsilon: 0.02,
            tree_depth: 3,
            lambda: 0.01,
            candidates_per_bootstrap: 5,
            feature_subsample: 0.7,
            background_cap: 128,
            max_thresholds_per_column: 2,
            top_k: 10,
            l2: 1e-2,
            tol: 1e-8,
            max_iter: 200,
            class_weighted: false,
            attributes: Vec::new(),
            provider: "mock".to_string(),
            endpoint: "https://api.openai.com/v1/chat/completions".to_string(),
            model: "gpt-3.5-turbo".to_string(),
            api_key_env: "DRIFTSCOPE_API_KEY".to_string(),
            mock_fixture_path: None,
            mock_fixture_d_prime_path: None,
            humanize: false,
            max_retries: 3,
            retry_base_delay_ms: 200,
            eval_n: 200,
            eval_m: 5,
            eval_n_samples: 200,
            eval_k_values: Vec::new(),
            eval_seeds: 10,
            eval_n_trials: 1000,
            mixture_case: 1,
            embedding: "none".to_string(),
            embedding_path: None,
            seed: 0,
            workers: None,
        }
    }
}

/// CLI flags that override config-file values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub d_path: Option<PathBuf>,
    pub d_prime_path: Option<PathBuf>,
    pub label_column: Option<String>,
    pub seed: Option<u64>,
    pub top_k: Option<usize>,
    pub k_prototypes: Option<usize>,
    pub metric: Option<String>,
    pub provider: Option<String>,
    pub workers: Option<usize>,
    pub mixture_case: Option<usize>,
    pub humanize: Option<bool>,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

impl RunConfig {
    /// Loads the config file (when given), then applies CLI overrides.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self, ValidationError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    ValidationError(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    ValidationError(format!("config {} is not valid: {e}", p.display()))
                })?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &overrides.d_path {
            config.d_path = Some(v.display().to_string());
        }
        if let Some(v) = &overrides.d_prime_path {
            config.d_prime_path = Some(v.display().to_string());
        }
        if let Some(v) = &overrides.label_column {
            config.label_column = Some(v.clone());
        }
        if let Some(v) = overrides.seed {
            config.seed = v;
        }
        if let Some(v) = overrides.top_k {
            config.top_k = v;
        }
        if let Some(v) = overrides.k_prototypes {
            config.k_prototypes = v;
        }
        if let Some(v) = &overrides.metric {
            config.metric = v.clone();
        }
        if let Some(v) = &overrides.provider {
            config.provider = v.clone();
        }
        if let Some(v) = overrides.workers {
            config.workers = Some(v);
        }
        if let Some(v) = overrides.mixture_case {
            config.mixture_case = v;
        }
        if let Some(v) = overrides.humanize {
            config.humanize = v;
        }
        Ok(config)
    }

    fn require_file(path: &Option<String>, what: &str) -> Result<PathBuf, ValidationError> {
        let Some(path) = path else {
            return Err(ValidationError(format!(
                "{what} is required: set it in the config file or pass the matching flag"
            )));
        };
        let p = PathBuf::from(path);
        if !p.exists() {
            return Err(ValidationError(format!("{what} \"{path}\" does not exist")));
        }
        Ok(p)
    }

    pub fn d_file(&self) -> Result<PathBuf, ValidationError> {
        Self::require_file(&self.d_path, "input dataset D (--d)")
    }

    pub fn d_prime_file(&self) -> Result<PathBuf, ValidationError> {
        Self::require_file(&self.d_prime_path, "input dataset D' (--d-prime)")
    }

    pub fn metric_enum(&self) -> Result<driftscope_core::Metric, ValidationError> {
        self.metric
            .parse()
            .map_err(|e: String| ValidationError(format!("metric: {e}")))
    }

    /// Range checks shared by every subcommand.
    pub fn validate_common(&self) -> Result<(), ValidationError> {
        let checks: [(bool, &str); 10] = [
            (self.bootstraps >= 1, "bootstraps must be at least 1"),
            (self.epsilon >= 0.0, "epsilon must be nonnegative"),
            (self.lambda >= 0.0, "lambda must be nonnegative"),
            (
                self.candidates_per_bootstrap >= 1,
                "candidates_per_bootstrap must be at least 1",
            ),
            (
                self.feature_subsample > 0.0 && self.feature_subsample <= 1.0,
                "feature_subsample must be in (0, 1]",
            ),
            (self.l2 > 0.0, "l2 must be positive"),
            (self.tol > 0.0, "tol must be positive"),
            (
                self.delta_percentile > 0.0 && self.delta_percentile <= 100.0,
                "delta_percentile must be in (0, 100]",
            ),
            (
                self.c1 >= 0.0 && self.c2 >= 0.0 && self.c3 >= 0.0,
                "c1, c2, c3 must be nonnegative",
            ),
            (
                self.background_cap >= 1,
                "background_cap must be at least 1",
            ),
        ];
        for (ok, message) in checks {
            if !ok {
                return Err(ValidationError(message.to_string()));
            }
        }
        match self.embedding.as_str() {
            "none" | "pca" | "precomputed" => {}
            other => {
                return Err(ValidationError(format!(
                    "embedding \"{other}\" is not one of none | pca | precomputed"
                )))
            }
        }
        if self.embedding == "precomputed" && self.embedding_path.is_none() {
            return Err(ValidationError(
                "embedding = precomputed requires embedding_path".to_string(),
            ));
        }
        Ok(())
    }
}
