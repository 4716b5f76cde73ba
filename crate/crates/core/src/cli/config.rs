use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::{Env, TaskId};
use crate::error::{Error, Result};
use crate::harness::sha256_hex;
use crate::learner::{IqlHyper, Method};
use crate::planner::EndpointConfig;
use crate::shaping::{ShapingParams, SweepConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapingConfig {
    /// Defaults to the task discount.
    pub gamma: Option<f64>,
    /// Defaults to the task horizon.
    pub horizon: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub gamma: f64,
    pub horizon: usize,
    pub samples: usize,
    pub pairs: usize,
    pub trajectories: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let s = SweepConfig::default();
        VerifyConfig {
            gamma: 0.999,
            horizon: 100,
            samples: s.samples,
            pairs: s.pairs,
            trajectories: s.trajectories,
        }
    }
}

/// Everything a pipeline stage needs, read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: TaskId,
    pub method: Method,
    pub seeds: Vec<u64>,
    pub dataset_size: usize,
    /// Defaults to 0.5 on grids and 0.3 on mazes.
    pub expert_prob: Option<f64>,
    pub iterations: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub eval_seed: u64,
    pub smoothing_window: usize,
    pub out_dir: PathBuf,
    /// Defaults to `<out_dir>/<task>.schedule.toml`.
    pub schedule: Option<PathBuf>,
    pub shaping: ShapingConfig,
    pub learner: IqlHyper,
    pub planner: EndpointConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            task: TaskId::CliffWalking,
            method: Method::Storl,
            seeds: vec![0],
            dataset_size: 1000,
            expert_prob: None,
            iterations: 1000,
            eval_every: 10,
            eval_episodes: 100,
            eval_seed: 12345,
            smoothing_window: 50,
            out_dir: PathBuf::from("runs"),
            schedule: None,
            shaping: ShapingConfig::default(),
            learner: IqlHyper::default(),
            planner: EndpointConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks invariants; returns human-readable warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let p = self.expert_prob();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("expert_prob {p} outside [0, 1]")));
        }
        if self.eval_episodes == 0 || self.smoothing_window == 0 {
            return Err(Error::Config("eval_episodes and smoothing_window must be positive".into()));
        }
        self.learner.validate()?;
        let params = self.shaping_params()?;
        let mut warnings = Vec::new();
        if params.boundary_warning() {
            warnings.push(format!(
                "gamma {} <= (T-1)/T = {}: non-progress steps are not strictly penalised at the last timestep",
                params.gamma,
                params.gamma_threshold()
            ));
        }
        Ok(warnings)
    }

    pub fn env(&self) -> Env {
        Env::for_task(self.task)
    }

    pub fn expert_prob(&self) -> f64 {
        self.expert_prob
            .unwrap_or(if self.task.is_discrete() { 0.5 } else { 0.3 })
    }

    pub fn shaping_params(&self) -> Result<ShapingParams> {
        let env = self.env();
        ShapingParams::new(
            self.shaping.gamma.unwrap_or(env.gamma()),
            self.shaping.horizon.unwrap_or(env.horizon()),
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    /// Discount used by the learners' TD targets.
    pub fn gamma(&self) -> f64 {
        self.shaping.gamma.unwrap_or(self.env().gamma())
    }

    /// Digest of the settings that affect results; output locations are
    /// excluded so identical runs in different directories agree.
    pub fn digest(&self) -> String {
        let canonical = RunConfig {
            out_dir: PathBuf::new(),
            schedule: None,
            ..self.clone()
        };
        sha256_hex(canonical.to_toml().as_bytes())
    }

    fn file(&self, name: String) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn prompt_path(&self) -> PathBuf {
        self.file(format!("{}.prompt.txt", self.task.as_str()))
    }

    pub fn response_path(&self) -> PathBuf {
        self.file(format!("{}.response.txt", self.task.as_str()))
    }

    pub fn schedule_path(&self) -> PathBuf {
        self.schedule
            .clone()
            .unwrap_or_else(|| self.file(format!("{}.schedule.toml", self.task.as_str())))
    }

    pub fn dataset_path(&self, seed: u64) -> PathBuf {
        self.file(format!("{}.seed{seed}.dataset.csv", self.task.as_str()))
    }

    pub fn shaped_path(&self, seed: u64) -> PathBuf {
        self.file(format!("{}.seed{seed}.shaped.csv", self.task.as_str()))
    }

    fn run_stem(&self, seed: u64) -> String {
        format!("{}.{}.seed{seed}", self.task.as_str(), self.method)
    }

    pub fn checkpoint_path(&self, seed: u64) -> PathBuf {
        self.file(format!("{}.ckpt", self.run_stem(seed)))
    }

    pub fn curve_path(&self, seed: u64) -> PathBuf {
        self.file(format!("{}.curve.csv", self.run_stem(seed)))
    }

    pub fn eval_path(&self, seed: u64) -> PathBuf {
        self.file(format!("{}.eval.csv", self.run_stem(seed)))
    }

    pub fn value_map_path(&self, seed: u64) -> PathBuf {
        self.file(format!("{}.values.txt", self.run_stem(seed)))
    }

    pub fn verify_path(&self) -> PathBuf {
        self.file("verify.csv".into())
    }

    pub fn summary_path(&self, command: &str) -> PathBuf {
        self.file(format!("{}.{command}.summary.json", self.task.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = RunConfig::from_toml("schema_version = 1\ntask = \"fourroom\"\nmethod = \"gcbc\"\n[learner]\nbatch_size = 64\n").unwrap();
        assert_eq!(cfg.task, TaskId::FourRoom);
        assert_eq!(cfg.method, Method::Gcbc);
        assert_eq!(cfg.learner.batch_size, 64);
        assert_eq!(cfg.learner.expectile, 0.9);
        assert_eq!(cfg.expert_prob(), 0.5);
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        assert!(matches!(RunConfig::from_toml("task = \"maze9\""), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml("bogus = 1"), Err(Error::Config(_))));
        let cfg = RunConfig {
            schema_version: 7,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn boundary_gamma_warns() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.validate().unwrap().len(), 1);
        let strict = RunConfig {
            shaping: ShapingConfig {
                gamma: Some(0.999),
                horizon: None,
            },
            ..RunConfig::default()
        };
        assert!(strict.validate().unwrap().is_empty());
    }
}
