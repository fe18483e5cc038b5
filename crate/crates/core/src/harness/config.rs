//! Experiment configuration: sections of flat `key = value` lines.
//!
//! ```toml
//! [experiment]
//! scene = "pinch.scene.toml"
//! script = "rotate_square_90.script.toml"
//! morphs = "square_star.manifest"
//! seeds = [0, 1, 2, 3]
//! out = "runs/demo"
//!
//! [ppo]
//! samples_per_iteration = 4000
//! iterations = 100
//!
//! [curriculum]
//! budget = 200
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::curriculum::CurriculumConfig;
use crate::imitation::{ActionBounds, ImitationConfig, RewardConfig, TerminationThresholds};
use crate::learner::{GaeConfig, PpoConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub scene: PathBuf,
    /// Motion script; used by `gen-ref` and whenever `clip` is absent.
    pub script: Option<PathBuf>,
    /// Clip file; read if present, otherwise generated from `script`.
    pub clip: Option<PathBuf>,
    /// Morph family manifest; its source is the object the clip is made with.
    pub morphs: PathBuf,
    #[serde(default = "default_object")]
    pub object: String,
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_object() -> String {
    "object".into()
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImitationSection {
    pub control_rate: f64,
    pub filter_alpha: f64,
    pub translation_bound: f64,
    pub rotation_bound: f64,
}

impl Default for ImitationSection {
    fn default() -> Self {
        let d = ImitationConfig::default();
        Self {
            control_rate: d.control_rate,
            filter_alpha: d.filter_alpha,
            translation_bound: d.bounds.translation,
            rotation_bound: d.bounds.rotation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoSection {
    pub clip_eps: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: bool,
    pub samples_per_iteration: usize,
    pub iterations: usize,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    pub max_kl: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub workers: usize,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
}

impl Default for PpoSection {
    fn default() -> Self {
        Self::from(&PpoConfig::default())
    }
}

impl From<&PpoConfig> for PpoSection {
    fn from(p: &PpoConfig) -> Self {
        Self {
            clip_eps: p.clip_eps,
            epochs: p.epochs,
            minibatch_size: p.minibatch_size,
            learning_rate: p.learning_rate,
            lr_decay: p.lr_decay,
            samples_per_iteration: p.samples_per_iteration,
            iterations: p.iterations,
            entropy_coef: p.entropy_coef,
            max_grad_norm: p.max_grad_norm,
            max_kl: p.max_kl,
            gamma: p.gae.gamma,
            lambda: p.gae.lambda,
            workers: p.workers,
            hidden: p.hidden.clone(),
            init_log_std: p.init_log_std,
        }
    }
}

impl PpoSection {
    pub fn ppo(&self) -> PpoConfig {
        PpoConfig {
            clip_eps: self.clip_eps,
            epochs: self.epochs,
            minibatch_size: self.minibatch_size,
            learning_rate: self.learning_rate,
            lr_decay: self.lr_decay,
            samples_per_iteration: self.samples_per_iteration,
            iterations: self.iterations,
            entropy_coef: self.entropy_coef,
            max_grad_norm: self.max_grad_norm,
            max_kl: self.max_kl,
            gae: GaeConfig {
                gamma: self.gamma,
                lambda: self.lambda,
            },
            workers: self.workers,
            hidden: self.hidden.clone(),
            init_log_std: self.init_log_std,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub rollouts: usize,
    /// N
    pub perturb_force: f64,
    /// s
    pub perturb_duration: f64,
    pub mass_scale: f64,
    pub friction_scale: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            rollouts: 500,
            perturb_force: 8.0,
            perturb_duration: 0.25,
            mass_scale: 1.0,
            friction_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub imitation: ImitationSection,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub termination: TerminationThresholds,
    #[serde(default)]
    pub ppo: PpoSection,
    #[serde(default)]
    pub curriculum: CurriculumConfig,
    #[serde(default)]
    pub eval: EvalSection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(format!("{e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("."))).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn imitation_config(&self) -> ImitationConfig {
        ImitationConfig {
            control_rate: self.imitation.control_rate,
            reward: self.reward,
            termination: self.termination,
            bounds: ActionBounds {
                translation: self.imitation.translation_bound,
                rotation: self.imitation.rotation_bound,
            },
            filter_alpha: self.imitation.filter_alpha,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.experiment.seeds.is_empty() {
            return bad("experiment.seeds must not be empty");
        }
        if self.experiment.script.is_none() && self.experiment.clip.is_none() {
            return bad("experiment needs a `script` or a `clip`");
        }
        if !(self.termination.d_thr > 0.0 && self.termination.phi_thr > 0.0) {
            return bad("termination thresholds must be positive");
        }
        if !(self.imitation.filter_alpha > 0.0 && self.imitation.filter_alpha <= 1.0) {
            return bad("imitation.filter_alpha must lie in (0, 1]");
        }
        if self.ppo.workers == 0 || self.ppo.minibatch_size == 0 || self.ppo.hidden.is_empty() {
            return bad("ppo.workers, ppo.minibatch_size and ppo.hidden must be non-zero");
        }
        if !(self.eval.mass_scale > 0.0 && self.eval.friction_scale > 0.0 && self.eval.perturb_force >= 0.0) {
            return bad("eval scales must be positive and perturb_force non-negative");
        }
        self.reward.validate().map_err(HarnessError::Config)?;
        self.curriculum.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }

    /// Checks that every referenced file exists.
    pub fn check_files(&self) -> Result<(), HarnessError> {
        let e = &self.experiment;
        // a missing clip is regenerated from the script
        let clip = if e.script.is_some() { None } else { e.clip.as_ref() };
        let files = [Some(&e.scene), e.script.as_ref(), clip, Some(&e.morphs)];
        for f in files.into_iter().flatten() {
            let p = self.resolve(f);
            if !p.is_file() {
                return Err(HarnessError::Config(format!("missing file {}", p.display())));
            }
        }
        Ok(())
    }
}
