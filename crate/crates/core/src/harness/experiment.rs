//! Loading everything an experiment config points at.

use std::path::PathBuf;

use super::{ExperimentConfig, HarnessError};
use crate::curriculum::MorphLadder;
use crate::imitation::{generate_reference, ImitationConfig, ReferenceClip, ScriptSpec, WorldTemplate};
use crate::morphology::MorphFamily;
use crate::physics::SceneSpec;

#[derive(Clone, Debug)]
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub config_text: String,
    pub family: MorphFamily,
    /// Scene holding the family's source object.
    pub template: WorldTemplate,
}

impl Experiment {
    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let cfg = ExperimentConfig::load(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::new(cfg, text)
    }

    pub fn new(cfg: ExperimentConfig, config_text: String) -> Result<Self, HarnessError> {
        cfg.check_files()?;
        let scene_path = cfg.resolve(&cfg.experiment.scene);
        let scene_text = std::fs::read_to_string(&scene_path).map_err(|e| HarnessError::io(&scene_path, e))?;
        let world = SceneSpec::parse(&scene_text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", scene_path.display())))?
            .build()?;
        let family = MorphFamily::load(&cfg.resolve(&cfg.experiment.morphs))?;
        let template = WorldTemplate::with_object(world, &cfg.experiment.object, &family.decompositions[0])?;
        Ok(Self {
            cfg,
            config_text,
            family,
            template,
        })
    }

    pub fn imitation(&self) -> ImitationConfig {
        self.cfg.imitation_config()
    }

    pub fn script(&self) -> Result<ScriptSpec, HarnessError> {
        let p = self.cfg.experiment.script.as_ref().ok_or_else(|| HarnessError::Config("experiment has no script".into()))?;
        Ok(ScriptSpec::load(&self.cfg.resolve(p))?)
    }

    pub fn generate_clip(&self) -> Result<ReferenceClip, HarnessError> {
        Ok(generate_reference(&self.script()?, &self.template)?)
    }

    /// The configured clip file if it exists, else a freshly generated clip.
    pub fn clip(&self) -> Result<ReferenceClip, HarnessError> {
        match &self.cfg.experiment.clip {
            Some(p) if self.cfg.resolve(p).is_file() => Ok(ReferenceClip::load(&self.cfg.resolve(p))?),
            _ => self.generate_clip(),
        }
    }

    pub fn ladder(&self, clip: ReferenceClip) -> Result<MorphLadder, HarnessError> {
        Ok(MorphLadder::new(&self.template, &self.family, clip, self.imitation())?)
    }

    /// Files the run depends on, for the manifest.
    pub fn inputs(&self) -> Vec<PathBuf> {
        let e = &self.cfg.experiment;
        let mut v = vec![self.cfg.resolve(&e.scene), self.cfg.resolve(&e.morphs)];
        for p in [&e.script, &e.clip].into_iter().flatten() {
            let p = self.cfg.resolve(p);
            if p.is_file() {
                v.push(p);
            }
        }
        v
    }
}
