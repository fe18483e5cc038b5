//! Ordered families of related tasks, from source (id 0) to target (last id).

use std::sync::Arc;

use crate::imitation::{ImitationConfig, ImitationEnv, ImitationError, ReferenceClip, WorldTemplate};
use crate::learner::{Environment, Step};
use crate::morphology::MorphFamily;

pub trait ShapeLadder: Sync {
    type Env: Environment;

    /// Number of shapes, `M + 1`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn env(&self, shape: usize) -> Self::Env;

    fn label(&self, shape: usize) -> String {
        format!("shape{shape}")
    }

    fn target(&self) -> usize {
        self.len() - 1
    }
}

/// One clip tracked with each object of a morph family.
#[derive(Clone, Debug)]
pub struct MorphLadder {
    pub templates: Vec<Arc<WorldTemplate>>,
    pub clip: Arc<ReferenceClip>,
    pub cfg: ImitationConfig,
    pub ts: Vec<f64>,
}

impl MorphLadder {
    /// `base` supplies the scene and object name; its object is replaced by
    /// each member of `family`.
    pub fn new(base: &WorldTemplate, family: &MorphFamily, clip: ReferenceClip, cfg: ImitationConfig) -> Result<Self, ImitationError> {
        let templates = family
            .decompositions
            .iter()
            .map(|d| base.replace_object(d).map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        let clip = Arc::new(clip);
        // surface configuration errors here rather than inside worker threads
        ImitationEnv::new(templates[0].clone(), clip.clone(), cfg)?;
        Ok(Self {
            templates,
            clip,
            cfg,
            ts: family.ts.clone(),
        })
    }
}

impl ShapeLadder for MorphLadder {
    type Env = ImitationEnv;

    fn len(&self) -> usize {
        self.templates.len()
    }

    fn env(&self, shape: usize) -> ImitationEnv {
        ImitationEnv::new(self.templates[shape].clone(), self.clip.clone(), self.cfg).expect("validated in MorphLadder::new")
    }

    fn label(&self, shape: usize) -> String {
        format!("morph{:.2}", self.ts[shape])
    }
}

/// Draws one member per episode, uniformly, from the reset seed.
pub struct MixtureEnv<E> {
    pub members: Vec<E>,
    active: usize,
}

impl<E: Environment> MixtureEnv<E> {
    pub fn new(members: Vec<E>) -> Self {
        assert!(!members.is_empty(), "mixture needs at least one member");
        Self { members, active: 0 }
    }

    pub fn active(&self) -> usize {
        self.active
    }
}

impl<E: Environment> Environment for MixtureEnv<E> {
    fn obs_dim(&self) -> usize {
        self.members[0].obs_dim()
    }

    fn action_dim(&self) -> usize {
        self.members[0].action_dim()
    }

    fn horizon(&self) -> usize {
        self.members[self.active].horizon()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mixed = seed.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 32;
        self.active = (mixed % self.members.len() as u64) as usize;
        self.members[self.active].reset(seed)
    }

    fn step(&mut self, action: &[f64]) -> Step {
        self.members[self.active].step(action)
    }
}
