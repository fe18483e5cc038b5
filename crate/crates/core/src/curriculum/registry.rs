//! Best score and policy per shape, and the choice of the next shape to train.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use super::{CurriculumConfig, CurriculumError};
use crate::learner::Agent;

#[derive(Clone, Debug)]
pub struct PolicyRegistry {
    /// Best goodness per shape.
    pub scores: Vec<f64>,
    /// Policy that achieved `scores[j]`.
    pub policies: Vec<Agent>,
    /// Evaluation seeds under which `scores[j]` was measured.
    pub seeds: Vec<Vec<u64>>,
    /// First training iteration at which shape `j` was successful.
    pub first_success: Vec<Option<usize>>,
}

impl PolicyRegistry {
    /// Every entry starts at score 0 with the source policy.
    pub fn new(source: &Agent, shapes: usize) -> Self {
        Self {
            scores: vec![0.0; shapes],
            policies: vec![source.clone(); shapes],
            seeds: vec![Vec::new(); shapes],
            first_success: vec![None; shapes],
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Replaces entries the policy strictly improves on. Returns the shapes
    /// that changed.
    pub fn update(&mut self, policy: &Agent, scores: &[f64], seeds: &[u64], iteration: usize, threshold: f64) -> Vec<usize> {
        let mut changed = Vec::new();
        for (j, &s) in scores.iter().enumerate() {
            if s > self.scores[j] {
                self.scores[j] = s;
                self.policies[j] = policy.clone();
                self.seeds[j] = seeds.to_vec();
                changed.push(j);
            }
            if self.first_success[j].is_none() && self.scores[j] >= threshold {
                self.first_success[j] = Some(iteration);
            }
        }
        changed
    }

    pub fn successful(&self, j: usize, threshold: f64) -> bool {
        self.scores[j] >= threshold
    }

    /// Writes `shape_<j>.policy` per shape and a `scores.manifest`.
    pub fn save(&self, dir: &Path) -> Result<(), CurriculumError> {
        std::fs::create_dir_all(dir).map_err(|e| CurriculumError::Io(format!("{}: {e}", dir.display())))?;
        let mut manifest = String::new();
        for j in 0..self.len() {
            let file = format!("shape_{j}.policy");
            self.policies[j].save(&dir.join(&file))?;
            let first = self.first_success[j].map_or("-".to_string(), |i| i.to_string());
            let seeds: Vec<String> = self.seeds[j].iter().map(u64::to_string).collect();
            let _ = writeln!(manifest, "shape {j} {:.16e} {first} {file} {}", self.scores[j], seeds.join(","));
        }
        let path = dir.join("scores.manifest");
        std::fs::write(&path, manifest).map_err(|e| CurriculumError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(dir: &Path) -> Result<Self, CurriculumError> {
        let path = dir.join("scores.manifest");
        let text = std::fs::read_to_string(&path).map_err(|e| CurriculumError::Io(format!("{}: {e}", path.display())))?;
        let mut reg = Self {
            scores: Vec::new(),
            policies: Vec::new(),
            seeds: Vec::new(),
            first_success: Vec::new(),
        };
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |m: &str| CurriculumError::Config(format!("{}:{}: {m}", path.display(), i + 1));
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() < 5 || tok[0] != "shape" {
                return Err(bad("expected `shape <j> <score> <first> <file> [seeds]`"));
            }
            if tok[1].parse::<usize>().ok() != Some(reg.len()) {
                return Err(bad("shapes must be listed in order"));
            }
            reg.scores.push(tok[2].parse().map_err(|_| bad("bad score"))?);
            reg.first_success.push(if tok[3] == "-" { None } else { Some(tok[3].parse().map_err(|_| bad("bad iteration"))?) });
            reg.policies.push(Agent::load(&dir.join(tok[4]))?);
            let seeds = match tok.get(5) {
                Some(s) => s.split(',').map(|x| x.parse().map_err(|_| bad("bad seed"))).collect::<Result<_, _>>()?,
                None => Vec::new(),
            };
            reg.seeds.push(seeds);
        }
        Ok(reg)
    }
}

/// Best unsuccessful shape (lowest id on ties). If the last `R` picks were
/// all the same shape, a different one is drawn uniformly; once every shape
/// is successful, any shape is drawn uniformly.
pub fn select_next<R: Rng>(scores: &[f64], cfg: &CurriculumConfig, history: &[usize], rng: &mut R) -> usize {
    let n = scores.len();
    let r = cfg.starvation_limit;
    if n > 1 && r > 0 && history.len() >= r {
        let last = history[history.len() - 1];
        if history[history.len() - r..].iter().all(|&h| h == last) {
            let k = rng.random_range(0..n - 1);
            return if k >= last { k + 1 } else { k };
        }
    }
    let mut best: Option<usize> = None;
    for (j, &s) in scores.iter().enumerate() {
        if s < cfg.success_threshold && best.is_none_or(|b| s > scores[b]) {
            best = Some(j);
        }
    }
    best.unwrap_or_else(|| rng.random_range(0..n))
}
