//! Gaussian policy, value network, observation filter and checkpoints.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mlp::Mlp;
use super::LearnerError;

const LN_2PI: f64 = 1.8378770664093453;
const NORM_CLIP: f64 = 10.0;

/// Running mean / variance filter (Chan's parallel update). Frozen unless
/// [`RunningNorm::update`] is called.
#[derive(Clone, Debug, PartialEq)]
pub struct RunningNorm {
    pub count: f64,
    pub mean: Vec<f64>,
    /// Sum of squared deviations.
    pub m2: Vec<f64>,
}

impl RunningNorm {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn update<'a>(&mut self, batch: impl IntoIterator<Item = &'a [f64]>) {
        let dim = self.dim();
        let (mut n, mut mean, mut m2) = (0.0, vec![0.0; dim], vec![0.0; dim]);
        for x in batch {
            n += 1.0;
            for i in 0..dim {
                let d = x[i] - mean[i];
                mean[i] += d / n;
                m2[i] += d * (x[i] - mean[i]);
            }
        }
        if n == 0.0 {
            return;
        }
        let total = self.count + n;
        for i in 0..dim {
            let d = mean[i] - self.mean[i];
            self.mean[i] += d * n / total;
            self.m2[i] += m2[i] + d * d * self.count * n / total;
        }
        self.count = total;
    }

    pub fn std(&self, i: usize) -> f64 {
        if self.count < 2.0 {
            return 1.0;
        }
        (self.m2[i] / self.count).sqrt().max(1e-8)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        if self.count < 2.0 {
            return x.to_vec();
        }
        x.iter()
            .enumerate()
            .map(|(i, v)| ((v - self.mean[i]) / self.std(i)).clamp(-NORM_CLIP, NORM_CLIP))
            .collect()
    }
}

/// Diagonal Gaussian with state-independent log standard deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPolicy {
    pub net: Mlp,
    pub log_std: Vec<f64>,
}

pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - 0.5 * LN_2PI
        })
        .sum()
}

impl GaussianPolicy {
    pub fn new<R: Rng>(obs_dim: usize, hidden: &[usize], action_dim: usize, init_log_std: f64, rng: &mut R) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(action_dim);
        Self {
            net: Mlp::init(&sizes, 1.0, 0.01, rng),
            log_std: vec![init_log_std; action_dim],
        }
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn param_count(&self) -> usize {
        self.net.params.len() + self.log_std.len()
    }

    pub fn forward(&self, obs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.net.forward(obs), self.log_std.clone())
    }

    pub fn sample<R: Rng>(&self, mean: &[f64], rng: &mut R) -> Vec<f64> {
        mean.iter()
            .zip(&self.log_std)
            .map(|(m, ls)| {
                let e: f64 = StandardNormal.sample(rng);
                m + ls.exp() * e
            })
            .collect()
    }

    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        gaussian_log_prob(mean, &self.log_std, action)
    }

    pub fn entropy(&self) -> f64 {
        self.log_std.iter().map(|ls| ls + 0.5 * (1.0 + LN_2PI)).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = self.net.params.clone();
        p.extend_from_slice(&self.log_std);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let n = self.net.params.len();
        self.net.params.copy_from_slice(&p[..n]);
        self.log_std.copy_from_slice(&p[n..]);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueNet {
    pub net: Mlp,
}

impl ValueNet {
    pub fn new<R: Rng>(obs_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Self {
            net: Mlp::init(&sizes, 1.0, 1.0, rng),
        }
    }

    pub fn forward(&self, obs: &[f64]) -> f64 {
        self.net.forward(obs)[0]
    }
}

/// Everything needed to act and to resume training: observation filter,
/// policy and critic.
#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub obs_norm: RunningNorm,
    pub policy: GaussianPolicy,
    pub value: ValueNet,
}

impl Agent {
    pub fn new<R: Rng>(obs_dim: usize, action_dim: usize, hidden: &[usize], init_log_std: f64, rng: &mut R) -> Self {
        Self {
            obs_norm: RunningNorm::new(obs_dim),
            policy: GaussianPolicy::new(obs_dim, hidden, action_dim, init_log_std, rng),
            value: ValueNet::new(obs_dim, hidden, rng),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_norm.dim()
    }

    pub fn action_dim(&self) -> usize {
        self.policy.action_dim()
    }

    /// Mean action and log std for a raw observation.
    pub fn act_mean(&self, obs: &[f64]) -> Vec<f64> {
        self.policy.net.forward(&self.obs_norm.apply(obs))
    }

    pub fn value_of(&self, obs: &[f64]) -> f64 {
        self.value.forward(&self.obs_norm.apply(obs))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# inhand agent checkpoint\n");
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        let sizes = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "topology {}", sizes(&self.policy.net.sizes));
        let _ = writeln!(s, "value_topology {}", sizes(&self.value.net.sizes));
        let _ = writeln!(s, "obs_count {:.16e}", self.obs_norm.count);
        let _ = writeln!(s, "obs_mean {}", join(&self.obs_norm.mean));
        let _ = writeln!(s, "obs_m2 {}", join(&self.obs_norm.m2));
        let _ = writeln!(s, "log_std {}", join(&self.policy.log_std));
        let _ = writeln!(s, "policy_params {}", join(&self.policy.net.params));
        let _ = writeln!(s, "value_params {}", join(&self.value.net.params));
        s
    }

    pub fn parse(text: &str) -> Result<Self, LearnerError> {
        let mut fields = std::collections::HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            fields.insert(key.to_string(), (i + 1, rest.to_string()));
        }
        let get = |k: &str| {
            fields
                .get(k)
                .ok_or_else(|| LearnerError::Checkpoint { line: 0, msg: format!("missing `{k}`") })
        };
        let floats = |k: &str| -> Result<Vec<f64>, LearnerError> {
            let (line, v) = get(k)?;
            v.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| LearnerError::Checkpoint { line: *line, msg: format!("bad number `{t}`") }))
                .collect()
        };
        let sizes = |k: &str| -> Result<Vec<usize>, LearnerError> {
            let (line, v) = get(k)?;
            v.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| LearnerError::Checkpoint { line: *line, msg: format!("bad size `{t}`") }))
                .collect()
        };
        let ptop = sizes("topology")?;
        let vtop = sizes("value_topology")?;
        if ptop.len() < 2 || vtop.len() < 2 || ptop[0] != vtop[0] || *vtop.last().unwrap() != 1 || ptop.contains(&0) || vtop.contains(&0) {
            return Err(LearnerError::Checkpoint { line: get("topology")?.0, msg: "inconsistent topology".into() });
        }
        let mut policy_net = Mlp::zeros(&ptop);
        let mut value_net = Mlp::zeros(&vtop);
        let check = |k: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(LearnerError::Checkpoint { line: get(k).map(|f| f.0).unwrap_or(0), msg: format!("`{k}` has {got} values, expected {want}") })
            }
        };
        let pp = floats("policy_params")?;
        check("policy_params", pp.len(), policy_net.params.len())?;
        policy_net.params = pp;
        let vp = floats("value_params")?;
        check("value_params", vp.len(), value_net.params.len())?;
        value_net.params = vp;
        let log_std = floats("log_std")?;
        check("log_std", log_std.len(), *ptop.last().unwrap())?;
        let mean = floats("obs_mean")?;
        check("obs_mean", mean.len(), ptop[0])?;
        let m2 = floats("obs_m2")?;
        check("obs_m2", m2.len(), ptop[0])?;
        let count = floats("obs_count")?;
        check("obs_count", count.len(), 1)?;
        Ok(Self {
            obs_norm: RunningNorm { count: count[0], mean, m2 },
            policy: GaussianPolicy { net: policy_net, log_std },
            value: ValueNet { net: value_net },
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnerError> {
        std::fs::write(path, self.to_text()).map_err(|e| LearnerError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, LearnerError> {
        let text = std::fs::read_to_string(path).map_err(|e| LearnerError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
