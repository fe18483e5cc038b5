#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaeConfig {
    pub gamma: f64,
    pub lambda: f64,
}

impl Default for GaeConfig {
    fn default() -> Self {
        Self { gamma: 0.95, lambda: 0.95 }
    }
}

/// Generalized advantage estimation over one or more concatenated episodes.
///
/// `values` has one extra trailing entry, the bootstrap value after the last
/// step. `done[t]` cuts the recursion after step `t` (use 0 as the next value
/// there; for a truncated episode pass its bootstrap through `values[t+1]`
/// and leave `done[t]` false).
pub fn gae(rewards: &[f64], values: &[f64], done: &[bool], cfg: GaeConfig) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert_eq!(values.len(), n + 1);
    assert_eq!(done.len(), n);
    let mut adv = vec![0.0; n];
    let mut next = 0.0;
    for t in (0..n).rev() {
        let live = if done[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + cfg.gamma * values[t + 1] * live - values[t];
        next = delta + cfg.gamma * cfg.lambda * live * next;
        adv[t] = next;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Shifts and scales to mean 0, standard deviation 1 (population).
pub fn normalize(x: &mut [f64]) {
    let n = x.len() as f64;
    if x.is_empty() {
        return;
    }
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for v in x.iter_mut() {
        *v -= mean;
    }
    if std > 1e-12 {
        for v in x.iter_mut() {
            *v /= std;
        }
    }
    // second pass removes the residual rounding in the mean
    let m2 = x.iter().sum::<f64>() / n;
    for v in x.iter_mut() {
        *v -= m2;
    }
}
