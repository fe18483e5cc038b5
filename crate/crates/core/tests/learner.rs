use inhand::learner::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Straight-line re-implementation of the affine/tanh chain.
fn reference_forward(sizes: &[usize], params: &[f64], x: &[f64]) -> Vec<f64> {
    let mut h = x.to_vec();
    let mut off = 0;
    for l in 0..sizes.len() - 1 {
        let (ni, no) = (sizes[l], sizes[l + 1]);
        let mut out = vec![0.0; no];
        for o in 0..no {
            let mut z = params[off + ni * no + o];
            for i in 0..ni {
                z += params[off + o * ni + i] * h[i];
            }
            out[o] = if l + 2 == sizes.len() { z } else { z.tanh() };
        }
        off += (ni + 1) * no;
        h = out;
    }
    h
}

#[test]
fn forward_matches_independent_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sizes in [vec![3, 5, 2], vec![7, 16, 16, 4], vec![1, 1]] {
        let net = Mlp::init(&sizes, 1.5, 1.0, &mut rng);
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = net.forward(&x);
        let b = reference_forward(&sizes, &net.params, &x);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-12);
        }
    }
}

/// Mean over samples of `0.5‖y − t‖²`.
fn batch_loss(net: &Mlp, xs: &[Vec<f64>], ts: &[Vec<f64>]) -> f64 {
    xs.iter()
        .zip(ts)
        .map(|(x, t)| net.forward(x).iter().zip(t).map(|(y, t)| 0.5 * (y - t).powi(2)).sum::<f64>())
        .sum::<f64>()
        / xs.len() as f64
}

fn analytic_grad(net: &Mlp, xs: &[Vec<f64>], ts: &[Vec<f64>]) -> Vec<f64> {
    let mut g = vec![0.0; net.params.len()];
    let mut cache = MlpCache::default();
    for (x, t) in xs.iter().zip(ts) {
        net.forward_cached(x, &mut cache);
        let d: Vec<f64> = cache.output().iter().zip(t).map(|(y, t)| (y - t) / xs.len() as f64).collect();
        net.backward(&cache, &d, &mut g);
    }
    g
}

fn max_rel_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

fn finite_difference(net: &Mlp, f: impl Fn(&Mlp) -> f64) -> Vec<f64> {
    let h = 1e-5;
    let mut probe = net.clone();
    (0..net.params.len())
        .map(|i| {
            let p = net.params[i];
            probe.params[i] = p + h;
            let up = f(&probe);
            probe.params[i] = p - h;
            let down = f(&probe);
            probe.params[i] = p;
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[test]
fn reverse_mode_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for sizes in [vec![2, 4, 2], vec![3, 8, 8, 2], vec![6, 12, 3], vec![4, 16, 16, 5]] {
        let net = Mlp::init(&sizes, 1.0, 1.0, &mut rng);
        let xs: Vec<Vec<f64>> = (0..8).map(|_| (0..sizes[0]).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        let ts: Vec<Vec<f64>> = (0..8).map(|_| (0..*sizes.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let g = analytic_grad(&net, &xs, &ts);
        let fd = finite_difference(&net, |n| batch_loss(n, &xs, &ts));
        let err = max_rel_error(&g, &fd);
        assert!(err <= 1e-4, "{sizes:?}: {err}");
    }
}

#[test]
fn gradient_is_linear_in_batches() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let net = Mlp::init(&[3, 6, 2], 1.0, 1.0, &mut rng);
    let xs: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
    let ts: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let all = analytic_grad(&net, &xs, &ts);
    let a = analytic_grad(&net, &xs[..4], &ts[..4]);
    let b = analytic_grad(&net, &xs[4..], &ts[4..]);
    for i in 0..all.len() {
        assert!((all[i] - (0.4 * a[i] + 0.6 * b[i])).abs() < 1e-12);
    }
}

fn random_batch(agent: &Agent, n: usize, rng: &mut ChaCha8Rng) -> PpoBatch {
    let mut b = PpoBatch::default();
    for _ in 0..n {
        let x: Vec<f64> = (0..agent.obs_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = agent.policy.net.forward(&x);
        let a = agent.policy.sample(&mean, rng);
        // shift old log-probs so some ratios fall outside the clip range
        b.log_probs.push(agent.policy.log_prob(&mean, &a) + rng.random_range(-0.4..0.4));
        b.obs.push(x);
        b.actions.push(a);
        b.advantages.push(rng.random_range(-1.0..1.0));
        b.returns.push(rng.random_range(-1.0..1.0));
    }
    b
}

#[test]
fn surrogate_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let agent = Agent::new(3, 2, &[5], -0.5, &mut rng);
    let batch = random_batch(&agent, 8, &mut rng);
    let idx: Vec<usize> = (0..8).collect();
    let mut g = vec![0.0; agent.policy.param_count()];
    policy_gradient(&agent, &batch, &idx, 0.2, 0.01, &mut g);
    let loss = |p: &[f64]| {
        let mut a = agent.clone();
        a.policy.set_params(p);
        let mut scratch = vec![0.0; p.len()];
        policy_gradient(&a, &batch, &idx, 0.2, 0.01, &mut scratch).0 / 8.0
    };
    let p0 = agent.policy.params();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..p0.len() {
        let mut p = p0.clone();
        p[i] += h;
        let up = loss(&p);
        p[i] -= 2.0 * h;
        let down = loss(&p);
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-6));
    }
    assert!(worst <= 1e-4, "{worst}");
}

#[test]
fn zero_learning_rate_leaves_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut agent = Agent::new(4, 2, &[8], -1.0, &mut rng);
    let batch = random_batch(&agent, 64, &mut rng);
    let before = agent.clone();
    let mut opt = Optimizers::new(&agent);
    ppo_update(&mut agent, &batch, &PpoConfig { minibatch_size: 16, ..PpoConfig::default() }, &mut opt, 0.0, &mut rng).unwrap();
    assert_eq!(agent, before);
}

#[test]
fn unchanged_policy_has_unit_ratios_and_zero_surrogate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let agent = Agent::new(4, 2, &[8], -1.0, &mut rng);
    let mut batch = random_batch(&agent, 100, &mut rng);
    for i in 0..batch.len() {
        let mean = agent.policy.net.forward(&batch.obs[i]);
        batch.log_probs[i] = agent.policy.log_prob(&mean, &batch.actions[i]);
    }
    normalize(&mut batch.advantages);
    let idx: Vec<usize> = (0..batch.len()).collect();
    let mut g = vec![0.0; agent.policy.param_count()];
    let (loss, kl, clipped) = policy_gradient(&agent, &batch, &idx, 0.2, 0.0, &mut g);
    assert!(loss.abs() < 1e-9);
    assert_eq!(kl, 0.0);
    assert_eq!(clipped, 0);
}

#[test]
fn clipped_samples_contribute_no_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let agent = Agent::new(3, 1, &[4], -1.0, &mut rng);
    let mut batch = random_batch(&agent, 1, &mut rng);
    let mean = agent.policy.net.forward(&batch.obs[0]);
    let logp = agent.policy.log_prob(&mean, &batch.actions[0]);
    for (adv, shift) in [(1.0, -0.5), (-1.0, 0.5)] {
        // ratio e^0.5 > 1.2 with A > 0, or e^-0.5 < 0.8 with A < 0
        batch.advantages[0] = adv;
        batch.log_probs[0] = logp + shift;
        let mut g = vec![0.0; agent.policy.param_count()];
        let (_, _, clipped) = policy_gradient(&agent, &batch, &[0], 0.2, 0.0, &mut g);
        assert_eq!(clipped, 1);
        assert!(g.iter().all(|x| *x == 0.0));
    }
}

/// Single state, one action dimension: positive actions pay +1, others −1.
struct Bandit;

impl Environment for Bandit {
    fn obs_dim(&self) -> usize {
        1
    }
    fn action_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> usize {
        1
    }
    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        vec![1.0]
    }
    fn step(&mut self, action: &[f64]) -> Step {
        let r = if action[0] > 0.0 { 1.0 } else { -1.0 };
        Step { obs: vec![1.0], reward: r, tracking: 1.0, terminated: true, truncated: false }
    }
}

/// Abramowitz–Stegun 7.1.26, |error| < 1.5e-7.
fn erf(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.3275911 * x.abs());
    let y = 1.0 - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t + 0.254829592) * t * (-x * x).exp();
    y.copysign(x)
}

fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

#[test]
fn bandit_prefers_the_paying_action() {
    let cfg = PpoConfig {
        samples_per_iteration: 64,
        minibatch_size: 64,
        iterations: 200,
        learning_rate: 3e-3,
        hidden: vec![8],
        ..PpoConfig::default()
    };
    let mut t = Trainer::for_env(&Bandit, cfg, 1);
    for _ in 0..200 {
        t.iterate(|_| Bandit).unwrap();
    }
    let mean = t.agent.act_mean(&[1.0])[0];
    let p = standard_normal_cdf(mean / t.agent.policy.log_std[0].exp());
    assert!(p > 0.95, "P(+1 action) = {p}");
}

/// Deterministic counter: reward 1 per step, episode length depends on the seed.
struct Counter {
    t: usize,
    len: usize,
}

impl Environment for Counter {
    fn obs_dim(&self) -> usize {
        2
    }
    fn action_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> usize {
        30
    }
    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.t = 0;
        self.len = 5 + (seed % 20) as usize;
        vec![0.0, 1.0]
    }
    fn step(&mut self, action: &[f64]) -> Step {
        self.t += 1;
        Step {
            obs: vec![self.t as f64, action[0]],
            reward: 1.0 + action[0].abs(),
            tracking: 1.0,
            terminated: self.t >= self.len,
            truncated: self.t >= 30,
        }
    }
}

#[test]
fn batch_size_bookkeeping() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let agent = Agent::new(2, 1, &[4], -1.0, &mut rng);
    let b = collect_rollouts(&agent, |_| Counter { t: 0, len: 0 }, 1000, 1, 3, Mode::Stochastic).unwrap();
    assert!(b.samples() >= 1000 && b.samples() <= 1000 + 30, "{}", b.samples());
}

#[test]
fn worker_count_keeps_deterministic_returns() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let agent = Agent::new(2, 1, &[4], -1.0, &mut rng);
    struct Fixed(usize);
    impl Environment for Fixed {
        fn obs_dim(&self) -> usize { 2 }
        fn action_dim(&self) -> usize { 1 }
        fn horizon(&self) -> usize { 12 }
        fn reset(&mut self, _: u64) -> Vec<f64> { self.0 = 0; vec![0.0, 0.0] }
        fn step(&mut self, a: &[f64]) -> Step {
            self.0 += 1;
            Step { obs: vec![self.0 as f64, a[0]], reward: a[0], tracking: 1.0, terminated: false, truncated: self.0 == 12 }
        }
    }
    let one = collect_rollouts(&agent, |_| Fixed(0), 240, 1, 9, Mode::Deterministic).unwrap();
    let four = collect_rollouts(&agent, |_| Fixed(0), 240, 4, 9, Mode::Deterministic).unwrap();
    let key = |b: &TrajectoryBatch| {
        let mut r: Vec<u64> = b.episodes.iter().map(|e| e.total_reward().to_bits()).collect();
        r.sort();
        r
    };
    assert_eq!(key(&one), key(&four));
    let again = collect_rollouts(&agent, |_| Fixed(0), 240, 4, 9, Mode::Stochastic).unwrap();
    let twice = collect_rollouts(&agent, |_| Fixed(0), 240, 4, 9, Mode::Stochastic).unwrap();
    assert_eq!(again, twice);
}

#[test]
fn stored_log_probs_match_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let agent = Agent::new(2, 1, &[4], -0.7, &mut rng);
    let b = collect_rollouts(&agent, |_| Counter { t: 0, len: 0 }, 200, 2, 1, Mode::Stochastic).unwrap();
    for ep in &b.episodes {
        for ((o, a), lp) in ep.obs.iter().zip(&ep.actions).zip(&ep.log_probs) {
            let mean = agent.act_mean(o);
            let sigma = agent.policy.log_std[0].exp();
            let z = (a[0] - mean[0]) / sigma;
            let direct = -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
            assert!((direct - lp).abs() <= 1e-12);
        }
    }
}

#[test]
fn training_trace_is_reproducible() {
    let cfg = PpoConfig { samples_per_iteration: 200, minibatch_size: 50, hidden: vec![6], workers: 2, ..PpoConfig::default() };
    let run = || {
        let mut t = Trainer::for_env(&Counter { t: 0, len: 0 }, cfg.clone(), 77);
        (0..3).map(|_| t.iterate(|_| Counter { t: 0, len: 0 }).unwrap().csv_row()).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn advantage_normalization(xs in prop::collection::vec(-100.0f64..100.0, 2..300)) {
        let mut x = xs.clone();
        normalize(&mut x);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9);
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread > 1e-6 {
            let std = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!((std - 1.0).abs() <= 1e-6);
        }
    }
}
