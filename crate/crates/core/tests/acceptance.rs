//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 3 6`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use inhand::curriculum::*;
use inhand::harness::cli::main_with_args;
use inhand::harness::*;
use inhand::imitation::{Deviations, RewardConfig, RewardTerms};
use inhand::learner::*;
use inhand::morphology::*;
use inhand::physics::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 1.0 / 600.0;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn asset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets").join(name)
}

// 1

fn reward_oracle() -> Outcome {
    let cfg = RewardConfig::default();
    let perfect = RewardTerms::from_deviations(&Deviations::default(), &cfg);
    let d = Deviations {
        object_pos: 1.0 / cfg.k_od,
        ..Deviations::default()
    };
    let r = RewardTerms::from_deviations(&d, &cfg);
    let e1 = (-1.0f64).exp();
    let err = (r.od - e1).abs().max((r.total - (4.0 * e1 + 4.0 + 0.2)).abs());
    check(perfect.total == 8.2 && err <= 1e-12, format!("perfect {} e^-1 error {err:.1e}", perfect.total))
}

// 2

fn goodness_oracle() -> Outcome {
    let cases = [(goodness_of(120, 120, 120.0), 1.0), (goodness_of(60, 120, 60.0), 0.25), (goodness_of(100, 100, 55.0), 0.55)];
    let ok = cases.iter().all(|(f, want)| f == want) && cases[2].0 >= CurriculumConfig::default().success_threshold;
    check(ok, format!("{:?}", cases.map(|c| c.0)))
}

// 3

fn boxed(half_w: f64, half_h: f64) -> Shape {
    let p = Vec2::new;
    Shape::Polygon(ConvexPolygon::new(vec![p(-half_w, -half_h), p(half_w, -half_h), p(half_w, half_h), p(-half_w, half_h)]).unwrap())
}

fn box_body(mass: f64, half: f64, pose: Pose2) -> RigidBody {
    RigidBody::dynamic("box", mass, mass * (2.0 * half).powi(2) / 6.0, pose, vec![boxed(half, half)]).unwrap()
}

fn ground() -> RigidBody {
    RigidBody::kinematic("ground", Pose2::new(0.0, -0.5, 0.0), vec![boxed(5.0, 0.5)])
}

fn resting_penetration() -> f64 {
    let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
    w.add_body(ground());
    w.add_body(box_body(1.0, 0.1, Pose2::new(0.0, 0.1005, 0.0)));
    w.add_body(box_body(0.3, 0.05, Pose2::new(0.02, 0.252, 0.0)));
    let mut max_pen: f64 = 0.0;
    for _ in 0..5 * 600 {
        w.step(&[], DT).unwrap();
        max_pen = w.contacts.iter().fold(max_pen, |m, c| m.max(c.penetration));
    }
    max_pen
}

fn friction_cone_violations() -> (usize, usize) {
    let (mut checked, mut bad) = (0, 0);
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
        w.add_body(ground());
        for i in 0..3 {
            let mut b = box_body(
                rng.random_range(0.2..2.0),
                rng.random_range(0.03..0.08),
                Pose2::new(rng.random_range(-0.1..0.1), 0.1 + 0.2 * i as f64, rng.random_range(-3.0..3.0)),
            );
            b.linear_velocity = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..0.0));
            b.angular_velocity = rng.random_range(-5.0..5.0);
            w.add_body(b);
        }
        let mu = w.contact.friction;
        for _ in 0..1000 {
            w.step(&[], DT).unwrap();
            for c in &w.contacts {
                checked += 1;
                if c.normal_impulse < 0.0 || c.tangent_impulse.abs() > mu * c.normal_impulse + 1e-9 {
                    bad += 1;
                }
            }
        }
    }
    (checked, bad)
}

fn worst_momentum_drift() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut w = SimWorld::new(Vec2::ZERO);
        w.contact.restitution = rng.random_range(0.0..1.0);
        for side in [-1.0, 1.0] {
            let r = rng.random_range(0.05..0.12);
            let m = rng.random_range(0.5..2.0);
            let mut b = RigidBody::dynamic("disk", m, 0.5 * m * r * r, Pose2::new(0.3 * side, rng.random_range(-0.1..0.1), 0.0), vec![Shape::Capsule(Capsule::disk(Vec2::ZERO, r))]).unwrap();
            b.linear_velocity = Vec2::new(-side * rng.random_range(0.5..3.0), rng.random_range(-0.3..0.3));
            b.angular_velocity = rng.random_range(-4.0..4.0);
            w.add_body(b);
        }
        let before = w.total_momentum();
        for _ in 0..400 {
            w.step(&[], DT).unwrap();
        }
        worst = worst.max((w.total_momentum() - before).length() / before.length());
    }
    worst
}

fn pendulum(implicit: bool) -> SimWorld {
    let hand = HandModel {
        name: "pendulum".into(),
        palm: Capsule::new(Vec2::new(-0.01, 0.0), Vec2::new(0.01, 0.0), 0.01),
        palm_mass: 1.0,
        fingers: vec![FingerChain {
            base: Vec2::ZERO,
            base_angle: -std::f64::consts::FRAC_PI_2,
            links: vec![LinkSpec {
                length: 0.3,
                radius: 0.01,
                mass: 0.1,
                limits: [-100.0, 100.0],
                gains: PdGains::critical(1000.0),
            }],
        }],
        root_gains: [PdGains::critical(1000.0); 3],
        fixed_root: true,
        implicit_damping: implicit,
    };
    let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
    w.add_hand(hand, Pose2::IDENTITY).unwrap();
    w
}

/// Largest joint angle over 10 s tracking a sine, infinite on blow-up.
fn pd_peak(stable: bool) -> f64 {
    let mut w = pendulum(stable);
    let mut peak: f64 = 0.0;
    for i in 0..6000 {
        let h = &w.hands[0];
        let targets = PdTargets {
            root: Pose2::IDENTITY,
            q: vec![0.5 * (2.0 * i as f64 * DT).sin()],
        };
        let tau = if stable {
            hand_stable_pd(&h.model, &h.state, &targets, DT)
        } else {
            explicit_pd(&h.state, &targets, &h.model.dof_gains())
        };
        if w.step(&tau, DT).is_err() || !w.hands[0].state.q[0].is_finite() {
            return f64::INFINITY;
        }
        peak = peak.max(w.hands[0].state.q[0].abs());
    }
    peak
}

fn physics_suite() -> Outcome {
    let pen = resting_penetration();
    let (checked, bad) = friction_cone_violations();
    let drift = worst_momentum_drift();
    let (stable, explicit) = (pd_peak(true), pd_peak(false));
    let ok = pen <= 1.5e-3 && checked >= 10_000 && bad == 0 && drift <= 1e-6 && stable <= 1.0 && explicit > 10.0;
    check(
        ok,
        format!("penetration {:.2} mm, cone {bad}/{checked} violations, momentum {drift:.1e}, stable PD peak {stable:.2} rad, explicit {explicit:.1e}", pen * 1e3),
    )
}

// 4

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let nets = [vec![2, 4, 2], vec![3, 8, 8, 2], vec![6, 12, 3], vec![4, 16, 16, 5]];
    for sizes in &nets {
        let net = Mlp::init(sizes, 1.0, 1.0, &mut rng);
        let xs: Vec<Vec<f64>> = (0..8).map(|_| (0..sizes[0]).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        let ts: Vec<Vec<f64>> = (0..8).map(|_| (0..*sizes.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let loss = |n: &Mlp| -> f64 {
            xs.iter()
                .zip(&ts)
                .map(|(x, t)| n.forward(x).iter().zip(t).map(|(y, t)| 0.5 * (y - t).powi(2)).sum::<f64>())
                .sum::<f64>()
                / 8.0
        };
        let mut g = vec![0.0; net.params.len()];
        let mut cache = MlpCache::default();
        for (x, t) in xs.iter().zip(&ts) {
            net.forward_cached(x, &mut cache);
            let d: Vec<f64> = cache.output().iter().zip(t).map(|(y, t)| (y - t) / 8.0).collect();
            net.backward(&cache, &d, &mut g);
        }
        let mut probe = net.clone();
        let h = 1e-5;
        for (i, gi) in g.iter().enumerate() {
            let p = net.params[i];
            probe.params[i] = p + h;
            let up = loss(&probe);
            probe.params[i] = p - h;
            let down = loss(&probe);
            probe.params[i] = p;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - gi).abs() / fd.abs().max(gi.abs()).max(1e-6));
        }
    }
    check(worst <= 1e-4, format!("{} nets, max relative error {worst:.1e}", nets.len()))
}

// 5

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

/// P(a > 0) for a Gaussian with this mean and standard deviation.
fn positive_mass(mean: f64, std: f64) -> f64 {
    // Abramowitz–Stegun 7.1.26
    let x = mean / std / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * x.abs());
    let y = 1.0 - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t + 0.254829592) * t * (-x * x).exp();
    0.5 * (1.0 + y.copysign(x))
}

/// Iterations until the deterministic return averaged over 16 phases
/// reaches 90% of the horizon, checked every 10 iterations.
fn testbed_iterations(seed: u64) -> Option<usize> {
    let env = PointTrackingEnv::new(TrackingParams::default(), 0.0);
    let max = env.horizon() as f64;
    let mut tr = Trainer::for_env(&env, SyntheticLadder::ppo(300), seed);
    for it in (0..=300).step_by(10) {
        if it > 0 {
            for _ in 0..10 {
                tr.iterate(|_| env.clone()).unwrap();
            }
        }
        let ret: f64 = (0..16u64)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                run_episode(&tr.agent, &mut env.clone(), Mode::Deterministic, 1000 + s, &mut rng).total_reward()
            })
            .sum::<f64>()
            / 16.0;
        if ret >= 0.9 * max {
            return Some(it);
        }
    }
    None
}

fn ppo_sanity() -> Outcome {
    let cfg = PpoConfig {
        samples_per_iteration: 64,
        minibatch_size: 64,
        iterations: 200,
        learning_rate: 3e-3,
        hidden: vec![8],
        ..PpoConfig::default()
    };
    let mut t = Trainer::for_env(&Bandit, cfg, 1);
    let mut solved_at = None;
    for it in 1..=200 {
        t.iterate(|_| Bandit).unwrap();
        let p = positive_mass(t.agent.act_mean(&[1.0])[0], t.agent.policy.log_std[0].exp());
        if p > 0.95 {
            solved_at = Some(it);
            break;
        }
    }
    let testbed: Vec<Option<usize>> = (0..3).map(testbed_iterations).collect();
    let ok = solved_at.is_some() && testbed.iter().all(Option::is_some);
    check(ok, format!("bandit solved at {solved_at:?}, testbed seeds reach 90% at {testbed:?}"))
}

// 6

fn l_shape() -> Mesh2 {
    let p = Vec2::new;
    Mesh2::new("L", vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(1.0, 1.0), p(1.0, 2.0), p(0.0, 2.0)]).unwrap()
}

fn shoelace(v: &[Vec2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].x * v[(i + 1) % n].y - v[(i + 1) % n].x * v[i].y).sum::<f64>()
}

fn convex(v: &[Vec2]) -> bool {
    let n = v.len();
    (0..n).all(|i| (v[(i + 1) % n] - v[i]).cross(v[(i + 2) % n] - v[(i + 1) % n]) >= -1e-9)
}

fn morph_suite() -> Outcome {
    let square = Mesh2::square("square", 0.06);
    let star = Mesh2::star("star", 6, 0.068, 0.02).unwrap();
    let m0 = morph(&square, &star, 0.0).unwrap();
    let m1 = morph(&square, &star, 1.0).unwrap();
    let endpoints = m1.vertices() == star.vertices() && m0.vertices().iter().zip(star.vertices()).all(|(m, v)| *m == project_to_surface(*v, &square));
    let straight = (1..10).all(|k| {
        let t = k as f64 / 10.0;
        let mt = morph(&square, &star, t).unwrap();
        mt.vertices().iter().zip(m0.vertices()).zip(star.vertices()).all(|((m, a), v)| *m == *a * (1.0 - t) + *v * t)
    });
    let mut worst_area: f64 = 0.0;
    let mut all_convex = true;
    for mesh in [square.clone(), l_shape(), star.clone()] {
        let d = convex_decompose(&mesh, 1.0).unwrap();
        let parts: f64 = d.parts.iter().map(|p| shoelace(p.vertices())).sum();
        let area = shoelace(mesh.vertices());
        worst_area = worst_area.max((parts - area).abs() / area);
        all_convex &= d.parts.iter().all(|p| convex(p.vertices()));
    }
    check(
        endpoints && straight && worst_area <= 5e-3 && all_convex,
        format!("endpoints {endpoints}, straight paths {straight}, area error {worst_area:.1e}, convex parts {all_convex}"),
    )
}

// 7

fn scheduler_reproduction() -> Outcome {
    let ladder = SyntheticLadder::hard_middle();
    let cc = CurriculumConfig {
        budget: 200,
        update_interval: 20,
        ..CurriculumConfig::default()
    };
    let target = ladder.target();
    let (mut greedy, mut naive, mut earlier, mut both) = (0, 0, 0, 0);
    for seed in 0..10 {
        let mut tr = Trainer::for_env(&ladder.env(0), SyntheticLadder::ppo(10), seed);
        for _ in 0..10 {
            tr.iterate(|_| ladder.env(0)).unwrap();
        }
        let ppo = SyntheticLadder::ppo(cc.budget);
        let (_, g) = run_greedy(&ladder, &tr.agent, &ppo, &cc, seed).unwrap();
        let (_, n) = run_naive(&ladder, &tr.agent, &ppo, &cc, seed).unwrap();
        let (gf, nf) = (g.first_success(target), n.first_success(target));
        greedy += usize::from(gf.is_some());
        naive += usize::from(nf.is_some());
        if let (Some(a), Some(b)) = (gf, nf) {
            both += 1;
            earlier += usize::from(a < b);
        }
    }
    check(
        greedy >= 8 && naive <= 2 && earlier == both,
        format!("target reached: greedy {greedy}/10, naive {naive}/10, greedy earlier in {earlier}/{both} shared successes"),
    )
}

// 8

fn desk_demo() -> Outcome {
    let exp = Experiment::load(&asset("demo.toml")).map_err(|e| e.to_string())?;
    let clip = exp.clip().map_err(|e| e.to_string())?;
    let frames = clip.frames().len();
    let duration = clip.duration();
    if frames != 480 || clip.frame_rate != 120.0 {
        return Err(format!("clip has {frames} frames at {} Hz", clip.frame_rate));
    }
    let ladder = exp.ladder(clip).map_err(|e| e.to_string())?;
    let ppo = exp.cfg.ppo.ppo();
    let per_iter = ppo.samples_per_iteration;
    let (source_budget, transfer_budget) = (2_000_000 / per_iter, 4_000_000 / per_iter);
    let source_seeds = round_seeds(0, 0, 8);
    let mut tr = Trainer::for_env(&ladder.env(0), ppo.clone(), 0);
    let source_iters = loop {
        let f = goodness(&tr.agent, &mut ladder.env(0), &source_seeds);
        // an untrained residual policy already tracks the square, so insist on some training
        if tr.iteration >= 20 && completes(&tr.agent, &ladder, 0, 0) && f >= 0.55 {
            break Some(tr.iteration);
        }
        if tr.iteration >= source_budget {
            break None;
        }
        for _ in 0..10 {
            tr.iterate(|_| ladder.env(0)).map_err(|e| e.to_string())?;
        }
    };
    let Some(source_iters) = source_iters else {
        return Err(format!("source not learned within {source_budget} iterations"));
    };
    let source_eval = evaluate(&tr.agent, &mut ladder.env(0), 500, Mode::Stochastic, 0);
    let cc = CurriculumConfig {
        budget: transfer_budget,
        stop_on_target: true,
        ..exp.cfg.curriculum.clone()
    };
    let target = ladder.target();
    let mut transfers = Vec::new();
    for seed in 0..4 {
        let (reg, trace) = run_greedy(&ladder, &tr.agent, &ppo, &cc, seed).map_err(|e| e.to_string())?;
        let report = evaluate(&reg.policies[target], &mut ladder.env(target), 500, Mode::Stochastic, seed);
        let ok = reg.scores[target] >= cc.success_threshold && report.success_percent() >= 50.0;
        transfers.push((ok, trace.first_success(target), report.success_percent()));
    }
    let successes = transfers.iter().filter(|t| t.0).count();
    let detail = format!(
        "{duration} s clip; source learned at iteration {source_iters}, {:.1}% of 500 rollouts succeed; star transfer {successes}/4 (first success, success %): {:?}",
        source_eval.success_percent(),
        transfers.iter().map(|t| (t.1, t.2)).collect::<Vec<_>>()
    );
    check(source_eval.success_percent() >= 50.0 && successes >= 2, detail)
}

// 9

fn small_config(dir: &Path) -> PathBuf {
    let text = format!(
        "[experiment]\nscene = \"{}\"\nscript = \"{}\"\nmorphs = \"{}\"\nseeds = [7]\nout = \"{}\"\n\n\
         [ppo]\nsamples_per_iteration = 600\nminibatch_size = 200\nepochs = 2\niterations = 2\nhidden = [16]\n\n\
         [curriculum]\nupdate_interval = 1\nbudget = 2\neval_rollouts = 2\n\n[eval]\nrollouts = 10\n",
        asset("pinch.scene.toml").display(),
        asset("rotate_square_90.script.toml").display(),
        asset("square_star.manifest").display(),
        dir.join("runs").display(),
    );
    let p = dir.join("small.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let cli = |args: &[&str]| {
        let mut v = vec!["inhand"];
        v.extend_from_slice(args);
        main_with_args(v)
    };
    let runs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for out in &runs {
        let o = out.to_str().unwrap();
        let policy = out.join("policy.ckpt");
        let p = policy.to_str().unwrap();
        let codes = [
            cli(&["train", "--config", cfg, "--out", o]),
            cli(&["eval", "--config", cfg, "--out", o, "--policy", p]),
            cli(&["curriculum", "--config", cfg, "--out", out.join("c").to_str().unwrap(), "--source", p]),
        ];
        if codes.iter().any(|&c| c != 0) {
            return Err(format!("commands exited with {codes:?}"));
        }
    }
    let files = ["train.csv", "eval_summary.csv", "eval_completion.csv", "c/trace.csv"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(runs[0].join(f)).ok() != std::fs::read(runs[1].join(f)).ok())
        .collect();
    let ladder = SyntheticLadder::hard_middle();
    let source = Trainer::for_env(&ladder.env(0), SyntheticLadder::ppo(0), 3).agent;
    let cc = CurriculumConfig {
        budget: 40,
        ..CurriculumConfig::default()
    };
    let trace = || run_greedy(&ladder, &source, &SyntheticLadder::ppo(40), &cc, 3).unwrap().1.to_csv();
    let synthetic_same = trace() == trace();
    check(
        differing.is_empty() && synthetic_same,
        format!("{} CLI outputs compared, differing {differing:?}; synthetic greedy trace identical {synthetic_same}", files.len()),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "reward oracle", reward_oracle),
        (2, "goodness oracle", goodness_oracle),
        (3, "physics suite", physics_suite),
        (4, "gradient check", gradient_check),
        (5, "PPO sanity", ppo_sanity),
        (6, "morph suite", morph_suite),
        (7, "scheduler reproduction", scheduler_reproduction),
        (8, "end-to-end desk demo", desk_demo),
        (9, "determinism", determinism),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {n} ({name}): PASS [{secs:.1} s] {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{secs:.1} s] {d}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
