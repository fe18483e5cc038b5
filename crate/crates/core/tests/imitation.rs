use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use inhand::harness::Experiment;
use inhand::imitation::*;
use inhand::learner::{Agent, Environment, Mode};
use inhand::physics::{angle_diff, ContactVector, Pose2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn asset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets").join(name)
}

fn demo() -> Experiment {
    Experiment::load(&asset("demo.toml")).unwrap()
}

fn square_env(exp: &Experiment) -> ImitationEnv {
    let clip = exp.generate_clip().unwrap();
    ImitationEnv::new(Arc::new(exp.template.clone()), Arc::new(clip), exp.imitation()).unwrap()
}

fn brute_force_wrap(x: f64) -> f64 {
    (-20..=20).map(|k| x + 2.0 * PI * k as f64).filter(|v| *v > -PI && *v <= PI).min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap()
}

fn layout(exp: &Experiment) -> Vec<(usize, usize)> {
    exp.template.hand_layout()
}

fn zero_contacts(exp: &Experiment) -> ContactVector {
    ContactVector(vec![0.0; layout(exp).iter().map(|h| h.1).sum()])
}

#[test]
fn observation_at_the_reference_has_zero_differences() {
    let exp = demo();
    let frame = exp.script().unwrap().frame_at(1.0);
    let world = exp.template.pose_world(&frame);
    let obs = build_observation(&world, exp.template.object, &frame, &zero_contacts(&exp));
    let hands = layout(&exp);
    assert_eq!(obs.len(), observation_dim(&hands));
    assert_eq!(obs.len(), 71);
    let start = hand_diff_offset(&hands);
    assert!(obs[start..].iter().all(|x| *x == 0.0), "{:?}", &obs[start..]);
}

#[test]
fn object_rotated_past_reference_gives_negative_delta() {
    let exp = demo();
    let frame = exp.script().unwrap().frame_at(0.0);
    let mut world = exp.template.pose_world(&frame);
    let o = exp.template.object;
    world.bodies[o].pose = Pose2::new(frame.object.pos.x, frame.object.pos.y, frame.object.angle + 0.1);
    let obs = build_observation(&world, o, &frame, &zero_contacts(&exp));
    let k = object_diff_offset(&layout(&exp));
    assert!((obs[k + 2] + 0.1).abs() < 1e-12);
    assert_eq!(&obs[k..k + 2], &[0.0, 0.0]);
}

#[test]
fn wrap_around_difference_matches_brute_force() {
    let exp = demo();
    let mut frame = exp.script().unwrap().frame_at(0.0);
    frame.object = Pose2::new(0.0, 0.046, 3.1);
    let mut world = exp.template.pose_world(&frame);
    let o = exp.template.object;
    world.bodies[o].pose = Pose2::new(0.0, 0.046, -3.1);
    let obs = build_observation(&world, o, &frame, &zero_contacts(&exp));
    let d = obs[object_diff_offset(&layout(&exp)) + 2];
    assert!((d - brute_force_wrap(3.1 - -3.1)).abs() < 1e-12);
    assert!((d + (2.0 * PI - 6.2)).abs() < 1e-12);
    assert!(d.abs() < PI);
}

#[test]
fn difference_entries_are_odd_under_swap() {
    let exp = demo();
    let script = exp.script().unwrap();
    let a = script.frame_at(0.7);
    let mut b = script.frame_at(2.9);
    b.hands[0].joints.iter_mut().enumerate().for_each(|(i, q)| *q += 0.05 * i as f64);
    b.object = Pose2::new(0.01, 0.03, 2.5);
    let hands = layout(&exp);
    let o = exp.template.object;
    let c = zero_contacts(&exp);
    let ab = build_observation(&exp.template.pose_world(&a), o, &b, &c);
    let ba = build_observation(&exp.template.pose_world(&b), o, &a, &c);
    let (lo, hi) = (hand_diff_offset(&hands), object_diff_offset(&hands) + 3);
    for i in lo..hi {
        assert!((ab[i] + ba[i]).abs() < 1e-12, "entry {i}: {} vs {}", ab[i], ba[i]);
    }
}

#[test]
fn zero_action_targets_follow_the_reference() {
    let exp = demo();
    let frame = exp.script().unwrap().frame_at(2.0);
    let models: Vec<_> = exp.template.world.hands.iter().map(|h| h.model.clone()).collect();
    let mut filter = ActionFilter::new(0.3, 9);
    for _ in 0..5 {
        let t = apply_action(&[0.0; 9], &frame, &models, &mut filter);
        assert_eq!(t[0].root, frame.hands[0].root);
        assert_eq!(t[0].q, frame.hands[0].joints);
    }
}

#[test]
fn filter_first_step_and_fixpoint() {
    let mut f = ActionFilter::new(0.3, 2);
    let out = f.apply(&[0.05, -1.0]);
    assert!((out[0] - 0.015).abs() < 1e-15);
    let a = [0.05, -1.0];
    for n in 2..40 {
        let out = f.apply(&a);
        for (x, y) in out.iter().zip(&a) {
            assert!((x - y).abs() <= 0.7f64.powi(n) * y.abs() + 1e-15);
        }
    }
}

#[test]
fn actions_are_clamped_then_scaled() {
    let b = ActionBounds::default();
    let out = b.scale(&[2.0, -0.5, 1.0, -3.0, 0.5], &[2]);
    assert_eq!(out, vec![0.05, -0.025, 0.3, -0.3, 0.15]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wrapped_differences_lie_in_half_open_interval(to in -50.0f64..50.0, from in -50.0f64..50.0) {
        let d = angle_diff(to, from);
        prop_assert!(d > -PI && d <= PI);
        prop_assert!((d - brute_force_wrap(brute_force_wrap(to) - brute_force_wrap(from))).abs() < 1e-9);
    }

    #[test]
    fn imperfect_tracking_scores_below_maximum(
        dev in prop::collection::vec(1e-6f64..0.5, 5),
    ) {
        let cfg = RewardConfig::default();
        let d = Deviations { object_pos: dev[0], object_rot: dev[1], link_pos: dev[2], link_rot: dev[3], joints: dev[4] };
        let r = RewardTerms::from_deviations(&d, &cfg);
        prop_assert!(r.total > 0.0 && r.total < 8.2);
        let doubled = Deviations { object_pos: 2.0 * dev[0], object_rot: 2.0 * dev[1], link_pos: 2.0 * dev[2], link_rot: 2.0 * dev[3], joints: 2.0 * dev[4] };
        let r2 = RewardTerms::from_deviations(&doubled, &cfg);
        prop_assert!(r2.od < r.od && r2.or < r.or && r2.hd < r.hd && r2.hr < r.hr && r2.hj < r.hj);
    }

    #[test]
    fn each_term_decreases_in_its_own_deviation(x in 0.0f64..0.5, dx in 1e-4f64..0.5, which in 0usize..5) {
        let cfg = RewardConfig::default();
        let build = |v: f64| {
            let mut d = Deviations::default();
            match which {
                0 => d.object_pos = v,
                1 => d.object_rot = v,
                2 => d.link_pos = v,
                3 => d.link_rot = v,
                _ => d.joints = v,
            }
            RewardTerms::from_deviations(&d, &cfg)
        };
        let (a, b) = (build(x), build(x + dx));
        let pick = |r: &RewardTerms| [r.od, r.or, r.hd, r.hr, r.hj][which];
        prop_assert!(pick(&b) < pick(&a));
        prop_assert!(b.total <= a.total);
    }
}

#[test]
fn zero_actions_complete_a_self_recorded_clip() {
    let exp = demo();
    let mut env = square_env(&exp);
    assert_eq!(env.horizon(), 120);
    env.reset(0);
    let mut steps = 0;
    loop {
        let s = env.step(&vec![0.0; env.action_dim()]);
        steps += 1;
        assert!(!s.terminated, "terminated at step {steps}");
        if s.truncated {
            break;
        }
    }
    assert_eq!(steps, env.horizon());
}

#[test]
fn metre_root_offsets_end_the_episode_early() {
    let exp = demo();
    let mut env = square_env(&exp);
    env.reset(0);
    let mut a = vec![0.0; env.action_dim()];
    a[0] = 1.0;
    let mut len = 0;
    for _ in 0..env.horizon() {
        len += 1;
        if env.step_physical(&a).terminated {
            break;
        }
    }
    assert!(len < 10, "lasted {len} steps");
}

#[test]
fn rollouts_are_reproducible_and_bounded() {
    let exp = demo();
    let mut env = square_env(&exp);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let agent = Agent::new(env.obs_dim(), env.action_dim(), &[16], -0.5, &mut rng);
    let a = rollout(&agent, &mut env, Mode::Stochastic, 11);
    let b = rollout(&agent, &mut env, Mode::Stochastic, 11);
    assert_eq!(a, b);
    let c = rollout(&agent, &mut env, Mode::Stochastic, 12);
    assert_ne!(a.steps[0].action, c.steps[0].action);
    assert!(a.len() <= a.horizon);
    let ret = a.normalized_return(&exp.imitation().reward);
    assert!(ret <= a.len() as f64 && ret > 0.0);
}

#[test]
fn hold_script_keeps_the_object_still() {
    let exp = demo();
    let script = ScriptSpec::load(&asset("hold.script.toml")).unwrap();
    let clip = generate_reference(&script, &exp.template).unwrap();
    assert_eq!(clip.frames().len(), 480);
    let start = clip.frames()[0].object.pos;
    let worst = clip.frames().iter().map(|f| (f.object.pos - start).length()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "object moved {worst} m");
}

#[test]
fn rotate_script_turns_the_square_a_quarter() {
    let exp = demo();
    let clip = exp.generate_clip().unwrap();
    assert_eq!(clip.frames().len(), 480);
    assert_eq!(clip.frame_rate, 120.0);
    let first = clip.frames()[0].object.angle;
    let last = clip.frames().last().unwrap().object.angle;
    let turned = angle_diff(last, first);
    assert!((turned - PI / 2.0).abs() < 5f64.to_radians(), "turned {} deg", turned.to_degrees());
}

#[test]
fn stored_clip_matches_a_fresh_recording() {
    let exp = demo();
    let fresh = exp.generate_clip().unwrap();
    let stored = ReferenceClip::load(&asset("rotate_square_90.clip")).unwrap();
    assert_eq!(fresh, stored);
}

#[test]
fn unreachable_object_path_is_rejected_with_its_time() {
    let exp = demo();
    let mut script = ScriptSpec::load(&asset("rotate_square_90.script.toml")).unwrap();
    for k in &mut script.object {
        if k.t >= 3.5 {
            k.pose = [0.3, 0.0, 0.0];
        }
    }
    match generate_reference(&script, &exp.template) {
        Err(ImitationError::ScriptInfeasible { time, .. }) => assert!(time > 0.5 && time <= 4.0),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn two_hand_scene_doubles_hand_blocks() {
    let cfg = inhand::harness::ExperimentConfig::load(&asset("two_hand.toml")).unwrap();
    let exp = Experiment::new(cfg, String::new()).unwrap();
    let hands = exp.template.hand_layout();
    assert_eq!(hands, vec![(6, 7), (6, 7)]);
    assert_eq!(observation_dim(&hands), 71 + 57);
    for script in ["rotate_two_hand.script.toml", "pass_two_hand.script.toml"] {
        let s = ScriptSpec::load(&asset(script)).unwrap();
        let clip = generate_reference(&s, &exp.template).unwrap();
        assert_eq!(clip.hand_count(), 2);
        let end = clip.frames().last().unwrap().object;
        let want = s.object_at(s.duration);
        assert!((end.pos - want.pos).length() < 0.01, "{script}: {:?}", end);
        assert!(angle_diff(want.angle, end.angle).abs() < 5f64.to_radians());
        let mut env = ImitationEnv::new(Arc::new(exp.template.clone()), Arc::new(clip), exp.imitation()).unwrap();
        assert_eq!(env.reset(0).len(), 128);
        assert_eq!(env.action_dim(), 18);
    }
}

#[test]
fn clip_text_round_trips_exactly() {
    let exp = demo();
    let clip = exp.generate_clip().unwrap();
    let back = ReferenceClip::parse(&clip.to_text()).unwrap();
    assert_eq!(clip, back);
}
