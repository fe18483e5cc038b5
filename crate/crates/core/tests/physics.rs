use inhand::physics::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 1.0 / 600.0;

fn boxed(half_w: f64, half_h: f64) -> Shape {
    Shape::Polygon(
        ConvexPolygon::new(vec![
            Vec2::new(-half_w, -half_h),
            Vec2::new(half_w, -half_h),
            Vec2::new(half_w, half_h),
            Vec2::new(-half_w, half_h),
        ])
        .unwrap(),
    )
}

fn ground() -> RigidBody {
    RigidBody::kinematic("ground", Pose2::new(0.0, -0.5, 0.0), vec![boxed(5.0, 0.5)])
}

fn box_body(mass: f64, half: f64, pose: Pose2) -> RigidBody {
    let inertia = mass * (2.0 * half).powi(2) / 6.0;
    RigidBody::dynamic("box", mass, inertia, pose, vec![boxed(half, half)]).unwrap()
}

#[test]
fn free_fall_velocity_is_exact() {
    let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
    w.add_body(RigidBody::dynamic("p", 1.0, 1.0, Pose2::IDENTITY, vec![Shape::Capsule(Capsule::disk(Vec2::ZERO, 0.1))]).unwrap());
    for _ in 0..600 {
        w.step(&[], DT).unwrap();
    }
    assert!((w.bodies[0].linear_velocity.y + 9.81).abs() < 1e-6);
}

#[test]
fn resting_box_penetration_stays_within_slop() {
    let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
    w.add_body(ground());
    w.add_body(box_body(1.0, 0.1, Pose2::new(0.0, 0.1005, 0.0)));
    let slop = w.contact.penetration_slop;
    let mut max_pen: f64 = 0.0;
    for _ in 0..(5 * 600) {
        w.step(&[], DT).unwrap();
        for c in &w.contacts {
            max_pen = max_pen.max(c.penetration);
        }
    }
    assert!(max_pen <= slop + 1e-3, "max penetration {max_pen}");
    let b = &w.bodies[1];
    assert!(b.pose.angle.abs() < 1e-3, "box tipped: {}", b.pose.angle);
    assert!(b.linear_velocity.length() < 1e-3);
}

fn disk(x: f64, vx: f64) -> RigidBody {
    let mut b = RigidBody::dynamic("disk", 1.0, 0.5 * 0.1 * 0.1, Pose2::new(x, 0.0, 0.0), vec![Shape::Capsule(Capsule::disk(Vec2::ZERO, 0.1))]).unwrap();
    b.linear_velocity = Vec2::new(vx, 0.0);
    b
}

#[test]
fn elastic_head_on_collision_conserves_momentum() {
    let mut w = SimWorld::new(Vec2::ZERO);
    w.contact.restitution = 1.0;
    w.add_body(disk(-0.3, 2.0));
    w.add_body(disk(0.3, -1.0));
    let before = w.total_momentum();
    let mut collided = false;
    for _ in 0..600 {
        w.step(&[], DT).unwrap();
        collided |= w.bodies[0].linear_velocity.x < 0.0;
    }
    assert!(collided);
    let after = w.total_momentum();
    let rel = (after - before).length() / before.length();
    assert!(rel < 1e-6, "relative momentum change {rel}");
    // velocities exchanged for equal masses
    assert!((w.bodies[0].linear_velocity.x + 1.0).abs() < 1e-2);
    assert!((w.bodies[1].linear_velocity.x - 2.0).abs() < 1e-2);
}

#[test]
fn stepping_is_deterministic() {
    let build = || {
        let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
        w.add_body(ground());
        w.add_body(box_body(0.5, 0.05, Pose2::new(0.0, 0.3, 0.4)));
        w.bodies[1].angular_velocity = 3.0;
        w
    };
    let mut a = build();
    let mut b = build();
    for _ in 0..900 {
        a.step(&[], DT).unwrap();
        b.step(&[], DT).unwrap();
    }
    let (pa, pb) = (a.bodies[1].pose, b.bodies[1].pose);
    assert_eq!(pa.pos.x.to_bits(), pb.pos.x.to_bits());
    assert_eq!(pa.pos.y.to_bits(), pb.pos.y.to_bits());
    assert_eq!(pa.angle.to_bits(), pb.angle.to_bits());
}

/// Tumbling boxes with random initial states; checks the friction cone and
/// non-negative normal impulses on every contact of every step.
fn random_pile(seed: u64) -> SimWorld {
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
    w
}

#[test]
fn friction_cone_holds_over_many_random_steps() {
    let mut checked = 0usize;
    for seed in 0..10 {
        let mut w = random_pile(seed);
        let mu = w.contact.friction;
        for _ in 0..1000 {
            w.step(&[], DT).unwrap();
            for c in &w.contacts {
                assert!(c.normal_impulse >= 0.0);
                assert!(c.tangent_impulse.abs() <= mu * c.normal_impulse + 1e-9);
                assert!((c.normal.length() - 1.0).abs() < 1e-9);
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn passive_energy_does_not_increase() {
    for seed in 0..4 {
        let mut w = random_pile(100 + seed);
        let mut e = w.mechanical_energy();
        for _ in 0..1500 {
            w.step(&[], DT).unwrap();
            let e2 = w.mechanical_energy();
            assert!(e2 <= e + 1e-3, "energy rose by {}", e2 - e);
            e = e2;
        }
    }
}

fn sensing_hand() -> HandModel {
    let mut h = HandModel::planar_default();
    h.fixed_root = true;
    h
}

#[test]
fn no_contact_means_zero_sensors() {
    let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
    w.add_hand(sensing_hand(), Pose2::IDENTITY).unwrap();
    let n = w.actuation_len();
    w.reset_sensors();
    for _ in 0..20 {
        let tau = hand_stable_pd(&w.hands[0].model, &w.hands[0].state, &PdTargets::hold(&w.hands[0].state), DT);
        w.step(&tau, DT).unwrap();
    }
    assert_eq!(n, 9);
    let s = w.read_contact_sensors(20.0 * DT);
    assert_eq!(s.0.len(), 7);
    assert!(s.0.iter().all(|x| *x == 0.0));
}

#[test]
fn object_resting_on_palm_reads_its_weight() {
    let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
    let mut hand = sensing_hand();
    // spread the fingers out of the way
    hand.fingers[0].base_angle = std::f64::consts::PI;
    hand.fingers[1].base_angle = 0.0;
    hand.fingers[0].base = Vec2::new(-0.2, 0.0);
    hand.fingers[1].base = Vec2::new(0.2, 0.0);
    w.add_hand(hand, Pose2::IDENTITY).unwrap();
    let m = 0.08;
    w.add_body(box_body(m, 0.02, Pose2::new(0.0, 0.012 + 0.02 + 1e-4, 0.0)));
    let hold = PdTargets::hold(&w.hands[0].state);
    let control = 20;
    let mut reading = Vec::new();
    for step in 0..(600 * 2) {
        if step % control == 0 {
            w.reset_sensors();
        }
        let tau = hand_stable_pd(&w.hands[0].model, &w.hands[0].state, &hold, DT);
        w.step(&tau, DT).unwrap();
        if step % control == control - 1 {
            reading = w.read_contact_sensors(control as f64 * DT).0;
        }
    }
    let weight = m * 9.81;
    assert!((reading[0] - weight).abs() <= 0.05 * weight, "palm reads {} vs {weight}", reading[0]);
    assert!(reading[1..].iter().all(|x| *x == 0.0));
}

#[test]
fn two_links_touching_gives_two_entries() {
    // A disk wedged between the two fingertips, no gravity.
    let mut w = SimWorld::new(Vec2::ZERO);
    w.add_hand(sensing_hand(), Pose2::IDENTITY).unwrap();
    let tips = w.hands[0].model.fingertip_links();
    let poses = w.link_poses(0);
    let mid = (poses[tips[0]].pos + poses[tips[1]].pos) * 0.5 + Vec2::new(0.0, 0.015);
    let gap = (poses[tips[1]].pos - poses[tips[0]].pos).length();
    let r = 0.5 * gap - 0.008 + 0.0005;
    w.add_body(RigidBody::dynamic("ball", 0.05, 0.5 * 0.05 * r * r, Pose2::from_parts(mid, 0.0), vec![Shape::Capsule(Capsule::disk(Vec2::ZERO, r))]).unwrap());
    let hold = PdTargets::hold(&w.hands[0].state);
    w.reset_sensors();
    for _ in 0..20 {
        let tau = hand_stable_pd(&w.hands[0].model, &w.hands[0].state, &hold, DT);
        w.step(&tau, DT).unwrap();
    }
    let s = w.read_contact_sensors(20.0 * DT).0;
    let nonzero: Vec<usize> = (0..s.len()).filter(|&i| s[i] > 0.0).collect();
    assert_eq!(nonzero, tips, "{s:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn zero_gravity_collisions_conserve_momentum(
        v1 in -3.0f64..3.0, v2 in -3.0f64..3.0, dy in -0.15f64..0.15, e in 0.0f64..1.0
    ) {
        let mut w = SimWorld::new(Vec2::ZERO);
        w.contact.restitution = e;
        let mut a = disk(-0.3, v1.abs() + 0.5);
        let mut b = disk(0.3, -(v2.abs() + 0.5));
        a.pose.pos.y = dy;
        b.linear_velocity.y = v2 * 0.1;
        a.linear_velocity.y = v1 * 0.1;
        w.add_body(a);
        w.add_body(b);
        let before = w.total_momentum();
        for _ in 0..400 {
            w.step(&[], DT).unwrap();
        }
        let after = w.total_momentum();
        prop_assert!((after - before).length() <= 1e-6 * before.length().max(1e-12));
    }
}
