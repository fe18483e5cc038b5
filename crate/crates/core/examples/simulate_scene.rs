//! Loads the pinch scene, seats the square between the fingertips and holds
//! the hand still for two seconds under stable PD.

use std::path::PathBuf;

use inhand::harness::Experiment;
use inhand::imitation::ScriptSpec;
use inhand::physics::{hand_stable_pd, PdTargets};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let assets = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets");
    let exp = Experiment::load(&assets.join("demo.toml"))?;
    let frame = ScriptSpec::load(&assets.join("hold.script.toml"))?.frame_at(0.0);
    let mut world = exp.template.pose_world(&frame);
    let o = exp.template.object;
    let dt = world.substep_dt();
    let hold = PdTargets::hold(&world.hands[0].state);
    let control = 20;
    for step in 0..1200 {
        if step % control == 0 {
            world.reset_sensors();
        }
        let tau = hand_stable_pd(&world.hands[0].model, &world.hands[0].state, &hold, dt);
        world.step(&tau, dt)?;
        if (step + 1) % 300 == 0 {
            let p = world.bodies[o].pose;
            let sensors = world.read_contact_sensors(((step % control) + 1) as f64 * dt);
            println!("t = {:.2} s  object ({:+.4}, {:+.4}, {:+.4})  contacts {}  sensors {:.3?}", (step + 1) as f64 * dt, p.pos.x, p.pos.y, p.angle, world.contacts.len(), sensors.0);
        }
    }
    let drift = (world.bodies[o].pose.pos - frame.object.pos).length();
    println!("object drift after 2 s: {:.3} mm", drift * 1e3);
    Ok(())
}
