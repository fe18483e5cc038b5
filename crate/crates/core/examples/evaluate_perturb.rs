//! Robustness sweep for a policy on the square: fingertip pushes of growing
//! magnitude, then heavier and slipperier objects.

use std::path::PathBuf;
use std::sync::Arc;

use inhand::curriculum::ShapeLadder;
use inhand::harness::{dynamics_variation_eval, evaluate, perturb_eval, Experiment};
use inhand::imitation::Perturbation;
use inhand::learner::{Mode, Trainer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let assets = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets");
    let exp = Experiment::load(&assets.join("demo.toml"))?;
    let ladder = exp.ladder(exp.clip()?)?;
    let agent = Trainer::for_env(&ladder.env(0), exp.cfg.ppo.ppo(), 0).agent;
    let n = 40;
    let plain = evaluate(&agent, &mut ladder.env(0), n, Mode::Stochastic, 0);
    println!("unperturbed: {:.1}%", plain.success_percent());
    for magnitude in [0.5, 2.0, 8.0, 32.0] {
        let p = Perturbation { magnitude, duration: 0.25 };
        let r = perturb_eval(&agent, Arc::clone(&ladder.templates[0]), ladder.clip.clone(), exp.imitation(), p, n, Mode::Stochastic, 0)?;
        let curve = r.completion_curve();
        println!("push {magnitude:4} N: {:.1}% complete, {:.1}% still tracking at the midpoint", r.success_percent(), curve[curve.len() / 2]);
    }
    for (shape, mass, friction) in [(0, 3.0, 1.0), (0, 1.0, 0.01), (3, 1.0, 1.0), (3, 1.0, 0.01)] {
        let r = dynamics_variation_eval(&agent, &ladder.templates[shape], ladder.clip.clone(), exp.imitation(), mass, friction, n, Mode::Stochastic, 0)?;
        println!("shape {shape}, mass x{mass}, friction x{friction}: {:.1}%", r.success_percent());
    }
    Ok(())
}
