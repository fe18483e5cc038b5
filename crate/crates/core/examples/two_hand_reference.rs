//! Two-hand scene: records the bar rotation and the hand-over clips and
//! reports observation and action sizes.

use std::path::PathBuf;
use std::sync::Arc;

use inhand::harness::Experiment;
use inhand::imitation::{generate_reference, ImitationEnv, ScriptSpec};
use inhand::learner::Environment;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let assets = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets");
    let exp = Experiment::load(&assets.join("two_hand.toml"))?;
    for script in ["rotate_two_hand.script.toml", "pass_two_hand.script.toml"] {
        let spec = ScriptSpec::load(&assets.join(script))?;
        let clip = generate_reference(&spec, &exp.template)?;
        let end = clip.frames().last().unwrap().object;
        let env = ImitationEnv::new(Arc::new(exp.template.clone()), Arc::new(clip), exp.imitation())?;
        println!(
            "{script}: {} hands, obs {}, action {}, horizon {}, object ends at ({:+.3}, {:+.3}, {:+.1} deg)",
            env.clip().hand_count(),
            env.obs_dim(),
            env.action_dim(),
            env.horizon(),
            end.pos.x,
            end.pos.y,
            end.angle.to_degrees()
        );
    }
    Ok(())
}
