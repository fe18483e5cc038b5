//! Records the square rotation clip from its keyframe script and compares
//! it with the stored copy.

use std::path::PathBuf;

use inhand::harness::Experiment;
use inhand::imitation::ReferenceClip;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let assets = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets");
    let exp = Experiment::load(&assets.join("demo.toml"))?;
    let clip = exp.generate_clip()?;
    let frames = clip.frames();
    println!("{} frames at {} Hz ({} s), {} control steps at 30 Hz", frames.len(), clip.frame_rate, clip.duration(), clip.steps(30.0));
    for i in (0..frames.len()).step_by(120).chain([frames.len() - 1]) {
        let o = frames[i].object;
        println!("frame {i:3}: object ({:+.4}, {:+.4}) angle {:+.1} deg", o.pos.x, o.pos.y, o.angle.to_degrees());
    }
    let stored = ReferenceClip::load(&assets.join("rotate_square_90.clip"))?;
    println!("matches stored clip: {}", stored == clip);
    Ok(())
}
