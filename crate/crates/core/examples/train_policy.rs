//! Short PPO run on the square clip, then a stochastic evaluation.
//!
//! `cargo run --release --example train_policy -- 20` sets the iteration count.

use std::path::PathBuf;

use inhand::curriculum::ShapeLadder;
use inhand::harness::{evaluate, Experiment};
use inhand::learner::{Mode, Trainer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let iterations: usize = std::env::args().nth(1).map_or(Ok(10), |s| s.parse())?;
    let assets = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets");
    let exp = Experiment::load(&assets.join("demo.toml"))?;
    let ladder = exp.ladder(exp.clip()?)?;
    let mut ppo = exp.cfg.ppo.ppo();
    ppo.iterations = iterations;
    let mut trainer = Trainer::for_env(&ladder.env(0), ppo, 0);
    println!("iteration,samples,episodes,mean_return,mean_length");
    for _ in 0..iterations {
        let s = trainer.iterate(|_| ladder.env(0))?;
        println!("{},{},{},{:.3},{:.1}", s.iteration, s.samples, s.episodes, s.mean_return, s.mean_length);
    }
    let report = evaluate(&trainer.agent, &mut ladder.env(0), 50, Mode::Stochastic, 1);
    println!("success {:.1}% over {} rollouts, mean return {:.2}", report.success_percent(), report.rollouts(), report.mean_return());
    Ok(())
}
