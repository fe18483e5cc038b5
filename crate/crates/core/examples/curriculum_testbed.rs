//! Greedy and naive schedules on the synthetic hard-middle ladder.

use inhand::curriculum::{run_greedy, run_naive, CurriculumConfig, ShapeLadder, SyntheticLadder};
use inhand::learner::Trainer;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ladder = SyntheticLadder::hard_middle();
    let labels: Vec<String> = (0..ladder.len()).map(|j| ladder.label(j)).collect();
    println!("shapes: {labels:?}");
    let cfg = CurriculumConfig {
        budget: 200,
        ..CurriculumConfig::default()
    };
    let ppo = SyntheticLadder::ppo(cfg.budget);
    for seed in 0..3 {
        let mut tr = Trainer::for_env(&ladder.env(0), SyntheticLadder::ppo(10), seed);
        for _ in 0..10 {
            tr.iterate(|_| ladder.env(0))?;
        }
        let (greedy, gt) = run_greedy(&ladder, &tr.agent, &ppo, &cfg, seed)?;
        let (naive, nt) = run_naive(&ladder, &tr.agent, &ppo, &cfg, seed)?;
        let t = ladder.target();
        println!(
            "seed {seed}: greedy target {:.3} (first success {:?}), naive target {:.3} (first success {:?})",
            greedy.scores[t],
            gt.first_success(t),
            naive.scores[t],
            nt.first_success(t)
        );
        let picks: Vec<usize> = gt.records.iter().filter_map(|r| r.selected).collect();
        println!("  greedy picks {picks:?}");
    }
    Ok(())
}
