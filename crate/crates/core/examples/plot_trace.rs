//! Runs a short greedy curriculum on the synthetic ladder and draws its
//! per-shape goodness trace as SVG.

use inhand::curriculum::{run_greedy, CurriculumConfig, ShapeLadder, SyntheticLadder};
use inhand::harness::{line_chart, Table};
use inhand::learner::Trainer;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ladder = SyntheticLadder::hard_middle();
    let source = Trainer::for_env(&ladder.env(0), SyntheticLadder::ppo(0), 1).agent;
    let cfg = CurriculumConfig {
        budget: 100,
        ..CurriculumConfig::default()
    };
    let (_, trace) = run_greedy(&ladder, &source, &SyntheticLadder::ppo(cfg.budget), &cfg, 1)?;
    let csv = trace.to_csv();
    print!("{csv}");
    let table = Table::parse_csv(&csv)?;
    let svg = line_chart(&table, &["best".to_string()], "best goodness per shape")?;
    let out = std::env::temp_dir().join("inhand_trace.svg");
    std::fs::write(&out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
