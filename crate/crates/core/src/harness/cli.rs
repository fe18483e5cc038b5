//! Command-line driver. Exit codes: 0 success, 1 configuration error,
//! 2 run failure.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use super::{dynamics_variation_eval, evaluate, line_chart, perturb_eval, EvaluationReport, Experiment, HarnessError, RunManifest, Table};
use crate::curriculum::{completes, run_baseline, run_greedy, run_naive, BaselineKind, CurriculumTrace, ShapeLadder};
use crate::imitation::{ImitationEnv, Perturbation};
use crate::learner::{Agent, IterationStats, Mode, Trainer};

const CSV_HELP: &str = "\
CSV outputs:
  train.csv               iteration,samples,episodes,mean_return,mean_length,approx_kl,
                          policy_loss,value_loss,entropy,clip_fraction,epochs
  trace.csv               iteration,trained_shape,selected_shape,score_<j>..,best_<j>..,success_<j>..
                          (shape columns are -1 when no shape applies)
  <name>_summary.csv      rollouts,successes,success_percent,mean_return,horizon
  <name>_completion.csv   frame,completion_percent";

#[derive(Parser, Debug)]
#[command(name = "inhand", version, about = "Planar in-hand manipulation by imitation, with shape curricula", after_help = CSV_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Experiment config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: the config's `out`, per command and seed).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed (default: the first configured seed).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    /// Policy checkpoint.
    #[arg(long)]
    pub policy: PathBuf,
    /// Shape index in the morph family (0 = source).
    #[arg(long, default_value_t = 0)]
    pub shape: usize,
    /// Number of rollouts (default: the config's eval.rollouts).
    #[arg(long)]
    pub rollouts: Option<usize>,
    #[arg(long, default_value = "stochastic")]
    pub mode: Mode,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Play the motion script through the simulator and write a clip file.
    GenRef {
        #[command(flatten)]
        common: Common,
    },
    /// Train a policy on one shape.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        shape: usize,
        /// Start from this checkpoint instead of a fresh policy.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Override ppo.iterations.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Run the greedy or naive shape curriculum.
    Curriculum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "greedy", value_parser = ["greedy", "naive"])]
        mode: String,
        /// Source policy (default: a fresh policy).
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Train one of the joint-training baselines.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: BaselineKind,
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Evaluate a policy over a rollout population.
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Evaluate under fingertip pushes or altered object dynamics.
    Perturb {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        eval: EvalArgs,
        /// N, applied to every fingertip (default: eval.perturb_force).
        #[arg(long)]
        force: Option<f64>,
        /// s (default: eval.perturb_duration).
        #[arg(long)]
        duration: Option<f64>,
        /// Scale object mass and inertia instead of pushing.
        #[arg(long)]
        mass_scale: Option<f64>,
        /// Scale object friction instead of pushing.
        #[arg(long)]
        friction_scale: Option<f64>,
    },
    /// Render CSV columns as an SVG line chart.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Column-name prefixes to draw (default: all columns).
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        #[arg(long)]
        title: Option<String>,
    },
}

struct Context {
    exp: Experiment,
    seed: u64,
    out: PathBuf,
    manifest: RunManifest,
}

impl Context {
    fn new(common: &Common, command: &str) -> Result<Self, HarnessError> {
        let exp = Experiment::load(&common.config)?;
        let seed = common.seed.unwrap_or(exp.cfg.experiment.seeds[0]);
        let out = common
            .out
            .clone()
            .unwrap_or_else(|| exp.cfg.resolve(&exp.cfg.experiment.out).join(format!("{command}_seed{seed}")));
        std::fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
        let mut manifest = RunManifest::new(command, &exp.config_text, Some(seed));
        for p in exp.inputs() {
            manifest.add_input(&p)?;
        }
        manifest.add_content("morph:source", exp.family.source.to_text().as_bytes());
        manifest.add_content("morph:target", exp.family.target.to_text().as_bytes());
        Ok(Self { exp, seed, out, manifest })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<PathBuf, HarnessError> {
        let p = self.out.join(name);
        std::fs::write(&p, body).map_err(|e| HarnessError::io(&p, e))?;
        self.manifest.outputs.push(p.clone());
        Ok(p)
    }

    fn save_agent(&mut self, name: &str, agent: &Agent) -> Result<(), HarnessError> {
        let p = self.out.join(name);
        agent.save(&p)?;
        self.manifest.outputs.push(p);
        Ok(())
    }

    fn load_agent(&mut self, path: &Path) -> Result<Agent, HarnessError> {
        self.manifest.add_input(path)?;
        Ok(Agent::load(path)?)
    }

    fn finish(self) -> Result<(), HarnessError> {
        self.manifest.save(&self.out.join("manifest.txt"))
    }
}

fn shape_check(ladder_len: usize, shape: usize) -> Result<(), HarnessError> {
    if shape >= ladder_len {
        return Err(HarnessError::Config(format!("shape {shape} out of range (family has {ladder_len})")));
    }
    Ok(())
}

fn fresh_agent(ctx: &Context, env: &ImitationEnv) -> Agent {
    Trainer::for_env(env, ctx.exp.cfg.ppo.ppo(), ctx.seed).agent
}

fn save_report(ctx: &mut Context, name: &str, report: &EvaluationReport) -> Result<(), HarnessError> {
    ctx.write(&format!("{name}_summary.csv"), &report.summary_csv())?;
    ctx.write(&format!("{name}_completion.csv"), &report.completion_csv())?;
    println!("{name}: {}/{} complete ({:.1}%), mean return {:.3}", report.successes(), report.rollouts(), report.success_percent(), report.mean_return());
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::GenRef { common } => {
            let mut ctx = Context::new(&common, "gen-ref")?;
            let clip = ctx.exp.generate_clip()?;
            let path = match (&common.out, &ctx.exp.cfg.experiment.clip) {
                (None, Some(p)) => ctx.exp.cfg.resolve(p),
                _ => ctx.out.join("clip.txt"),
            };
            clip.save(&path)?;
            ctx.manifest.outputs.push(path.clone());
            println!("wrote {} ({} frames at {} Hz)", path.display(), clip.frames().len(), clip.frame_rate);
            ctx.finish()
        }
        Command::Train { common, shape, init, iterations } => {
            let mut ctx = Context::new(&common, "train")?;
            let ladder = ctx.exp.ladder(ctx.exp.clip()?)?;
            shape_check(ladder.len(), shape)?;
            let mut ppo = ctx.exp.cfg.ppo.ppo();
            if let Some(n) = iterations {
                ppo.iterations = n;
            }
            let agent = match &init {
                Some(p) => ctx.load_agent(p)?,
                None => fresh_agent(&ctx, &ladder.env(shape)),
            };
            let mut trainer = Trainer::new(agent, ppo.clone(), ctx.seed);
            let mut csv = format!("{}\n", IterationStats::CSV_HEADER);
            for _ in 0..ppo.iterations {
                let stats = trainer.iterate(|_| ladder.env(shape))?;
                csv.push_str(&stats.csv_row());
                csv.push('\n');
            }
            ctx.write("train.csv", &csv)?;
            ctx.save_agent("policy.ckpt", &trainer.agent)?;
            let done = completes(&trainer.agent, &ladder, shape, ctx.seed);
            println!("trained {} iterations on {}; deterministic rollout {}", ppo.iterations, ladder.label(shape), if done { "completes" } else { "terminates early" });
            ctx.finish()
        }
        Command::Curriculum { common, mode, source } => {
            let mut ctx = Context::new(&common, &format!("curriculum-{mode}"))?;
            let ladder = ctx.exp.ladder(ctx.exp.clip()?)?;
            let agent = match &source {
                Some(p) => ctx.load_agent(p)?,
                None => fresh_agent(&ctx, &ladder.env(0)),
            };
            let ppo = ctx.exp.cfg.ppo.ppo();
            let cc = ctx.exp.cfg.curriculum.clone();
            let (reg, trace) = if mode == "naive" {
                run_naive(&ladder, &agent, &ppo, &cc, ctx.seed)?
            } else {
                run_greedy(&ladder, &agent, &ppo, &cc, ctx.seed)?
            };
            ctx.write("trace.csv", &trace.to_csv())?;
            let reg_dir = ctx.out.join("registry");
            reg.save(&reg_dir)?;
            ctx.manifest.outputs.push(reg_dir);
            report_trace(&trace, &ladder);
            ctx.finish()
        }
        Command::Baseline { common, kind, source } => {
            let mut ctx = Context::new(&common, "baseline")?;
            let ladder = ctx.exp.ladder(ctx.exp.clip()?)?;
            let agent = match &source {
                Some(p) => ctx.load_agent(p)?,
                None => fresh_agent(&ctx, &ladder.env(0)),
            };
            let out = run_baseline(kind, &ladder, &agent, &ctx.exp.cfg.ppo.ppo(), &ctx.exp.cfg.curriculum, ctx.seed)?;
            ctx.save_agent("policy.ckpt", &out.agent)?;
            ctx.write("baseline.csv", &format!("kind,iterations,success\n{kind:?},{},{}\n", out.iterations, u8::from(out.success)))?;
            println!("baseline {kind:?}: target {}", if out.success { "completed" } else { "not completed" });
            ctx.finish()
        }
        Command::Eval { common, eval } => {
            let mut ctx = Context::new(&common, "eval")?;
            let ladder = ctx.exp.ladder(ctx.exp.clip()?)?;
            shape_check(ladder.len(), eval.shape)?;
            let agent = ctx.load_agent(&eval.policy)?;
            let n = eval.rollouts.unwrap_or(ctx.exp.cfg.eval.rollouts);
            let report = evaluate(&agent, &mut ladder.env(eval.shape), n, eval.mode, ctx.seed);
            save_report(&mut ctx, "eval", &report)?;
            ctx.finish()
        }
        Command::Perturb {
            common,
            eval,
            force,
            duration,
            mass_scale,
            friction_scale,
        } => {
            let mut ctx = Context::new(&common, "perturb")?;
            let ladder = ctx.exp.ladder(ctx.exp.clip()?)?;
            shape_check(ladder.len(), eval.shape)?;
            let agent = ctx.load_agent(&eval.policy)?;
            let e = ctx.exp.cfg.eval;
            let n = eval.rollouts.unwrap_or(e.rollouts);
            let template = ladder.templates[eval.shape].clone();
            let cfg = ctx.exp.imitation();
            let report = if mass_scale.is_some() || friction_scale.is_some() {
                dynamics_variation_eval(&agent, &template, ladder.clip.clone(), cfg, mass_scale.unwrap_or(e.mass_scale), friction_scale.unwrap_or(e.friction_scale), n, eval.mode, ctx.seed)?
            } else {
                let p = Perturbation {
                    magnitude: force.unwrap_or(e.perturb_force),
                    duration: duration.unwrap_or(e.perturb_duration),
                };
                perturb_eval(&agent, Arc::clone(&template), ladder.clip.clone(), cfg, p, n, eval.mode, ctx.seed)?
            };
            save_report(&mut ctx, "perturb", &report)?;
            ctx.finish()
        }
        Command::Plot { input, out, columns, title } => {
            let text = std::fs::read_to_string(&input).map_err(|e| HarnessError::io(&input, e))?;
            let table = Table::parse_csv(&text).map_err(|e| match e {
                HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", input.display())),
                other => other,
            })?;
            let title = title.unwrap_or_else(|| input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
            let svg = line_chart(&table, &columns, &title)?;
            std::fs::write(&out, svg).map_err(|e| HarnessError::io(&out, e))?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn report_trace<L: ShapeLadder>(trace: &CurriculumTrace, ladder: &L) {
    let Some(last) = trace.records.last() else { return };
    for j in 0..ladder.len() {
        let first = trace.first_success(j).map_or("never".to_string(), |i| format!("iteration {i}"));
        println!("{:>10}  best {:.3}  successful: {first}", ladder.label(j), last.best[j]);
    }
}

/// Parses arguments, runs, prints errors and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
