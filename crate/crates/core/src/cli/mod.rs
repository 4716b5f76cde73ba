//! Command-line entry point: `plan`, `gen-data`, `augment`, `train`, `eval`
//! and `verify`, each driven by a [`RunConfig`] file plus flag overrides.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_augment, cmd_eval, cmd_gen_data, cmd_plan, cmd_train, cmd_verify, Summary};
pub use config::{RunConfig, ShapingConfig, VerifyConfig, SCHEMA_VERSION};

use crate::error::Error;
use crate::learner::Method;
use crate::planner::PlannerMode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "storl", version, about = "Subgoal temporal-order reward shaping for offline RL")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    task: Option<String>,
    #[arg(long, global = true)]
    method: Option<String>,
    /// Replaces the configured seed list; repeatable.
    #[arg(long = "seed", global = true)]
    seeds: Vec<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    schedule: Option<PathBuf>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long, global = true)]
    dataset_size: Option<usize>,
    #[arg(long, global = true)]
    expert_prob: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    eval_every: Option<usize>,
    #[arg(long, global = true)]
    eval_episodes: Option<usize>,
    /// `live` or `fixture`.
    #[arg(long, global = true)]
    planner_mode: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the prompt, obtain a response, parse and validate the schedule.
    Plan,
    /// Generate behaviour-policy datasets, one per seed.
    GenData,
    /// Replace dataset rewards by shaped rewards.
    Augment,
    /// Train the configured method and record its learning curve.
    Train,
    /// Evaluate a checkpoint.
    Eval {
        /// Defaults to the checkpoint written by `train` for each seed.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run the randomized checks of the shaping guarantees.
    Verify {
        #[arg(long)]
        samples: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Plan => "plan",
            Command::GenData => "gen-data",
            Command::Augment => "augment",
            Command::Train => "train",
            Command::Eval { .. } => "eval",
            Command::Verify { .. } => "verify",
        }
    }
}

fn apply_overrides(cfg: &mut RunConfig, c: &Common) -> crate::Result<()> {
    if let Some(t) = &c.task {
        cfg.task = t.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
    }
    if let Some(m) = &c.method {
        cfg.method = m.parse::<Method>()?;
    }
    if !c.seeds.is_empty() {
        cfg.seeds = c.seeds.clone();
    }
    if let Some(d) = &c.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(s) = &c.schedule {
        cfg.schedule = Some(s.clone());
    }
    if let Some(n) = c.iterations {
        cfg.iterations = n;
    }
    if let Some(n) = c.dataset_size {
        cfg.dataset_size = n;
    }
    if let Some(p) = c.expert_prob {
        cfg.expert_prob = Some(p);
    }
    if let Some(g) = c.gamma {
        cfg.shaping.gamma = Some(g);
    }
    if let Some(n) = c.eval_every {
        cfg.eval_every = n;
    }
    if let Some(n) = c.eval_episodes {
        cfg.eval_episodes = n;
    }
    if let Some(m) = &c.planner_mode {
        cfg.planner.mode = match m.as_str() {
            "live" => PlannerMode::Live,
            "fixture" => PlannerMode::Fixture,
            other => return Err(Error::Config(format!("unknown planner mode '{other}'"))),
        };
    }
    Ok(())
}

/// Exit code for an error: configuration problems are 1, everything else 2.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::UnknownTask(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn execute(cli: Cli) -> crate::Result<Summary> {
    let mut cfg = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut cfg, &cli.common)?;
    if let Command::Verify { samples: Some(n) } = &cli.command {
        cfg.verify.samples = *n;
    }
    for w in cfg.validate().map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })? {
        eprintln!("warning: {w}");
    }
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    match cli.command {
        Command::Plan => cmd_plan(&cfg),
        Command::GenData => cmd_gen_data(&cfg),
        Command::Augment => cmd_augment(&cfg),
        Command::Train => cmd_train(&cfg),
        Command::Eval { checkpoint } => cmd_eval(&cfg, checkpoint.as_deref()),
        Command::Verify { .. } => cmd_verify(&cfg),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    match execute(cli) {
        Ok(summary) => {
            println!("{}", summary.to_json());
            if summary.ok {
                EXIT_OK
            } else {
                eprintln!("error: {}", summary.cause.as_deref().unwrap_or("command failed"));
                EXIT_RUNTIME
            }
        }
        Err(e) => {
            println!("{}", Summary::failure(name, &e).to_json());
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}
