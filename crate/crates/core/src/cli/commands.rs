use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::cli::config::RunConfig;
use crate::env::{Env, TaskId};
use crate::error::{Error, Result};
use crate::harness::{
    curve_csv, evaluate_learner, export_value_map, generate_dataset, iterations_to_convergence,
    smooth_curve, train_with_curve, Dataset, EvalReport, EvalSchedule, WaypointExpert,
};
use crate::learner::{value_iteration, Buffer, Learner, Method, Policy};
use crate::planner::{build_prompt, fetch_plan, validate_schedule, SubgoalSchedule};
use crate::shaping::{augment_dataset, run_sweeps, ShapingParams, SweepConfig};

/// Machine-readable record of one command run, printed as one JSON line and
/// written next to the command's outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub command: String,
    pub ok: bool,
    pub cause: Option<String>,
    pub fields: Map<String, Value>,
}

impl Summary {
    fn new(command: &str) -> Summary {
        Summary {
            command: command.to_string(),
            ok: true,
            cause: None,
            fields: Map::new(),
        }
    }

    pub fn failure(command: &str, err: &Error) -> Summary {
        Summary {
            command: command.to_string(),
            ok: false,
            cause: Some(err.to_string()),
            fields: Map::new(),
        }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.to_string(), value);
    }

    pub fn to_json(&self) -> String {
        let mut obj = self.fields.clone();
        obj.insert("command".into(), json!(self.command));
        obj.insert("ok".into(), json!(self.ok));
        if let Some(c) = &self.cause {
            obj.insert("cause".into(), json!(c));
        }
        Value::Object(obj).to_string()
    }

    fn write(&self, cfg: &RunConfig) -> Result<()> {
        write_file(&cfg.summary_path(&self.command), &(self.to_json() + "\n"))
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Missing pipeline inputs are configuration problems, not runtime faults.
fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} not found at {}", path.display())))
    }
}

fn load_schedule(cfg: &RunConfig) -> Result<SubgoalSchedule> {
    let path = cfg.schedule_path();
    require(&path, "subgoal schedule")?;
    let schedule = SubgoalSchedule::load(&path)?;
    if schedule.task != cfg.task {
        return Err(Error::Config(format!(
            "schedule is for {}, config task is {}",
            schedule.task.as_str(),
            cfg.task.as_str()
        )));
    }
    Ok(schedule)
}

fn load_dataset(path: &Path, what: &str, task: TaskId) -> Result<Dataset> {
    require(path, what)?;
    let d = Dataset::load(path)?;
    if d.task != task {
        return Err(Error::Config(format!("{} holds a {} dataset", path.display(), d.task.as_str())));
    }
    Ok(d)
}

fn expert_for(env: &Env) -> Box<dyn Policy> {
    match env {
        Env::Grid(g) => Box::new(value_iteration(g, g.gamma, 1e-10)),
        Env::Maze(m) => Box::new(WaypointExpert::new(m)),
    }
}

fn report_json(r: &EvalReport) -> Value {
    let finite = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
    json!({
        "episodes": r.episodes,
        "successes": r.successes,
        "success_rate": r.success_rate,
        "mean_steps": r.mean_steps,
        "std_steps": r.std_steps,
        "mean_success_steps": finite(r.mean_success_steps),
        "std_success_steps": finite(r.std_success_steps),
    })
}

pub fn cmd_plan(cfg: &RunConfig) -> Result<Summary> {
    let request = build_prompt(cfg.task, None)?;
    write_file(&cfg.prompt_path(), &request.text())?;
    let response = fetch_plan(&request, &cfg.planner)?;
    write_file(&cfg.response_path(), &response.raw)?;
    let parsed = response.parse(&request)?;
    let report = validate_schedule(&parsed, cfg.env().layout());
    let mut s = Summary::new("plan");
    s.set("task", json!(cfg.task.as_str()));
    s.set("k", json!(parsed.k()));
    s.set("uncovered", json!(report.uncovered.len()));
    s.set("duplicates", json!(report.duplicates.len()));
    s.set("invalid_cells", json!(report.invalid_cells.len()));
    s.set("start_index", json!(report.start_index));
    s.set("goal_index", json!(report.goal_index));
    match &report.schedule {
        Some(schedule) if report.accepted() => {
            let path = cfg.schedule_path();
            schedule.save(&path)?;
            s.set("schedule", json!(file_name(&path)));
            s.set("schedule_digest", json!(schedule.digest()));
        }
        _ => {
            s.ok = false;
            s.cause = Some(format!("schedule rejected: {}", report.summary()));
        }
    }
    s.write(cfg)?;
    Ok(s)
}

pub fn cmd_gen_data(cfg: &RunConfig) -> Result<Summary> {
    let env = cfg.env();
    let expert = expert_for(&env);
    let mut s = Summary::new("gen-data");
    s.set("task", json!(cfg.task.as_str()));
    s.set("expert_prob", json!(cfg.expert_prob()));
    let mut per_seed = Vec::new();
    for &seed in &cfg.seeds {
        let d = generate_dataset(
            cfg.task,
            &env,
            expert.as_ref(),
            cfg.expert_prob(),
            cfg.dataset_size,
            seed,
            cfg.digest(),
        )?;
        let path = cfg.dataset_path(seed);
        d.save(&path)?;
        let st = d.stats(env.horizon());
        per_seed.push(json!({
            "seed": seed,
            "path": file_name(&path),
            "trajectories": st.trajectories,
            "transitions": st.transitions,
            "success_rate": st.success_rate,
            "mean_length": st.mean_length,
            "std_length": st.std_length,
            "digest": d.digest(),
        }));
    }
    s.set("datasets", Value::Array(per_seed));
    s.write(cfg)?;
    Ok(s)
}

pub fn cmd_augment(cfg: &RunConfig) -> Result<Summary> {
    let schedule = load_schedule(cfg)?;
    let params = cfg.shaping_params()?;
    let mut s = Summary::new("augment");
    s.set("task", json!(cfg.task.as_str()));
    s.set("gamma", json!(params.gamma));
    s.set("horizon", json!(params.horizon));
    s.set("boundary_warning", json!(params.boundary_warning()));
    s.set("schedule_digest", json!(schedule.digest()));
    let mut per_seed = Vec::new();
    for &seed in &cfg.seeds {
        let d = load_dataset(&cfg.dataset_path(seed), "dataset", cfg.task)?;
        let shaped = augment_dataset(&d, &schedule, &params)?.to_dataset();
        let path = cfg.shaped_path(seed);
        shaped.save(&path)?;
        per_seed.push(json!({
            "seed": seed,
            "path": file_name(&path),
            "transitions": shaped.transition_count(),
            "source_digest": d.digest(),
            "digest": shaped.digest(),
        }));
    }
    s.set("datasets", Value::Array(per_seed));
    s.write(cfg)?;
    Ok(s)
}

/// Training buffer for `method`: shaped rewards for STO-RL, base rewards
/// for IQL, base data plus progress indices for GC-BC.
pub fn training_buffer(cfg: &RunConfig, seed: u64, schedule: Option<&SubgoalSchedule>) -> Result<Buffer> {
    match cfg.method {
        Method::Storl => {
            let d = load_dataset(&cfg.shaped_path(seed), "shaped dataset (run augment first)", cfg.task)?;
            if d.shaping.is_none() {
                return Err(Error::Config(format!("{} carries no shaping header", cfg.shaped_path(seed).display())));
            }
            Buffer::from_dataset(&d)
        }
        Method::Iql => Buffer::from_dataset(&load_dataset(&cfg.dataset_path(seed), "dataset", cfg.task)?),
        Method::Gcbc => {
            let d = load_dataset(&cfg.dataset_path(seed), "dataset", cfg.task)?;
            let sched = schedule.ok_or_else(|| Error::Config("gcbc requires a schedule".into()))?;
            Buffer::with_schedule(&d, sched)
        }
    }
}

pub fn cmd_train(cfg: &RunConfig) -> Result<Summary> {
    let env = cfg.env();
    let schedule = match cfg.method {
        Method::Iql => None,
        _ => Some(load_schedule(cfg)?),
    };
    let mut s = Summary::new("train");
    s.set("task", json!(cfg.task.as_str()));
    s.set("method", json!(cfg.method.as_str()));
    s.set("iterations", json!(cfg.iterations));
    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        let buffer = training_buffer(cfg, seed, schedule.as_ref())?;
        let mut learner = Learner::new(cfg.method, &env, cfg.gamma(), cfg.learner, seed, schedule.as_ref())?;
        let eval = EvalSchedule {
            every: cfg.eval_every,
            episodes: cfg.eval_episodes,
            seed: cfg.eval_seed,
        };
        let out = train_with_curve(&mut learner, &buffer, &env, cfg.iterations, eval)?;
        let smoothed = smooth_curve(&out.curve, cfg.smoothing_window)?;
        learner.save(cfg.task, &cfg.checkpoint_path(seed))?;
        write_file(&cfg.curve_path(seed), &curve_csv(&out.curve, &smoothed))?;
        if let (Env::Grid(spec), Learner::Iql(l)) = (&env, &learner) {
            write_file(&cfg.value_map_path(seed), &export_value_map(l, spec)?.to_text())?;
        }
        runs.push(json!({
            "seed": seed,
            "checkpoint": file_name(&cfg.checkpoint_path(seed)),
            "final_loss": out.final_loss,
            "converged_at": iterations_to_convergence(&smoothed, 0.99),
            "report": report_json(&out.report),
        }));
    }
    s.set("runs", Value::Array(runs));
    s.write(cfg)?;
    Ok(s)
}

pub fn cmd_eval(cfg: &RunConfig, checkpoint: Option<&Path>) -> Result<Summary> {
    let mut s = Summary::new("eval");
    s.set("task", json!(cfg.task.as_str()));
    let mut reports = Vec::new();
    let targets: Vec<(u64, std::path::PathBuf)> = match checkpoint {
        Some(p) => vec![(cfg.seeds[0], p.to_path_buf())],
        None => cfg.seeds.iter().map(|&sd| (sd, cfg.checkpoint_path(sd))).collect(),
    };
    for (seed, path) in targets {
        require(&path, "checkpoint")?;
        let (task, learner) = Learner::load(&path)?;
        let env = Env::for_task(task);
        let r = evaluate_learner(&learner, &env, cfg.eval_episodes, cfg.eval_seed)?;
        let out = if checkpoint.is_some() {
            path.with_extension("eval.csv")
        } else {
            cfg.eval_path(seed)
        };
        write_file(&out, &format!("{}\n{}\n", EvalReport::csv_header(), r.csv_row()))?;
        reports.push(json!({
            "seed": seed,
            "checkpoint": file_name(&path),
            "method": learner.method().as_str(),
            "report": report_json(&r),
        }));
    }
    s.set("evaluations", Value::Array(reports));
    s.write(cfg)?;
    Ok(s)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Summary> {
    let v = &cfg.verify;
    let params = ShapingParams::new(v.gamma, v.horizon).map_err(|e| Error::Config(e.to_string()))?;
    let sweep = SweepConfig {
        samples: v.samples,
        pairs: v.pairs,
        trajectories: v.trajectories,
        seed: cfg.seeds[0],
    };
    let results = run_sweeps(&params, &sweep)?;
    let mut csv = String::from("check,cases,failures,max_error,passed\n");
    let mut s = Summary::new("verify");
    s.set("gamma", json!(params.gamma));
    s.set("horizon", json!(params.horizon));
    s.set("boundary_warning", json!(params.boundary_warning()));
    let mut checks = Map::new();
    for r in &results {
        let _ = writeln!(csv, "{},{},{},{:e},{}", r.name, r.cases, r.failures, r.max_error, r.passed());
        eprintln!("{:<12} {} ({} cases, {} failures)", r.name, if r.passed() { "PASS" } else { "FAIL" }, r.cases, r.failures);
        checks.insert(r.name.clone(), json!(r.passed()));
    }
    write_file(&cfg.verify_path(), &csv)?;
    s.set("checks", Value::Object(checks));
    if results.iter().any(|r| !r.passed()) {
        s.ok = false;
        s.cause = Some("one or more shaping checks failed".into());
    }
    s.write(cfg)?;
    Ok(s)
}
