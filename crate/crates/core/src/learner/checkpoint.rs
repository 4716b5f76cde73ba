use std::fmt::Write as _;
use std::path::Path;

use rand::RngCore;

use crate::env::{Action, Env, State, TaskId};
use crate::error::{Error, Result};
use crate::learner::buffer::Buffer;
use crate::learner::encode::Encoder;
use crate::learner::gcbc::GcbcLearner;
use crate::learner::iql::{IqlHyper, IqlLearner, Method};
use crate::learner::net::{Activation, Adam, Mlp};
use crate::learner::policy::ActMode;
use crate::learner::Policy;
use crate::planner::SubgoalSchedule;

const MAGIC: &str = "# storl checkpoint v1";

/// A trained (or freshly initialised) learner of any method.
#[derive(Clone, Debug, PartialEq)]
pub enum Learner {
    Iql(IqlLearner),
    Gcbc(GcbcLearner),
}

impl Learner {
    /// Builds an untrained learner. `schedule` is required for GC-BC.
    pub fn new(
        method: Method,
        env: &Env,
        gamma: f64,
        hyper: IqlHyper,
        seed: u64,
        schedule: Option<&SubgoalSchedule>,
    ) -> Result<Learner> {
        let enc = Encoder::for_env(env);
        match method {
            Method::Gcbc => {
                let s = schedule.ok_or_else(|| Error::Config("gcbc requires a subgoal schedule".into()))?;
                Ok(Learner::Gcbc(GcbcLearner::new(enc, s.clone(), hyper, seed)?))
            }
            m => Ok(Learner::Iql(IqlLearner::new(m, enc, gamma, hyper, seed)?)),
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Learner::Iql(l) => l.method,
            Learner::Gcbc(_) => Method::Gcbc,
        }
    }

    pub fn step(&self) -> u64 {
        match self {
            Learner::Iql(l) => l.step,
            Learner::Gcbc(l) => l.step,
        }
    }

    pub fn hyper(&self) -> &IqlHyper {
        match self {
            Learner::Iql(l) => &l.hyper,
            Learner::Gcbc(l) => &l.hyper,
        }
    }

    /// One training iteration; returns the policy loss.
    pub fn train_step(&mut self, buffer: &Buffer) -> Result<f64> {
        match self {
            Learner::Iql(l) => Ok(l.train_step(buffer)?.policy),
            Learner::Gcbc(l) => l.train_step(buffer),
        }
    }

    pub fn act_with(
        &self,
        state: &State,
        goal: Option<[f64; 2]>,
        mode: ActMode,
        rng: &mut dyn RngCore,
    ) -> Result<Action> {
        match self {
            Learner::Iql(l) => l.act_with(state, goal, mode, rng),
            Learner::Gcbc(l) => l.act_with(state, goal, mode, rng),
        }
    }

    fn nets(&self) -> Vec<(&'static str, &Mlp)> {
        match self {
            Learner::Iql(l) => vec![
                ("value", &l.value),
                ("q1", &l.q1),
                ("q2", &l.q2),
                ("q1_target", &l.q1_target),
                ("q2_target", &l.q2_target),
                ("policy", &l.policy),
            ],
            Learner::Gcbc(l) => vec![("policy", &l.policy)],
        }
    }

    /// Text checkpoint: header, hyperparameters, optional schedule, then
    /// every network's flat parameters. Adam moments are not stored.
    pub fn to_text(&self, task: TaskId) -> String {
        let mut out = String::new();
        let h = self.hyper();
        let (seed, gamma) = match self {
            Learner::Iql(l) => (l.seed, l.gamma),
            Learner::Gcbc(l) => (l.seed, 0.0),
        };
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "task {}", task.as_str());
        let _ = writeln!(out, "method {}", self.method());
        let _ = writeln!(out, "seed {seed}");
        let _ = writeln!(out, "step {}", self.step());
        let _ = writeln!(out, "gamma {gamma:?}");
        let _ = writeln!(
            out,
            "hyper {:?} {:?} {:?} {} {:?} {} {:?} {} {:?}",
            h.expectile, h.beta, h.lr, h.batch_size, h.target_rate, h.steps, h.weight_clip, h.hidden, h.policy_std
        );
        if let Learner::Gcbc(l) = self {
            let text = l.schedule.to_text();
            let _ = writeln!(out, "schedule {}", text.lines().count());
            out.push_str(&text);
            if !text.ends_with('\n') {
                out.push('\n');
            }
        }
        for (name, net) in self.nets() {
            let sizes: Vec<String> = net.sizes().iter().map(|s| s.to_string()).collect();
            let act = match net.activation() {
                Activation::Relu => "relu",
                Activation::Tanh => "tanh",
            };
            let _ = writeln!(out, "net {name} {} {act}", sizes.join(","));
            for chunk in net.params.chunks(8) {
                let line: Vec<String> = chunk.iter().map(|p| format!("{p:?}")).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<(TaskId, Learner)> {
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(Error::format("missing checkpoint header"));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::format(format!("missing '{key}'")))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::format(format!("expected '{key}', found '{line}'")))
        };
        let task: TaskId = field("task")?.parse()?;
        let method: Method = field("method")?.parse()?;
        let seed: u64 = num(&field("seed")?)?;
        let step: u64 = num(&field("step")?)?;
        let gamma: f64 = num(&field("gamma")?)?;
        let hv: Vec<String> = field("hyper")?.split_whitespace().map(str::to_string).collect();
        if hv.len() != 9 {
            return Err(Error::format("hyper line needs 9 values"));
        }
        let hyper = IqlHyper {
            expectile: num(&hv[0])?,
            beta: num(&hv[1])?,
            lr: num(&hv[2])?,
            batch_size: num(&hv[3])?,
            target_rate: num(&hv[4])?,
            steps: num(&hv[5])?,
            weight_clip: num(&hv[6])?,
            hidden: num(&hv[7])?,
            policy_std: num(&hv[8])?,
        };
        let schedule = if method == Method::Gcbc {
            let n: usize = num(&field("schedule")?)?;
            let body: Vec<&str> = (0..n).map_while(|_| lines.next()).collect();
            if body.len() != n {
                return Err(Error::format("truncated schedule block"));
            }
            Some(SubgoalSchedule::from_text(&(body.join("\n") + "\n"))?)
        } else {
            None
        };
        let env = Env::for_task(task);
        let mut learner = Learner::new(method, &env, gamma, hyper, seed, schedule.as_ref())?;
        let names: Vec<&'static str> = learner.nets().iter().map(|(n, _)| *n).collect();
        for name in names {
            let header = lines.next().ok_or_else(|| Error::format(format!("missing net '{name}'")))?;
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "net" || parts[1] != name {
                return Err(Error::format(format!("expected net '{name}', found '{header}'")));
            }
            let sizes = parts[2].split(',').map(num).collect::<Result<Vec<usize>>>()?;
            let act = match parts[3] {
                "relu" => Activation::Relu,
                "tanh" => Activation::Tanh,
                other => return Err(Error::format(format!("unknown activation '{other}'"))),
            };
            let count: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
            let mut params = Vec::with_capacity(count);
            while params.len() < count {
                let line = lines.next().ok_or_else(|| Error::format(format!("truncated net '{name}'")))?;
                for tok in line.split_whitespace() {
                    params.push(num::<f64>(tok)?);
                }
            }
            let net = Mlp::from_params(&sizes, act, params)?;
            *learner.net_mut(name)? = net;
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::format("trailing data after checkpoint"));
        }
        match &mut learner {
            Learner::Iql(l) => l.step = step,
            Learner::Gcbc(l) => l.step = step,
        }
        Ok((task, learner))
    }

    fn net_mut(&mut self, name: &str) -> Result<&mut Mlp> {
        let net = match (self, name) {
            (Learner::Iql(l), "value") => &mut l.value,
            (Learner::Iql(l), "q1") => &mut l.q1,
            (Learner::Iql(l), "q2") => &mut l.q2,
            (Learner::Iql(l), "q1_target") => &mut l.q1_target,
            (Learner::Iql(l), "q2_target") => &mut l.q2_target,
            (Learner::Iql(l), "policy") => &mut l.policy,
            (Learner::Gcbc(l), "policy") => &mut l.policy,
            _ => return Err(Error::format(format!("unexpected net '{name}'"))),
        };
        Ok(net)
    }

    /// Replaces the optimiser state with fresh moments, as after a reload.
    pub fn reset_optimizers(&mut self) {
        match self {
            Learner::Iql(l) => {
                l.opt_value = Adam::new(l.value.params.len(), l.hyper.lr);
                l.opt_q1 = Adam::new(l.q1.params.len(), l.hyper.lr);
                l.opt_q2 = Adam::new(l.q2.params.len(), l.hyper.lr);
                l.opt_policy = Adam::new(l.policy.params.len(), l.hyper.lr);
            }
            Learner::Gcbc(l) => l.opt_policy = Adam::new(l.policy.params.len(), l.hyper.lr),
        }
    }

    pub fn save(&self, task: TaskId, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text(task)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<(TaskId, Learner)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Learner::from_text(&text)
    }
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::format(format!("bad number '{s}'")))
}

impl Policy for Learner {
    fn act(&self, state: &State, goal: Option<[f64; 2]>, rng: &mut dyn RngCore) -> Result<Action> {
        self.act_with(state, goal, ActMode::Greedy, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::fixture_schedule;

    #[test]
    fn round_trip_is_exact() {
        let hyper = IqlHyper {
            hidden: 8,
            ..IqlHyper::default()
        };
        for task in [TaskId::CliffWalking, TaskId::UMaze] {
            let env = Env::for_task(task);
            let sched = fixture_schedule(task).unwrap();
            for method in Method::ALL {
                let l = Learner::new(method, &env, env.gamma(), hyper, 5, Some(&sched)).unwrap();
                let text = l.to_text(task);
                let (t2, mut back) = Learner::from_text(&text).unwrap();
                assert_eq!(t2, task);
                assert_eq!(back.to_text(task), text);
                back.reset_optimizers();
                assert_eq!(back, l);
            }
        }
    }

    #[test]
    fn corrupted_checkpoint_rejected() {
        let env = Env::for_task(TaskId::CliffWalking);
        let hyper = IqlHyper {
            hidden: 4,
            ..IqlHyper::default()
        };
        let text = Learner::new(Method::Iql, &env, 0.99, hyper, 1, None).unwrap().to_text(TaskId::CliffWalking);
        let truncated: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(Learner::from_text(&truncated).is_err());
        assert!(Learner::from_text(&text.replace("# storl checkpoint v1", "# v0")).is_err());
    }
}
