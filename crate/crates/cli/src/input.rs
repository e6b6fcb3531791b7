use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use swarm_core::scenario::CaseStudy;
use swarm_core::{build_case, load_spec, ScenarioSpec, TrajectoryLog};

use crate::run::{SCENARIO_FILE, TRAJECTORY_FILE};
use crate::{Failure, LogArgs, ScenarioArgs};

/// Human-readable origin of a scenario, recorded in the manifest.
pub fn describe(args: &ScenarioArgs) -> String {
    match (&args.case, &args.scenario) {
        (Some(c), _) => format!("case {c}"),
        (None, Some(p)) => p.display().to_string(),
        (None, None) => "none".into(),
    }
}

/// Resolves `--case` / `--scenario` plus overrides; `None` when neither flag
/// is given.
pub fn scenario(args: &ScenarioArgs) -> Result<Option<ScenarioSpec>, Failure> {
    let base = match (&args.case, &args.scenario) {
        (Some(id), _) => {
            let case = CaseStudy::from_id(*id).ok_or_else(|| anyhow!("unknown case {id}"))?;
            build_case(case)
        }
        (None, Some(path)) => load_spec(path).with_context(|| format!("loading scenario {}", path.display()))?,
        (None, None) => {
            if !args.overrides.is_empty() {
                return Err(anyhow!("--override needs --case or --scenario").into());
            }
            return Ok(None);
        }
    };
    if args.overrides.is_empty() {
        Ok(Some(base))
    } else {
        Ok(Some(base.with_overrides(&args.overrides)?))
    }
}

pub struct LoadedLog {
    pub path: PathBuf,
    pub log: TrajectoryLog,
    pub spec: Option<ScenarioSpec>,
}

impl LoadedLog {
    pub fn dir(&self) -> &Path {
        self.path.parent().unwrap_or(Path::new("."))
    }
}

/// Reads a trajectory CSV and the scenario describing its scene.
pub fn load_log(args: &LogArgs) -> Result<LoadedLog, Failure> {
    let path = if args.log.is_dir() {
        args.log.join(TRAJECTORY_FILE)
    } else {
        args.log.clone()
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read log {}", path.display()))?;
    let mut spec = scenario(&args.scenario)?;
    if spec.is_none() {
        let sibling = path.parent().unwrap_or(Path::new(".")).join(SCENARIO_FILE);
        if sibling.is_file() {
            spec = Some(load_spec(&sibling).with_context(|| format!("loading {}", sibling.display()))?);
        }
    }
    let mode = spec.as_ref().map(|s| s.mode).unwrap_or_default();
    let log = TrajectoryLog::from_trajectory_csv(&text, mode).with_context(|| format!("corrupt log {}", path.display()))?;
    if log.records.is_empty() {
        return Err(anyhow!("log {} has no records", path.display()).into());
    }
    if args.ref_agent >= log.agent_count {
        return Err(anyhow!("reference agent {} out of range ({} agents)", args.ref_agent, log.agent_count).into());
    }
    Ok(LoadedLog { path, log, spec })
}
