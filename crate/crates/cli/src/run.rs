use std::fs;

use anyhow::{anyhow, Context};

use crate::input::{describe, scenario};
use crate::manifest::{sha256_hex, RunManifest};
use crate::metrics::Report;
use crate::{Failure, RunArgs};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const SCENARIO_FILE: &str = "scenario.json";

pub fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let spec = scenario(&args.scenario)?.ok_or_else(|| anyhow!("one of --case or --scenario is required"))?;
    let spec = match args.seed {
        Some(seed) => spec.with_seed(seed),
        None => spec,
    };
    spec.validate()?;
    if args.ref_agent >= spec.agents {
        return Err(anyhow!("reference agent {} out of range ({} agents)", args.ref_agent, spec.agents).into());
    }
    for w in spec.warnings() {
        eprintln!("warning: {w}");
    }

    let log = spec
        .simulate()
        .map_err(|e| Failure::Runtime(anyhow::Error::new(e).context("simulation aborted")))?;

    let dir = &args.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let snapshot = spec.to_json();
    fs::write(dir.join(TRAJECTORY_FILE), log.trajectory_csv())?;
    fs::write(dir.join(EVENTS_FILE), log.events_csv())?;
    fs::write(dir.join(SCENARIO_FILE), &snapshot)?;

    let mut manifest = RunManifest {
        scenario: describe(&args.scenario),
        seed: spec.seed,
        output_dir: dir.display().to_string(),
        spec_sha256: sha256_hex(snapshot.as_bytes()),
        files: Vec::new(),
    };
    for name in [TRAJECTORY_FILE, EVENTS_FILE, SCENARIO_FILE] {
        manifest.record(dir, name)?;
    }
    manifest.store(dir)?;

    let report = Report::build(&log, Some(&spec), args.ref_agent);
    println!("{}", report.summary());
    println!(
        "wrote {} ticks ({} rows) to {}",
        log.records.len(),
        log.records.len() * log.agent_count,
        dir.display()
    );
    Ok(())
}
