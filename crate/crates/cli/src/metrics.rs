use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use swarm_core::control::UavParams;
use swarm_core::sim::{
    clearance_series, close_pair_count, min_distance_series, min_pairwise_distance, phase_spans, ClearanceSample,
    MinDistance, PairDistance, PhaseSpan,
};
use swarm_core::{ScenarioSpec, TrajectoryLog};

use crate::input::load_log;
use crate::manifest::RunManifest;
use crate::{Failure, LogArgs};

pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Serialize)]
pub struct Clearance {
    pub obstacle: Option<ClearanceSample>,
    pub building: Option<ClearanceSample>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub agents: usize,
    pub ticks: usize,
    pub duration: f64,
    pub reference_agent: usize,
    /// Smallest distance from the reference agent to any other agent.
    pub reference_distance: Option<MinDistance>,
    pub notice: Option<String>,
    pub min_pairwise: Option<PairDistance>,
    pub safety_range: f64,
    /// (tick, pair) samples at or below the safety range.
    pub safety_violations: usize,
    /// `None` when no scenario geometry is available.
    pub clearance: Option<Clearance>,
    pub phases: Vec<PhaseSpan>,
}

impl Report {
    pub fn build(log: &TrajectoryLog, spec: Option<&ScenarioSpec>, reference: usize) -> Report {
        let series = min_distance_series(log, reference);
        let notice = (log.agent_count < 2).then(|| "single agent: no inter-agent distances".to_string());
        let safety_range = spec.map_or(UavParams::default().safety_range, |s| s.params.safety_range);
        let clearance = spec.map(|s| {
            let c = clearance_series(log, &s.obstacles, &s.buildings);
            Clearance {
                obstacle: c.min_obstacle(),
                building: c.min_building(),
            }
        });
        Report {
            agents: log.agent_count,
            ticks: log.records.len(),
            duration: log.duration(),
            reference_agent: reference,
            reference_distance: series.overall,
            notice,
            min_pairwise: min_pairwise_distance(log),
            safety_range,
            safety_violations: close_pair_count(log, safety_range),
            clearance,
            phases: phase_spans(log),
        }
    }

    /// Short plain-text summary.
    pub fn summary(&self) -> String {
        let mut lines = vec![format!("{} agents, {} ticks, {} s", self.agents, self.ticks, self.duration)];
        match &self.min_pairwise {
            Some(p) => lines.push(format!(
                "min pairwise distance {:.3} m (agents {} and {} at t={:.1} s)",
                p.value, p.a, p.b, p.time
            )),
            None => lines.push("min pairwise distance: n/a (single agent)".into()),
        }
        if let Some(d) = &self.reference_distance {
            lines.push(format!(
                "min distance from agent {} {:.3} m (agent {} at t={:.1} s)",
                self.reference_agent, d.value, d.agent, d.time
            ));
        }
        if let Some(c) = &self.clearance {
            let show = |s: &Option<ClearanceSample>, f: fn(&ClearanceSample) -> Option<f64>| match s {
                Some(s) => format!("{:.3} m (agent {} at t={:.1} s)", f(s).unwrap_or(f64::NAN), s.agent, s.time),
                None => "n/a".into(),
            };
            lines.push(format!("min obstacle clearance {}", show(&c.obstacle, |s| s.obstacle)));
            lines.push(format!("min building clearance {}", show(&c.building, |s| s.building)));
        }
        lines.push(format!(
            "safety violations (distance <= {} m): {}",
            self.safety_range, self.safety_violations
        ));
        for p in &self.phases {
            lines.push(format!("phase {:<8} {:>7.1} .. {:>7.1} s", p.phase.as_str(), p.start, p.end));
        }
        lines.join("\n")
    }
}

pub fn write_report(report: &Report, dir: &Path) -> anyhow::Result<String> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    fs::write(dir.join(METRICS_FILE), &text).with_context(|| format!("writing {METRICS_FILE}"))?;
    Ok(text)
}

pub fn cmd_metrics(args: &LogArgs) -> Result<(), Failure> {
    let loaded = load_log(args)?;
    let report = Report::build(&loaded.log, loaded.spec.as_ref(), args.ref_agent);
    let dir = args.out.clone().unwrap_or_else(|| loaded.dir().to_path_buf());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let text = write_report(&report, &dir)?;
    if let Some(mut m) = RunManifest::load(&dir)? {
        m.record(&dir, METRICS_FILE)?;
        m.store(&dir)?;
    }
    if let Some(n) = &report.notice {
        eprintln!("note: {n}");
    }
    print!("{text}");
    Ok(())
}
