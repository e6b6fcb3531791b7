use std::fmt::Write as _;
use std::io;

use thiserror::Error;

use super::Phase;
use crate::control::ManeuverMode;
use crate::cvt::BarrierRegion;
use crate::geometry::Vector3;

pub const TRAJECTORY_HEADER: &str = "tick,time,agent,px,py,pz,vx,vy,vz,ux,uy,uz,detected_count,phase";
pub const EVENTS_HEADER: &str = "tick,time,kind,ids,value";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentRecord {
    pub position: Vector3,
    pub velocity: Vector3,
    /// Command applied over the following step.
    pub control: Vector3,
    pub detected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: usize,
    pub time: f64,
    pub phase: Phase,
    pub agents: Vec<AgentRecord>,
    /// CVT targets, indexed by agent. Empty when loaded from CSV.
    pub targets: Vec<Vector3>,
    /// Obstacle centers. Empty when loaded from CSV.
    pub obstacles: Vec<Vector3>,
    pub barrier: Option<BarrierRegion>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    SafetyViolation { a: usize, b: usize, distance: f64 },
    PhaseChange { from: Phase, to: Phase },
    Retarget,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::SafetyViolation { .. } => "safety_violation",
            EventKind::PhaseChange { .. } => "phase_change",
            EventKind::Retarget => "retarget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub tick: usize,
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct LogParseError {
    /// 1-based line number in the source text.
    pub line: usize,
    pub message: String,
}

/// Everything recorded during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub agent_count: usize,
    pub mode: ManeuverMode,
    pub records: Vec<TickRecord>,
    pub events: Vec<Event>,
}

impl TrajectoryLog {
    pub fn new(dt: f64, agent_count: usize, mode: ManeuverMode) -> Self {
        TrajectoryLog {
            dt,
            agent_count,
            mode,
            records: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.time)
    }

    pub fn safety_violations(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::SafetyViolation { .. }))
    }

    pub fn phase_changes(&self) -> impl Iterator<Item = (f64, Phase, Phase)> + '_ {
        self.events.iter().filter_map(|e| match e.kind {
            EventKind::PhaseChange { from, to } => Some((e.time, from, to)),
            _ => None,
        })
    }

    /// One row per agent per tick; numbers use the shortest decimal form
    /// that parses back to the same `f64`.
    pub fn trajectory_csv(&self) -> String {
        let mut s = String::with_capacity(self.records.len() * self.agent_count * 120);
        s.push_str(TRAJECTORY_HEADER);
        s.push('\n');
        for r in &self.records {
            for (i, a) in r.agents.iter().enumerate() {
                let (p, v, u) = (a.position, a.velocity, a.control);
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.tick, r.time, i, p.x, p.y, p.z, v.x, v.y, v.z, u.x, u.y, u.z, a.detected, r.phase
                );
            }
        }
        s
    }

    pub fn events_csv(&self) -> String {
        let mut s = String::from(EVENTS_HEADER);
        s.push('\n');
        for e in &self.events {
            let (ids, value) = match e.kind {
                EventKind::SafetyViolation { a, b, distance } => (format!("{a};{b}"), distance.to_string()),
                EventKind::PhaseChange { from, to } => (String::new(), format!("{from}>{to}")),
                EventKind::Retarget => (String::new(), String::new()),
            };
            let _ = writeln!(s, "{},{},{},{},{}", e.tick, e.time, e.kind.name(), ids, value);
        }
        s
    }

    pub fn write_trajectory<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.trajectory_csv().as_bytes())
    }

    pub fn write_events<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.events_csv().as_bytes())
    }

    /// Rebuilds the per-tick agent records from a trajectory CSV. Targets,
    /// obstacles and the barrier are not part of the file and come back
    /// empty; `dt` is taken from the first two tick times.
    pub fn from_trajectory_csv(text: &str, mode: ManeuverMode) -> Result<TrajectoryLog, LogParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == TRAJECTORY_HEADER => {}
            Some((_, h)) => {
                return Err(LogParseError {
                    line: 1,
                    message: format!("unexpected header {h:?}"),
                })
            }
            None => {
                return Err(LogParseError {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
        let mut records: Vec<TickRecord> = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| LogParseError { line: line_no, message };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 14 {
                return Err(err(format!("expected 14 fields, found {}", fields.len())));
            }
            let int = |k: usize, name: &str| -> Result<usize, LogParseError> {
                fields[k]
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| err(format!("{name}: not an integer: {:?}", fields[k])))
            };
            let num = |k: usize, name: &str| -> Result<f64, LogParseError> {
                match fields[k].trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(err(format!("{name}: not a finite number: {:?}", fields[k]))),
                }
            };
            let tick = int(0, "tick")?;
            let time = num(1, "time")?;
            let agent = int(2, "agent")?;
            let vec3 = |k: usize, name: &str| -> Result<Vector3, LogParseError> {
                Ok(Vector3::new(num(k, name)?, num(k + 1, name)?, num(k + 2, name)?))
            };
            let rec = AgentRecord {
                position: vec3(3, "position")?,
                velocity: vec3(6, "velocity")?,
                control: vec3(9, "control")?,
                detected: int(12, "detected_count")?,
            };
            let phase = Phase::parse(fields[13].trim()).ok_or_else(|| err(format!("unknown phase {:?}", fields[13])))?;
            let start_new = records.last().is_none_or(|r| r.tick != tick);
            if start_new {
                if let Some(prev) = records.last() {
                    if tick <= prev.tick {
                        return Err(err(format!("tick {tick} out of order after {}", prev.tick)));
                    }
                }
                records.push(TickRecord {
                    tick,
                    time,
                    phase,
                    agents: Vec::new(),
                    targets: Vec::new(),
                    obstacles: Vec::new(),
                    barrier: None,
                });
            }
            let r = records.last_mut().expect("record pushed above");
            if agent != r.agents.len() {
                return Err(err(format!("expected agent {} at tick {tick}, found {agent}", r.agents.len())));
            }
            r.agents.push(rec);
        }
        let agent_count = records.first().map_or(0, |r| r.agents.len());
        if let Some(r) = records.iter().find(|r| r.agents.len() != agent_count) {
            return Err(LogParseError {
                line: 0,
                message: format!("tick {} has {} agents, expected {agent_count}", r.tick, r.agents.len()),
            });
        }
        let dt = match records.as_slice() {
            [a, b, ..] => b.time - a.time,
            _ => 0.0,
        };
        Ok(TrajectoryLog {
            dt,
            agent_count,
            mode,
            records,
            events: Vec::new(),
        })
    }
}
