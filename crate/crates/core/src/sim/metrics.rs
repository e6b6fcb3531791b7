use serde::Serialize;

use super::log::TrajectoryLog;
use super::{update_obstacles, Building, MovingObstacle, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinDistance {
    pub value: f64,
    pub time: f64,
    pub tick: usize,
    pub agent: usize,
}

/// Distance from a reference agent to its nearest teammate at every tick.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    pub reference: usize,
    pub times: Vec<f64>,
    /// Per tick; `f64::INFINITY` when the swarm has a single agent.
    pub nearest: Vec<f64>,
    /// Smallest value over the whole log, `None` for a single agent.
    pub overall: Option<MinDistance>,
}

impl DistanceSeries {
    /// Smallest value from `start_time` on.
    pub fn min_since(&self, start_time: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.nearest)
            .filter(|(t, _)| **t >= start_time)
            .map(|(_, d)| *d)
            .filter(|d| d.is_finite())
            .reduce(f64::min)
    }
}

pub fn min_distance_series(log: &TrajectoryLog, reference: usize) -> DistanceSeries {
    let mut times = Vec::with_capacity(log.records.len());
    let mut nearest = Vec::with_capacity(log.records.len());
    let mut overall: Option<MinDistance> = None;
    for r in &log.records {
        times.push(r.time);
        let mut best = f64::INFINITY;
        let mut best_agent = reference;
        if let Some(me) = r.agents.get(reference) {
            for (j, other) in r.agents.iter().enumerate() {
                if j == reference {
                    continue;
                }
                let d = me.position.distance(other.position);
                if d < best {
                    best = d;
                    best_agent = j;
                }
            }
        }
        nearest.push(best);
        if best.is_finite() && overall.is_none_or(|o| best < o.value) {
            overall = Some(MinDistance {
                value: best,
                time: r.time,
                tick: r.tick,
                agent: best_agent,
            });
        }
    }
    DistanceSeries {
        reference,
        times,
        nearest,
        overall,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDistance {
    pub value: f64,
    pub time: f64,
    pub tick: usize,
    pub a: usize,
    pub b: usize,
}

/// Closest pair of agents over the whole log.
pub fn min_pairwise_distance(log: &TrajectoryLog) -> Option<PairDistance> {
    let mut best: Option<PairDistance> = None;
    for r in &log.records {
        for (a, pa) in r.agents.iter().enumerate() {
            for (b, pb) in r.agents.iter().enumerate().skip(a + 1) {
                let d = pa.position.distance(pb.position);
                if best.is_none_or(|x| d < x.value) {
                    best = Some(PairDistance {
                        value: d,
                        time: r.time,
                        tick: r.tick,
                        a,
                        b,
                    });
                }
            }
        }
    }
    best
}

/// Number of (tick, pair) samples with separation at or below `threshold`.
pub fn close_pair_count(log: &TrajectoryLog, threshold: f64) -> usize {
    log.records
        .iter()
        .map(|r| {
            let ps = &r.agents;
            (0..ps.len())
                .flat_map(|a| (a + 1..ps.len()).map(move |b| (a, b)))
                .filter(|&(a, b)| ps[a].position.distance(ps[b].position) <= threshold)
                .count()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClearanceSample {
    pub tick: usize,
    pub time: f64,
    pub agent: usize,
    /// Gap to the nearest sphere surface; `None` without obstacles.
    pub obstacle: Option<f64>,
    /// Signed distance to the nearest building, negative inside.
    pub building: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClearanceSeries {
    pub samples: Vec<ClearanceSample>,
}

impl ClearanceSeries {
    pub fn min_obstacle(&self) -> Option<ClearanceSample> {
        self.samples
            .iter()
            .filter(|s| s.obstacle.is_some())
            .min_by(|a, b| a.obstacle.unwrap().total_cmp(&b.obstacle.unwrap()))
            .copied()
    }

    pub fn min_building(&self) -> Option<ClearanceSample> {
        self.samples
            .iter()
            .filter(|s| s.building.is_some())
            .min_by(|a, b| a.building.unwrap().total_cmp(&b.building.unwrap()))
            .copied()
    }
}

/// Clearance of every agent to obstacles and buildings. Obstacle motion is
/// replayed with the same update the simulator uses.
pub fn clearance_series(log: &TrajectoryLog, obstacles: &[MovingObstacle], buildings: &[Building]) -> ClearanceSeries {
    let mut obs = obstacles.to_vec();
    let mut samples = Vec::with_capacity(log.records.len() * log.agent_count);
    for r in &log.records {
        for (i, a) in r.agents.iter().enumerate() {
            let p = a.position;
            let obstacle = obs.iter().map(|o| p.distance(o.center) - o.radius).reduce(f64::min);
            let building = buildings.iter().map(|b| b.signed_distance(p)).reduce(f64::min);
            samples.push(ClearanceSample {
                tick: r.tick,
                time: r.time,
                agent: i,
                obstacle,
                building,
            });
        }
        obs = update_obstacles(&obs, r.time, log.dt);
    }
    ClearanceSeries { samples }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpan {
    pub phase: Phase,
    pub start: f64,
    pub end: f64,
}

/// Contiguous runs of the logged phase.
pub fn phase_spans(log: &TrajectoryLog) -> Vec<PhaseSpan> {
    let mut spans: Vec<PhaseSpan> = Vec::new();
    for r in &log.records {
        match spans.last_mut() {
            Some(s) if s.phase == r.phase => s.end = r.time,
            _ => spans.push(PhaseSpan {
                phase: r.phase,
                start: r.time,
                end: r.time,
            }),
        }
    }
    spans
}
