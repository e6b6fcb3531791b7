use serde::{Deserialize, Serialize};

use super::log::{AgentRecord, Event, EventKind, TickRecord, TrajectoryLog};
use super::{integrate_step, update_obstacles, Building, MovingObstacle, Phase, SimError, UavState, TIME_EPS};
use crate::control::{total_control, ControlBreakdown, ControlContext, ObstacleView, Snapshot};
use crate::cvt::{lloyd_run_with_rng, BarrierRegion, DensityField, LloydConfig, LloydSolver, RegionShape};
use crate::geometry::Vector3;
use crate::random::{stream_rng, SimRng, LLOYD_STREAM};

fn default_transition_window() -> f64 {
    5.0
}

/// The barrier as configured, plus how it reshapes inside a corridor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierPlan {
    /// Open-space shape, used while deploying and after recovery.
    pub region: BarrierRegion,
    /// Free width between the corridor walls (m); `None` keeps the width.
    #[serde(default)]
    pub corridor_gap_width: Option<f64>,
    /// Vertical half-extent inside the corridor for volume barriers (m).
    #[serde(default)]
    pub corridor_half_height: Option<f64>,
    /// Time over which the extents morph to a new phase profile (s).
    #[serde(default = "default_transition_window")]
    pub transition_window: f64,
}

impl BarrierPlan {
    pub fn fixed(region: BarrierRegion) -> Self {
        BarrierPlan {
            region,
            corridor_gap_width: None,
            corridor_half_height: None,
            transition_window: default_transition_window(),
        }
    }

    pub fn violations(&self, safety_range: f64) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.region.validate() {
            out.push(format!("barrier.region: {e}"));
        }
        if let Some(w) = self.corridor_gap_width {
            if !(w.is_finite() && w / 2.0 - safety_range > 0.0) {
                out.push(format!(
                    "barrier.corridor_gap_width: {w} leaves no room once the safety range {safety_range} is kept from each wall"
                ));
            }
        }
        if let Some(h) = self.corridor_half_height {
            if !(h.is_finite() && h > 0.0) {
                out.push(format!("barrier.corridor_half_height: must be positive, got {h}"));
            }
            if self.region.shape == RegionShape::Planar {
                out.push("barrier.corridor_half_height: only applies to volume barriers".into());
            }
        }
        if !(self.transition_window.is_finite() && self.transition_window >= 0.0) {
            out.push(format!("barrier.transition_window: must be non-negative, got {}", self.transition_window));
        }
        out
    }
}

/// Half-extents of the barrier while inside the corridor.
pub fn corridor_profile(plan: &BarrierPlan, safety_range: f64) -> Vector3 {
    let mut h = plan.region.half_extents;
    if let Some(w) = plan.corridor_gap_width {
        h.y = w / 2.0 - safety_range;
    }
    if let (Some(z), RegionShape::Volume) = (plan.corridor_half_height, plan.region.shape) {
        h.z = z;
    }
    h
}

/// Half-extents the barrier settles to in `phase`.
pub fn settled_profile(plan: &BarrierPlan, phase: Phase, safety_range: f64) -> Vector3 {
    match phase {
        Phase::Corridor => corridor_profile(plan, safety_range),
        Phase::Deploy | Phase::Recover => plan.region.half_extents,
    }
}

/// Mutable simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub tick: usize,
    pub time: f64,
    pub agents: Vec<UavState>,
    pub obstacles: Vec<MovingObstacle>,
    pub buildings: Vec<Building>,
    pub barrier: BarrierRegion,
    pub targets: Vec<Vector3>,
    pub phase: Phase,
    pub phase_started: f64,
    pub extents_at_phase_start: Vector3,
    pub last_refresh: f64,
}

/// Barrier at time `t`: drifted center, extents interpolated from the values
/// held when the current phase began towards the phase profile.
pub fn barrier_at(world: &World, plan: &BarrierPlan, safety_range: f64, t: f64) -> BarrierRegion {
    let goal = settled_profile(plan, world.phase, safety_range);
    let s = if plan.transition_window > 0.0 {
        ((t - world.phase_started) / plan.transition_window).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let start = world.extents_at_phase_start;
    BarrierRegion {
        center: plan.region.center + plan.region.velocity * t,
        half_extents: start + (goal - start) * s,
        ..plan.region
    }
}

/// Next phase given the current agents and barrier. A single corridor
/// encounter is modelled: once recovered, the phase stays put.
pub fn update_phase(world: &World, detection_range: f64) -> Phase {
    if world.buildings.is_empty() {
        return world.phase;
    }
    match world.phase {
        Phase::Deploy => {
            let near = world
                .agents
                .iter()
                .any(|a| world.buildings.iter().any(|b| b.distance(a.position) < detection_range));
            if near {
                Phase::Corridor
            } else {
                Phase::Deploy
            }
        }
        Phase::Corridor => {
            let far_end = world.buildings.iter().map(|b| b.max.x).fold(f64::NEG_INFINITY, f64::max);
            let trailing = world.barrier.center.x - world.barrier.half_extents.x;
            if trailing > far_end + detection_range {
                Phase::Recover
            } else {
                Phase::Corridor
            }
        }
        Phase::Recover => Phase::Recover,
    }
}

/// Assigns targets to agents: agents in index order each claim the closest
/// unclaimed target (ties go to the lower target index). Returns the target
/// list reordered so that entry `i` belongs to agent `i`.
pub fn greedy_match(agents: &[Vector3], targets: &[Vector3]) -> Vec<Vector3> {
    let mut taken = vec![false; targets.len()];
    agents
        .iter()
        .map(|a| {
            let mut best: Option<(f64, usize)> = None;
            for (j, t) in targets.iter().enumerate() {
                if taken[j] {
                    continue;
                }
                let d = a.distance_squared(*t);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            match best {
                Some((_, j)) => {
                    taken[j] = true;
                    targets[j]
                }
                None => *a,
            }
        })
        .collect()
}

/// Everything a run needs besides the initial world contents.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub retarget_interval: f64,
    pub control: ControlContext,
    pub plan: BarrierPlan,
    pub density: DensityField,
    /// Lloyd settings; `points` must equal the agent count.
    pub lloyd: LloydConfig,
    pub seed: u64,
}

impl SimConfig {
    /// Number of logged ticks, `t = 0` included.
    pub fn tick_count(&self) -> usize {
        (self.duration / self.dt + TIME_EPS).floor() as usize + 1
    }
}

/// Stepper that owns the world and the trajectory log.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SimConfig,
    pub world: World,
    rng: SimRng,
    controls: Vec<ControlBreakdown>,
    log: TrajectoryLog,
}

impl Simulation {
    pub fn new(
        config: SimConfig,
        agents: Vec<UavState>,
        obstacles: Vec<MovingObstacle>,
        buildings: Vec<Building>,
    ) -> Result<Self, SimError> {
        if !(config.dt.is_finite() && config.dt > 0.0) {
            return Err(SimError::InvalidTimeStep(config.dt));
        }
        if agents.is_empty() {
            return Err(SimError::InvalidWorld("no agents".into()));
        }
        if config.lloyd.points != agents.len() {
            return Err(SimError::InvalidWorld(format!(
                "Lloyd configured for {} points but {} agents given",
                config.lloyd.points,
                agents.len()
            )));
        }
        let mut rng = stream_rng(config.seed, LLOYD_STREAM);
        let barrier = config.plan.region;
        let lloyd = lloyd_run_with_rng(&barrier, &config.density, &config.lloyd, &mut rng)?;
        let positions: Vec<Vector3> = agents.iter().map(|a| a.position).collect();
        let targets = greedy_match(&positions, &lloyd.points);
        let world = World {
            tick: 0,
            time: 0.0,
            agents,
            obstacles,
            buildings,
            barrier,
            targets,
            phase: Phase::Deploy,
            phase_started: 0.0,
            extents_at_phase_start: barrier.half_extents,
            last_refresh: 0.0,
        };
        let log = TrajectoryLog::new(config.dt, world.agents.len(), config.control.mode);
        let mut sim = Simulation {
            config,
            world,
            rng,
            controls: Vec::new(),
            log,
        };
        sim.advance_phase()?;
        sim.compute_controls()?;
        sim.record();
        Ok(sim)
    }

    pub fn log(&self) -> &TrajectoryLog {
        &self.log
    }

    pub fn into_log(self) -> TrajectoryLog {
        self.log
    }

    pub fn controls(&self) -> &[ControlBreakdown] {
        &self.controls
    }

    pub fn is_finished(&self) -> bool {
        self.world.tick + 1 >= self.config.tick_count()
    }

    /// Advances one tick and appends its record.
    pub fn step(&mut self) -> Result<(), SimError> {
        let dt = self.config.dt;
        let k = self.world.tick;
        let t_k = self.world.time;
        for (i, agent) in self.world.agents.iter_mut().enumerate() {
            *agent = integrate_step(agent, self.controls[i].command, dt).map_err(|e| match e {
                SimError::NonFinite => SimError::NonFiniteAt { tick: k + 1, agent: i },
                other => other,
            })?;
        }
        self.world.obstacles = update_obstacles(&self.world.obstacles, t_k, dt);
        self.world.tick = k + 1;
        self.world.time = (k + 1) as f64 * dt;
        self.world.barrier = barrier_at(&self.world, &self.config.plan, self.safety_range(), self.world.time);
        let drift = self.world.barrier.velocity * dt;
        for t in &mut self.world.targets {
            *t += drift;
        }
        let refreshed = self.advance_phase()?;
        if !refreshed && self.world.time - self.world.last_refresh >= self.config.retarget_interval - TIME_EPS {
            self.refresh_targets()?;
            self.log.events.push(Event {
                tick: self.world.tick,
                time: self.world.time,
                kind: EventKind::Retarget,
            });
        }
        self.compute_controls()?;
        self.record();
        Ok(())
    }

    /// Steps until the configured duration has been logged.
    pub fn run(mut self) -> Result<TrajectoryLog, SimError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(self.log)
    }

    fn safety_range(&self) -> f64 {
        self.config.control.params.safety_range
    }

    /// Applies a phase change if one is due; returns whether targets were
    /// refreshed.
    fn advance_phase(&mut self) -> Result<bool, SimError> {
        let next = update_phase(&self.world, self.config.control.params.detection_range);
        if next == self.world.phase {
            return Ok(false);
        }
        self.log.events.push(Event {
            tick: self.world.tick,
            time: self.world.time,
            kind: EventKind::PhaseChange {
                from: self.world.phase,
                to: next,
            },
        });
        self.world.phase = next;
        self.world.phase_started = self.world.time;
        self.world.extents_at_phase_start = self.world.barrier.half_extents;
        self.world.barrier = barrier_at(&self.world, &self.config.plan, self.safety_range(), self.world.time);
        self.refresh_targets()?;
        Ok(true)
    }

    /// Re-runs Lloyd on the barrier shape the current phase settles to,
    /// warm-started from the current targets so each agent keeps its slot.
    fn refresh_targets(&mut self) -> Result<(), SimError> {
        let goal = BarrierRegion {
            half_extents: settled_profile(&self.config.plan, self.world.phase, self.safety_range()),
            ..self.world.barrier
        };
        let solver = LloydSolver::new(&goal, &self.config.density, &self.config.lloyd, self.world.targets.clone())?;
        let points = solver.run(&mut self.rng)?.points;
        let positions: Vec<Vector3> = self.world.agents.iter().map(|a| a.position).collect();
        self.world.targets = greedy_match(&positions, &points);
        self.world.last_refresh = self.world.time;
        Ok(())
    }

    fn compute_controls(&mut self) -> Result<(), SimError> {
        let t = self.world.time;
        let views: Vec<ObstacleView> = self.world.obstacles.iter().map(|o| o.view(t)).collect();
        let snap = Snapshot {
            states: &self.world.agents,
            targets: &self.world.targets,
            obstacles: &views,
            buildings: &self.world.buildings,
            barrier_velocity: self.world.barrier.velocity,
        };
        let tick = self.world.tick;
        self.controls = (0..self.world.agents.len())
            .map(|i| total_control(i, &snap, &self.config.control))
            .collect::<Result<_, _>>()
            .map_err(|source| SimError::Control { tick, source })?;
        Ok(())
    }

    fn record(&mut self) {
        let w = &self.world;
        let rs = self.config.control.params.safety_range;
        for a in 0..w.agents.len() {
            for b in a + 1..w.agents.len() {
                let d = w.agents[a].position.distance(w.agents[b].position);
                if d <= rs {
                    self.log.events.push(Event {
                        tick: w.tick,
                        time: w.time,
                        kind: EventKind::SafetyViolation { a, b, distance: d },
                    });
                }
            }
        }
        let agents = w
            .agents
            .iter()
            .zip(&self.controls)
            .map(|(s, c)| AgentRecord {
                position: s.position,
                velocity: s.velocity,
                control: c.command,
                detected: c.detected,
            })
            .collect();
        self.log.records.push(TickRecord {
            tick: w.tick,
            time: w.time,
            phase: w.phase,
            agents,
            targets: w.targets.clone(),
            obstacles: w.obstacles.iter().map(|o| o.center).collect(),
            barrier: Some(w.barrier),
        });
    }
}

/// Builds and runs a simulation to completion.
pub fn run_simulation(
    config: SimConfig,
    agents: Vec<UavState>,
    obstacles: Vec<MovingObstacle>,
    buildings: Vec<Building>,
) -> Result<TrajectoryLog, SimError> {
    Simulation::new(config, agents, obstacles, buildings)?.run()
}
