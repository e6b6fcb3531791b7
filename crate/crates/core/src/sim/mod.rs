//! Time stepping: double-integrator agents, moving obstacles, the drifting
//! and reshaping barrier, CVT target refresh, and trajectory logging.

mod log;
mod metrics;
mod world;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{heading_from_velocity, ControlError, ObstacleView};
use crate::cvt::CvtError;
use crate::geometry::Vector3;

pub use log::{AgentRecord, Event, EventKind, LogParseError, TickRecord, TrajectoryLog};
pub use metrics::{
    clearance_series, close_pair_count, min_distance_series, min_pairwise_distance, phase_spans, ClearanceSample,
    ClearanceSeries, DistanceSeries, MinDistance, PairDistance, PhaseSpan,
};
pub use world::{
    barrier_at, corridor_profile, greedy_match, run_simulation, settled_profile, update_phase, BarrierPlan, SimConfig, Simulation,
    World,
};

/// Slack used when comparing simulation times against scheduled events (s).
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("integration produced a non-finite state")]
    NonFinite,
    #[error("non-finite state at tick {tick} for agent {agent}")]
    NonFiniteAt { tick: usize, agent: usize },
    #[error("control failure at tick {tick}: {source}")]
    Control {
        tick: usize,
        #[source]
        source: ControlError,
    },
    #[error(transparent)]
    Cvt(#[from] CvtError),
    #[error("inconsistent world: {0}")]
    InvalidWorld(String),
}

/// Position, velocity and last valid planar heading of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub position: Vector3,
    pub velocity: Vector3,
    /// Planar flight direction (rad), kept while the agent hovers.
    pub heading: f64,
}

impl UavState {
    /// Stationary agent facing +x.
    pub fn at_rest(position: Vector3) -> Self {
        UavState {
            position,
            velocity: Vector3::ZERO,
            heading: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.velocity.is_finite() && self.heading.is_finite()
    }
}

/// Forward Euler step of `ṗ = v`, `v̇ = u`. The position advances with the
/// pre-update velocity.
pub fn integrate_step(state: &UavState, accel: Vector3, dt: f64) -> Result<UavState, SimError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::InvalidTimeStep(dt));
    }
    let velocity = state.velocity + accel * dt;
    let next = UavState {
        position: state.position + state.velocity * dt,
        velocity,
        heading: heading_from_velocity(velocity, state.heading),
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(SimError::NonFinite)
    }
}

/// Axis-aligned box building.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Building {
    pub min: Vector3,
    pub max: Vector3,
}

impl Building {
    pub fn new(min: Vector3, max: Vector3) -> Result<Self, String> {
        let b = Building { min, max };
        match b.violation() {
            Some(msg) => Err(msg),
            None => Ok(b),
        }
    }

    pub fn violation(&self) -> Option<String> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Some("building corners must be finite".into());
        }
        if !(self.min.x < self.max.x && self.min.y < self.max.y && self.min.z < self.max.z) {
            return Some(format!("building min {} must be below max {} on every axis", self.min, self.max));
        }
        None
    }

    pub fn contains(&self, p: Vector3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    /// Signed distance to the box surface, negative inside.
    pub fn signed_distance(&self, p: Vector3) -> f64 {
        let center = (self.min + self.max) * 0.5;
        let half = (self.max - self.min) * 0.5;
        let q = Vector3::new(
            (p.x - center.x).abs() - half.x,
            (p.y - center.y).abs() - half.y,
            (p.z - center.z).abs() - half.z,
        );
        let outside = q.max_components(Vector3::ZERO).norm();
        let inside = q.x.max(q.y).max(q.z).min(0.0);
        outside + inside
    }

    /// Distance from `p` to the box (zero inside).
    pub fn distance(&self, p: Vector3) -> f64 {
        self.signed_distance(p).max(0.0)
    }

    /// Nearest point of each of the six faces to `p`.
    pub fn face_nearest_points(&self, p: Vector3) -> [Vector3; 6] {
        let clamped = p.max_components(self.min).min_components(self.max);
        let mut out = [clamped; 6];
        for axis in 0..3 {
            for (k, bound) in [self.min, self.max].into_iter().enumerate() {
                let mut c = clamped.to_array();
                c[axis] = bound[axis];
                out[axis * 2 + k] = Vector3::from(c);
            }
        }
        out
    }
}

/// Spherical obstacle that starts translating at `activation_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovingObstacle {
    pub center: Vector3,
    pub radius: f64,
    #[serde(default)]
    pub velocity: Vector3,
    #[serde(default)]
    pub activation_time: f64,
}

impl MovingObstacle {
    pub fn fixed(center: Vector3, radius: f64) -> Self {
        MovingObstacle {
            center,
            radius,
            velocity: Vector3::ZERO,
            activation_time: 0.0,
        }
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.activation_time - TIME_EPS
    }

    pub fn view(&self, t: f64) -> ObstacleView {
        ObstacleView {
            center: self.center,
            radius: self.radius,
            velocity: if self.is_active(t) { self.velocity } else { Vector3::ZERO },
        }
    }

    pub fn violation(&self) -> Option<String> {
        if !(self.center.is_finite() && self.velocity.is_finite()) {
            return Some("obstacle center and velocity must be finite".into());
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Some(format!("obstacle radius must be non-negative, got {}", self.radius));
        }
        if !(self.activation_time.is_finite() && self.activation_time >= 0.0) {
            return Some(format!("activation_time must be non-negative, got {}", self.activation_time));
        }
        None
    }
}

/// Advances every active obstacle over `[t, t + dt)`.
pub fn update_obstacles(obstacles: &[MovingObstacle], t: f64, dt: f64) -> Vec<MovingObstacle> {
    obstacles
        .iter()
        .map(|o| {
            let mut o = *o;
            if o.is_active(t) {
                o.center += o.velocity * dt;
            }
            o
        })
        .collect()
}

/// Formation phase around a building corridor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    Deploy,
    Corridor,
    Recover,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Deploy => "deploy",
            Phase::Corridor => "corridor",
            Phase::Recover => "recover",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        match s {
            "deploy" => Some(Phase::Deploy),
            "corridor" => Some(Phase::Corridor),
            "recover" => Some(Phase::Recover),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
