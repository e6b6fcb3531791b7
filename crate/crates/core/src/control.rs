//! Control laws for one agent.
//!
//! The command is the superposition of three terms:
//!
//! * formation tracking toward the agent's CVT target,
//! * pairwise spring-like repulsion from neighbours inside the detection range,
//! * potential-field obstacle avoidance (distance-shell repulsion plus a
//!   rotated-offset term that steers sideways), active only for obstacles that
//!   are inside the detection range and the field of view.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    angle_between, avoidance_angle, heading_of, rotation_y, rotation_z, wrap_angle, Diag3, GeometryError, Vector3,
    ZERO_VECTOR_EPS,
};
use crate::sim::{Building, UavState};

/// Floor on `‖p_ij‖ − r_s` in the collision denominator (m).
pub const COLLISION_EPS: f64 = 1e-3;
/// Speed below which an agent keeps its previous flight direction (m/s).
pub const HEADING_SPEED_EPS: f64 = 1e-3;
/// Default bound on the commanded acceleration norm (m/s²).
pub const DEFAULT_MAX_ACCEL: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("agent {agent} coincides with obstacle center {center}")]
    DegeneratePosition { agent: usize, center: Vector3 },
    #[error("no CVT target assigned to agent {0}")]
    MissingTarget(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Every controller gain. Matrix gains are diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSet {
    /// Formation position gain `K_p`.
    pub formation_position: Diag3,
    /// Formation relative-velocity gain `K_v`.
    pub formation_velocity: Diag3,
    /// Collision position gain `k_c1`.
    pub collision_position: Diag3,
    /// Collision relative-velocity gain `k_c2`.
    pub collision_velocity: Diag3,
    /// Shape matrix `k_v` of the obstacle distance potential.
    pub potential_shape: Diag3,
    /// Rotational potential coefficient `k_r`. Zero disables the term.
    pub rotational: f64,
    /// Weight `k_o1` on the obstacle distance potential.
    pub obstacle_repulsion: f64,
    /// Velocity damping `k_o2` while an obstacle is detected.
    pub obstacle_damping: Diag3,
}

impl Default for GainSet {
    fn default() -> Self {
        GainSet {
            formation_position: Diag3::uniform(3.0),
            formation_velocity: Diag3::uniform(5.0),
            collision_position: Diag3::IDENTITY,
            collision_velocity: Diag3::IDENTITY,
            potential_shape: Diag3([0.1, 0.5, 0.1]),
            rotational: 0.5,
            obstacle_repulsion: 5.0,
            obstacle_damping: Diag3::IDENTITY,
        }
    }
}

impl GainSet {
    /// Lists every violated gain constraint.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let diag = [
            ("formation_position", self.formation_position),
            ("formation_velocity", self.formation_velocity),
            ("collision_position", self.collision_position),
            ("collision_velocity", self.collision_velocity),
            ("potential_shape", self.potential_shape),
            ("obstacle_damping", self.obstacle_damping),
        ];
        for (name, d) in diag {
            if !d.is_positive_definite() {
                out.push(format!("gains.{name} must have strictly positive diagonal entries, got {:?}", d.0));
            }
        }
        if !(self.rotational.is_finite() && self.rotational >= 0.0) {
            out.push(format!("gains.rotational must be non-negative, got {}", self.rotational));
        }
        if !(self.obstacle_repulsion.is_finite() && self.obstacle_repulsion > 0.0) {
            out.push(format!("gains.obstacle_repulsion must be positive, got {}", self.obstacle_repulsion));
        }
        out
    }
}

/// Sensing geometry shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavParams {
    /// `r_s` (m)
    pub safety_range: f64,
    /// `r_d` (m)
    pub detection_range: f64,
    /// Half-angle of the field of view around the flight direction (degrees).
    pub fov_half_angle_deg: f64,
}

impl Default for UavParams {
    fn default() -> Self {
        UavParams {
            safety_range: 1.0,
            detection_range: 2.0,
            fov_half_angle_deg: 60.0,
        }
    }
}

impl UavParams {
    pub fn fov_half_angle(&self) -> f64 {
        self.fov_half_angle_deg.to_radians()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (rs, rd) = (self.safety_range, self.detection_range);
        if !(rs.is_finite() && rs > 0.0) {
            out.push(format!("params.safety_range must be positive, got {rs}"));
        }
        if !(rd.is_finite() && rs < rd) {
            out.push(format!("params.safety_range ({rs}) must be below params.detection_range ({rd})"));
        }
        let fov = self.fov_half_angle_deg;
        if !(fov > 0.0 && fov < 180.0) {
            out.push(format!("params.fov_half_angle_deg must lie in (0, 180), got {fov}"));
        }
        out
    }
}

/// What an agent needs to know about one obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleView {
    pub center: Vector3,
    pub radius: f64,
    pub velocity: Vector3,
}

impl ObstacleView {
    pub fn fixed(center: Vector3, radius: f64) -> Self {
        ObstacleView {
            center,
            radius,
            velocity: Vector3::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverMode {
    /// Horizontal sector detection and rotation about z only.
    #[default]
    Planar,
    /// Conical detection and the y/z rotation chain.
    Spatial,
}

/// Indices `j ≠ i` strictly closer than `detection_range` to agent `i`.
pub fn neighborhood(i: usize, positions: &[Vector3], detection_range: f64) -> Vec<usize> {
    let p = positions[i];
    positions
        .iter()
        .enumerate()
        .filter(|&(j, q)| j != i && p.distance(*q) < detection_range)
        .map(|(j, _)| j)
        .collect()
}

/// Formation tracking: `−K_p(p − c) − K_v(v − v_barrier)`.
pub fn formation_term(p: Vector3, v: Vector3, target: Vector3, barrier_velocity: Vector3, gains: &GainSet) -> Vector3 {
    -(gains.formation_position * (p - target)) - gains.formation_velocity * (v - barrier_velocity)
}

/// Pairwise collision response of agent `i` against one neighbour offset
/// `p_ij = p_j − p_i` with relative velocity `v_ij = v_j − v_i`.
pub fn collision_pair(p_ij: Vector3, v_ij: Vector3, gains: &GainSet, params: &UavParams) -> Vector3 {
    let gap = p_ij.norm() - params.safety_range;
    let denom = (gap * gap).max(COLLISION_EPS * COLLISION_EPS);
    -(gains.collision_position * (p_ij / denom)) + gains.collision_velocity * v_ij
}

/// Sum of [`collision_pair`] over the neighbourhood of agent `i`.
pub fn collision_term(i: usize, states: &[UavState], gains: &GainSet, params: &UavParams) -> Vector3 {
    let me = &states[i];
    let mut u = Vector3::ZERO;
    for (j, other) in states.iter().enumerate() {
        if j == i {
            continue;
        }
        let p_ij = other.position - me.position;
        if p_ij.norm() < params.detection_range {
            u += collision_pair(p_ij, other.velocity - me.velocity, gains, params);
        }
    }
    u
}

/// Horizontal sector detection around the heading angle `fly_dir`.
pub fn detect_planar(p: Vector3, fly_dir: f64, obstacle: &ObstacleView, params: &UavParams) -> bool {
    if p.distance(obstacle.center) > params.detection_range + obstacle.radius {
        return false;
    }
    let bearing = libm::atan2(obstacle.center.y - p.y, obstacle.center.x - p.x);
    wrap_angle(bearing - fly_dir).abs() < params.fov_half_angle()
}

/// Flight direction used by the cone test: the velocity, or the cached
/// planar heading when the agent is (nearly) stationary.
pub fn flight_direction(v: Vector3, cached_heading: f64) -> Vector3 {
    if v.norm() >= HEADING_SPEED_EPS {
        v
    } else {
        Vector3::new(libm::cos(cached_heading), libm::sin(cached_heading), 0.0)
    }
}

/// Conical detection around the flight direction.
pub fn detect_spatial(p: Vector3, v: Vector3, cached_heading: f64, obstacle: &ObstacleView, params: &UavParams) -> bool {
    if p.distance(obstacle.center) > params.detection_range + obstacle.radius {
        return false;
    }
    match angle_between(obstacle.center - p, flight_direction(v, cached_heading)) {
        Ok(angle) => angle <= params.fov_half_angle(),
        // the agent sits on the obstacle center: inside any cone
        Err(_) => true,
    }
}

fn offset_from(p: Vector3, obstacle: &ObstacleView) -> Result<(Vector3, f64), ControlError> {
    let d = p - obstacle.center;
    let n = d.norm();
    if n <= ZERO_VECTOR_EPS {
        return Err(ControlError::DegeneratePosition {
            agent: usize::MAX,
            center: obstacle.center,
        });
    }
    Ok((d, n))
}

/// Distance-shell potential gradient
/// `(‖k_v(p − o)‖ − r_a)·(p − o)/‖p − o‖` with `r_a = r_d + r_o`.
pub fn grad_attractive(
    p: Vector3,
    obstacle: &ObstacleView,
    gains: &GainSet,
    params: &UavParams,
    detected: bool,
) -> Result<Vector3, ControlError> {
    if !detected {
        return Ok(Vector3::ZERO);
    }
    let (d, n) = offset_from(p, obstacle)?;
    let shell = params.detection_range + obstacle.radius;
    Ok(d * ((gains.potential_shape * d).norm() - shell) / n)
}

/// Planar rotational gradient `k_r·T_z(α)·(p − o)` on the horizontal offset.
pub fn grad_rotational_planar(
    p: Vector3,
    obstacle: &ObstacleView,
    gains: &GainSet,
    params: &UavParams,
    detected: bool,
) -> Result<Vector3, ControlError> {
    if !detected {
        return Ok(Vector3::ZERO);
    }
    let (d, n) = offset_from(p, obstacle)?;
    let alpha = avoidance_angle(n, params.safety_range, params.detection_range)?;
    Ok(rotation_z(alpha).apply(d.horizontal()) * gains.rotational)
}

/// Spatial rotational gradient `k_r·T_x·T_y(α)·T_z(α)·(p − o)` with `T_x = I`.
pub fn grad_rotational_spatial(
    p: Vector3,
    obstacle: &ObstacleView,
    gains: &GainSet,
    params: &UavParams,
    detected: bool,
) -> Result<Vector3, ControlError> {
    if !detected {
        return Ok(Vector3::ZERO);
    }
    let (d, n) = offset_from(p, obstacle)?;
    let alpha = avoidance_angle(n, params.safety_range, params.detection_range)?;
    Ok(rotation_y(alpha).apply(rotation_z(alpha).apply(d)) * gains.rotational)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleResponse {
    pub accel: Vector3,
    pub detected: usize,
}

/// Obstacle avoidance command
/// `−k_o1·Σ∇U_p − Σ∇U_r − k_o2·v`, summed over detected obstacles only.
/// Returns exactly zero when nothing is detected.
pub fn obstacle_term(
    state: &UavState,
    obstacles: &[ObstacleView],
    gains: &GainSet,
    params: &UavParams,
    mode: ManeuverMode,
) -> Result<ObstacleResponse, ControlError> {
    let p = state.position;
    let mut attractive = Vector3::ZERO;
    let mut rotational = Vector3::ZERO;
    let mut detected = 0;
    for ob in obstacles {
        let hit = match mode {
            ManeuverMode::Planar => detect_planar(p, state.heading, ob, params),
            ManeuverMode::Spatial => detect_spatial(p, state.velocity, state.heading, ob, params),
        };
        if !hit {
            continue;
        }
        detected += 1;
        attractive += grad_attractive(p, ob, gains, params, true)?;
        rotational += match mode {
            ManeuverMode::Planar => grad_rotational_planar(p, ob, gains, params, true)?,
            ManeuverMode::Spatial => grad_rotational_spatial(p, ob, gains, params, true)?,
        };
    }
    if detected == 0 {
        return Ok(ObstacleResponse {
            accel: Vector3::ZERO,
            detected,
        });
    }
    let accel = -(attractive * gains.obstacle_repulsion) - rotational - gains.obstacle_damping * state.velocity;
    Ok(ObstacleResponse { accel, detected })
}

/// Virtual point obstacles for nearby building walls: the nearest point of
/// every face within `detection_range` of `p`, with zero radius. Faces the
/// agent is touching are skipped (no direction is defined there).
pub fn building_views(p: Vector3, buildings: &[Building], detection_range: f64) -> Vec<ObstacleView> {
    let mut out = Vec::new();
    for b in buildings {
        for q in b.face_nearest_points(p) {
            let d = q.distance(p);
            if d <= detection_range && d > ZERO_VECTOR_EPS {
                out.push(ObstacleView::fixed(q, 0.0));
            }
        }
    }
    out
}

/// Immutable view of the world used to compute every agent's command.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a> {
    pub states: &'a [UavState],
    pub targets: &'a [Vector3],
    pub obstacles: &'a [ObstacleView],
    pub buildings: &'a [Building],
    pub barrier_velocity: Vector3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlContext {
    pub gains: GainSet,
    pub params: UavParams,
    pub mode: ManeuverMode,
    pub obstacle_avoidance: bool,
    pub max_accel: f64,
}

/// The individual terms of one agent's command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlBreakdown {
    pub formation: Vector3,
    pub collision: Vector3,
    pub obstacle: Vector3,
    /// Obstacles (including virtual wall points) detected this tick.
    pub detected: usize,
    /// Sum of the active terms before the acceleration bound.
    pub unclamped: Vector3,
    /// Applied command, `unclamped` rescaled to norm ≤ `max_accel`.
    pub command: Vector3,
}

/// Full command for agent `i`: formation + collision (+ obstacle when
/// avoidance is enabled), bounded in norm by `ctx.max_accel`.
pub fn total_control(i: usize, snap: &Snapshot<'_>, ctx: &ControlContext) -> Result<ControlBreakdown, ControlError> {
    let target = *snap.targets.get(i).ok_or(ControlError::MissingTarget(i))?;
    let me = &snap.states[i];
    let formation = formation_term(me.position, me.velocity, target, snap.barrier_velocity, &ctx.gains);
    let collision = collision_term(i, snap.states, &ctx.gains, &ctx.params);
    let mut unclamped = formation + collision;
    let mut obstacle = Vector3::ZERO;
    let mut detected = 0;
    if ctx.obstacle_avoidance {
        let mut views = snap.obstacles.to_vec();
        views.extend(building_views(me.position, snap.buildings, ctx.params.detection_range));
        let resp = obstacle_term(me, &views, &ctx.gains, &ctx.params, ctx.mode).map_err(|e| match e {
            ControlError::DegeneratePosition { center, .. } => ControlError::DegeneratePosition { agent: i, center },
            other => other,
        })?;
        obstacle = resp.accel;
        detected = resp.detected;
        unclamped += obstacle;
    }
    Ok(ControlBreakdown {
        formation,
        collision,
        obstacle,
        detected,
        unclamped,
        command: unclamped.clamp_norm(ctx.max_accel),
    })
}

/// Planar heading of a velocity, falling back to `previous` when too slow.
pub fn heading_from_velocity(v: Vector3, previous: f64) -> f64 {
    if v.horizontal().norm() >= HEADING_SPEED_EPS {
        heading_of(v)
    } else {
        previous
    }
}
