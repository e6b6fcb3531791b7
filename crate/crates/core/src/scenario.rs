//! Scenario files: schema, validation, initial placement and the built-in
//! case presets.
//!
//! A scenario is one JSON document. Every field other than `agents`,
//! `duration` and `barrier` has a default; unknown keys are rejected at any
//! depth. Units are metres, seconds and degrees.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::control::{ControlContext, GainSet, ManeuverMode, UavParams, DEFAULT_MAX_ACCEL};
use crate::cvt::{BarrierRegion, DensityField, LloydConfig};
use crate::geometry::Vector3;
use crate::random::{standard_normal, stream_rng, PLACEMENT_STREAM};
use crate::sim::{run_simulation, BarrierPlan, Building, MovingObstacle, SimConfig, SimError, TrajectoryLog, UavState};

/// Obstacle velocity used by the built-in moving obstacle (m/s).
pub const MOVING_OBSTACLE_VELOCITY_FAST: Vector3 = Vector3::new(0.2, 0.05, 0.0);
/// Alternative, slower setting for the same obstacle (m/s).
pub const MOVING_OBSTACLE_VELOCITY_SLOW: Vector3 = Vector3::new(0.1, 0.025, 0.0);
/// Time at which the built-in moving obstacle starts to move (s).
pub const MOVING_OBSTACLE_ACTIVATION: f64 = 42.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid override `{input}`: {message}")]
    Override { input: String, message: String },
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
}

/// Lloyd settings as written in a scenario; the sample count scales with the
/// number of agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LloydSettings {
    pub samples_per_agent: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub max_iterations: usize,
    pub movement_tolerance: f64,
}

impl Default for LloydSettings {
    fn default() -> Self {
        LloydSettings {
            samples_per_agent: LloydConfig::DEFAULT_SAMPLES_PER_POINT,
            alpha1: 0.0,
            alpha2: 1.0,
            beta1: 0.0,
            beta2: 1.0,
            max_iterations: LloydConfig::DEFAULT_MAX_ITERATIONS,
            movement_tolerance: LloydConfig::DEFAULT_MOVEMENT_TOLERANCE,
        }
    }
}

impl LloydSettings {
    pub fn config(&self, agents: usize, seed: u64) -> LloydConfig {
        LloydConfig {
            points: agents,
            samples: self.samples_per_agent.saturating_mul(agents),
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            beta1: self.beta1,
            beta2: self.beta2,
            max_iterations: self.max_iterations,
            movement_tolerance: self.movement_tolerance,
            seed,
        }
    }
}

/// How agents are placed at `t = 0`. They always start at rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    /// Standard normal draws conditioned on the open unit square, `z = 0`.
    #[default]
    UnitSquareGaussian,
    Explicit { positions: Vec<Vector3> },
}

fn default_dt() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

fn default_max_accel() -> f64 {
    DEFAULT_MAX_ACCEL
}

fn default_retarget_interval() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub agents: usize,
    /// Simulated time (s).
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub mode: ManeuverMode,
    #[serde(default)]
    pub gains: GainSet,
    #[serde(default)]
    pub params: UavParams,
    pub barrier: BarrierPlan,
    #[serde(default)]
    pub density: DensityField,
    #[serde(default)]
    pub buildings: Vec<Building>,
    #[serde(default)]
    pub obstacles: Vec<MovingObstacle>,
    #[serde(default)]
    pub lloyd: LloydSettings,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub obstacle_avoidance_enabled: bool,
    /// Bound on the commanded acceleration norm (m/s²).
    #[serde(default = "default_max_accel")]
    pub max_accel: f64,
    /// Period of CVT target refreshes between phase changes (s).
    #[serde(default = "default_retarget_interval")]
    pub retarget_interval: f64,
}

impl ScenarioSpec {
    /// Parses a JSON document and validates it.
    pub fn from_json(text: &str) -> Result<ScenarioSpec, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ScenarioSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ScenarioError::Parse {
                field,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization is infallible")
    }

    /// Fails with every violated constraint.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Validation(v))
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.agents == 0 {
            out.push("agents must be at least 1".into());
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            out.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            out.push(format!("duration must be non-negative, got {}", self.duration));
        }
        out.extend(self.gains.violations());
        out.extend(self.params.violations());
        out.extend(self.barrier.violations(self.params.safety_range));
        if let Err(e) = self.density.validate() {
            out.push(format!("density: {e}"));
        }
        for (i, b) in self.buildings.iter().enumerate() {
            if let Some(m) = b.violation() {
                out.push(format!("buildings[{i}]: {m}"));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if let Some(m) = o.violation() {
                out.push(format!("obstacles[{i}]: {m}"));
            }
        }
        if self.agents > 0 {
            if let Err(e) = self.lloyd.config(self.agents, self.seed).validate() {
                out.push(format!("lloyd: {e}"));
            }
        }
        if let Placement::Explicit { positions } = &self.placement {
            if positions.len() != self.agents {
                out.push(format!(
                    "placement.positions has {} entries for {} agents",
                    positions.len(),
                    self.agents
                ));
            }
            if positions.iter().any(|p| !p.is_finite()) {
                out.push("placement.positions must be finite".into());
            }
        }
        if !(self.max_accel.is_finite() && self.max_accel > 0.0) {
            out.push(format!("max_accel must be positive, got {}", self.max_accel));
        }
        if !(self.retarget_interval.is_finite() && self.retarget_interval > 0.0) {
            out.push(format!("retarget_interval must be positive, got {}", self.retarget_interval));
        }
        out
    }

    /// Non-fatal concerns: a barrier too small to hold every agent with
    /// safety spacing.
    pub fn warnings(&self) -> Vec<String> {
        let region = &self.barrier.region;
        let dims = region.active_axes().count() as i32;
        let needed = self.agents as f64 * (2.0 * self.params.safety_range).powi(dims);
        if region.measure() < needed {
            vec![format!(
                "barrier measure {} is below {} (agents × (2·safety_range)^{dims}); agents may crowd",
                region.measure(),
                needed
            )]
        } else {
            Vec::new()
        }
    }

    /// Applies `key=value` overrides addressed by dotted paths (array items
    /// by index, e.g. `obstacles.0.radius=2`). Values are read as JSON, and
    /// taken as plain strings when they are not valid JSON.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<ScenarioSpec, ScenarioError> {
        let mut doc = serde_json::to_value(self).expect("scenario serialization is infallible");
        for raw in overrides {
            let raw = raw.as_ref();
            let bad = |message: String| ScenarioError::Override {
                input: raw.to_string(),
                message,
            };
            let (key, value) = raw.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
            let value: Value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
            set_path(&mut doc, key, value).map_err(bad)?;
        }
        let spec: ScenarioSpec = serde_path_to_error::deserialize(doc).map_err(|e| ScenarioError::Override {
            input: overrides.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(" "),
            message: format!("field `{}`: {}", e.path(), e.inner()),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(&self, seed: u64) -> ScenarioSpec {
        ScenarioSpec { seed, ..self.clone() }
    }

    pub fn initial_states(&self) -> Vec<UavState> {
        match &self.placement {
            Placement::UnitSquareGaussian => initial_positions(self.agents, self.seed),
            Placement::Explicit { positions } => positions.clone(),
        }
        .into_iter()
        .map(UavState::at_rest)
        .collect()
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.dt,
            duration: self.duration,
            retarget_interval: self.retarget_interval,
            control: ControlContext {
                gains: self.gains,
                params: self.params,
                mode: self.mode,
                obstacle_avoidance: self.obstacle_avoidance_enabled,
                max_accel: self.max_accel,
            },
            plan: self.barrier,
            density: self.density.clone(),
            lloyd: self.lloyd.config(self.agents, self.seed),
            seed: self.seed,
        }
    }

    /// Runs the scenario with its own seed.
    pub fn simulate(&self) -> Result<TrajectoryLog, SimError> {
        run_simulation(
            self.sim_config(),
            self.initial_states(),
            self.obstacles.clone(),
            self.buildings.clone(),
        )
    }
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<(), String> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("malformed key `{key}`"));
    }
    let mut node = doc;
    for (depth, part) in parts.iter().enumerate() {
        let last = depth + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.get_mut(*part)
                    .ok_or_else(|| format!("no field `{}`", parts[..=depth].join(".")))?
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| format!("`{}` indexes an array", parts[..depth].join(".")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| format!("index {idx} out of range (length {len})"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("`{}` is not an object", parts[..depth].join("."))),
        };
    }
    unreachable!("loop returns on the last segment")
}

/// Reads and validates a scenario file.
pub fn load_spec(path: impl AsRef<Path>) -> Result<ScenarioSpec, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioSpec::from_json(&text)
}

/// Runs `spec` under `seed`.
pub fn run_scenario(spec: &ScenarioSpec, seed: u64) -> Result<TrajectoryLog, SimError> {
    spec.with_seed(seed).simulate()
}

/// Starting positions: pairs of standard normal draws, redrawn until both
/// fall strictly inside `(0, 1)`; altitude zero.
pub fn initial_positions(count: usize, seed: u64) -> Vec<Vector3> {
    let mut rng = stream_rng(seed, PLACEMENT_STREAM);
    (0..count)
        .map(|_| loop {
            let x = standard_normal(&mut rng);
            let y = standard_normal(&mut rng);
            if x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 {
                break Vector3::new(x, y, 0.0);
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStudy {
    /// Eight agents, planar formation through a building gap.
    Corridor,
    /// The corridor run with static and moving obstacles.
    Obstacles,
    /// Twelve agents in a 3D barrier box.
    Spatial,
}

impl CaseStudy {
    pub fn from_id(id: u8) -> Option<CaseStudy> {
        match id {
            1 => Some(CaseStudy::Corridor),
            2 => Some(CaseStudy::Obstacles),
            3 => Some(CaseStudy::Spatial),
            _ => None,
        }
    }

    pub fn id(self) -> u8 {
        match self {
            CaseStudy::Corridor => 1,
            CaseStudy::Obstacles => 2,
            CaseStudy::Spatial => 3,
        }
    }
}

/// Cruise altitude of the built-in barriers (m).
pub const CASE_ALTITUDE: f64 = 5.0;
/// Free width between the two buildings of the built-in cases (m).
pub const CASE_GAP_WIDTH: f64 = 6.0;
const BUILDING_X: (f64, f64) = (40.0, 50.0);
const BUILDING_DEPTH: f64 = 10.0;
const BUILDING_HEIGHT: f64 = 12.0;

fn case_buildings() -> Vec<Building> {
    let half_gap = CASE_GAP_WIDTH / 2.0;
    let (x0, x1) = BUILDING_X;
    vec![
        Building {
            min: Vector3::new(x0, half_gap, 0.0),
            max: Vector3::new(x1, half_gap + BUILDING_DEPTH, BUILDING_HEIGHT),
        },
        Building {
            min: Vector3::new(x0, -half_gap - BUILDING_DEPTH, 0.0),
            max: Vector3::new(x1, -half_gap, BUILDING_HEIGHT),
        },
    ]
}

fn moving_obstacle(velocity: Vector3) -> MovingObstacle {
    MovingObstacle {
        center: Vector3::new(100.0, -3.8, CASE_ALTITUDE),
        radius: 1.0,
        velocity,
        activation_time: MOVING_OBSTACLE_ACTIVATION,
    }
}

/// Spheres sit in the lanes between formation rows past the buildings.
fn case_obstacles(moving_velocity: Vector3) -> Vec<MovingObstacle> {
    vec![
        MovingObstacle::fixed(Vector3::new(80.0, 0.0, CASE_ALTITUDE), 1.0),
        MovingObstacle::fixed(Vector3::new(92.0, 0.4, CASE_ALTITUDE), 1.0),
        MovingObstacle::fixed(Vector3::new(104.0, -0.4, CASE_ALTITUDE), 1.0),
        moving_obstacle(moving_velocity),
    ]
}

/// Same layout with the first two spheres shifted off the cruise altitude.
fn spatial_obstacles() -> Vec<MovingObstacle> {
    vec![
        MovingObstacle::fixed(Vector3::new(80.0, 2.0, CASE_ALTITUDE + 1.3), 1.0),
        MovingObstacle::fixed(Vector3::new(92.0, -2.0, CASE_ALTITUDE - 1.3), 1.0),
        MovingObstacle::fixed(Vector3::new(104.0, 0.0, CASE_ALTITUDE), 1.0),
        moving_obstacle(MOVING_OBSTACLE_VELOCITY_FAST),
    ]
}

/// Built-in scenario for `case`, seed 0.
pub fn build_case(case: CaseStudy) -> ScenarioSpec {
    let drift = Vector3::X;
    let planar = BarrierRegion {
        shape: crate::cvt::RegionShape::Planar,
        center: Vector3::new(0.0, 0.0, CASE_ALTITUDE),
        half_extents: Vector3::new(12.0, 4.0, 0.0),
        velocity: drift,
    };
    let base = ScenarioSpec {
        name: String::new(),
        agents: 8,
        duration: 145.0,
        dt: default_dt(),
        mode: ManeuverMode::Planar,
        gains: GainSet::default(),
        params: UavParams::default(),
        barrier: BarrierPlan {
            region: planar,
            corridor_gap_width: Some(CASE_GAP_WIDTH),
            corridor_half_height: None,
            transition_window: 5.0,
        },
        density: DensityField::Uniform,
        buildings: case_buildings(),
        obstacles: Vec::new(),
        lloyd: LloydSettings::default(),
        placement: Placement::UnitSquareGaussian,
        seed: 0,
        obstacle_avoidance_enabled: false,
        max_accel: DEFAULT_MAX_ACCEL,
        retarget_interval: default_retarget_interval(),
    };
    match case {
        CaseStudy::Corridor => ScenarioSpec {
            name: "case1".into(),
            ..base
        },
        CaseStudy::Obstacles => case2_with_velocity(MOVING_OBSTACLE_VELOCITY_FAST),
        CaseStudy::Spatial => ScenarioSpec {
            name: "case3".into(),
            agents: 12,
            duration: 140.0,
            mode: ManeuverMode::Spatial,
            barrier: BarrierPlan {
                region: BarrierRegion {
                    shape: crate::cvt::RegionShape::Volume,
                    half_extents: Vector3::new(12.0, 4.0, 2.0),
                    ..planar
                },
                corridor_gap_width: Some(CASE_GAP_WIDTH),
                corridor_half_height: Some(3.0),
                transition_window: 5.0,
            },
            obstacles: spatial_obstacles(),
            obstacle_avoidance_enabled: true,
            ..base
        },
    }
}

/// The obstacle case with a chosen velocity for the moving obstacle.
pub fn case2_with_velocity(moving_velocity: Vector3) -> ScenarioSpec {
    ScenarioSpec {
        name: "case2".into(),
        obstacles: case_obstacles(moving_velocity),
        obstacle_avoidance_enabled: true,
        ..build_case(CaseStudy::Corridor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Diag3;

    const MINIMAL: &str = r#"{
        "agents": 3,
        "duration": 10,
        "barrier": {"region": {"shape": "planar", "center": [0, 0, 5], "half_extents": [4, 4, 0]}}
    }"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = ScenarioSpec::from_json(MINIMAL).unwrap();
        assert_eq!(s.dt, 0.1);
        assert_eq!(s.mode, ManeuverMode::Planar);
        assert_eq!(s.gains, GainSet::default());
        assert_eq!(s.params, UavParams::default());
        assert_eq!(s.lloyd, LloydSettings::default());
        assert_eq!(s.barrier.transition_window, 5.0);
        assert_eq!(s.barrier.region.velocity, Vector3::ZERO);
        assert!(s.obstacle_avoidance_enabled);
        assert_eq!(s.max_accel, 10.0);
        assert_eq!(s.retarget_interval, 5.0);
        assert_eq!(s.placement, Placement::UnitSquareGaussian);
    }

    #[test]
    fn range_order_is_enforced() {
        let text = MINIMAL.replace("\"agents\": 3,", "\"agents\": 3, \"params\": {\"safety_range\": 2, \"detection_range\": 2, \"fov_half_angle_deg\": 60},");
        match ScenarioSpec::from_json(&text) {
            Err(ScenarioError::Validation(v)) => assert!(v.iter().any(|m| m.contains("detection_range")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        let text = MINIMAL.replace("\"agents\": 3", "\"agents\": 0, \"dt\": -1");
        match ScenarioSpec::from_json(&text) {
            Err(ScenarioError::Validation(v)) => assert!(v.len() >= 2, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = MINIMAL.replace("\"agents\": 3", "\"agents\": 3, \"foo\": 1");
        let e = ScenarioSpec::from_json(&text).unwrap_err().to_string();
        assert!(e.contains("foo"), "{e}");
        let text = MINIMAL.replace("\"half_extents\"", "\"bar\": 1, \"half_extents\"");
        let e = ScenarioSpec::from_json(&text).unwrap_err();
        match e {
            ScenarioError::Parse { field, line, message, .. } => {
                assert!(message.contains("bar"));
                assert!(field.starts_with("barrier.region"));
                assert_eq!(line, 4);
            }
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace("\"agents\": 3", "\"agents\": 3, \"placement\": {\"kind\": \"explicit\", \"positions\": [[0,0,0],[1,0,0],[2,0,0]], \"extra\": 1}");
        assert!(ScenarioSpec::from_json(&text).is_err());
    }

    #[test]
    fn built_cases_validate_and_round_trip() {
        for id in 1..=3 {
            let spec = build_case(CaseStudy::from_id(id).unwrap());
            spec.validate().unwrap();
            assert!(spec.warnings().is_empty(), "{:?}", spec.warnings());
            let back = ScenarioSpec::from_json(&spec.to_json()).unwrap();
            assert_eq!(back, spec);
        }
        assert_eq!(CaseStudy::from_id(4), None);
    }

    #[test]
    fn built_cases_carry_table_values() {
        for case in [CaseStudy::Corridor, CaseStudy::Obstacles, CaseStudy::Spatial] {
            let s = build_case(case);
            assert_eq!(s.params.detection_range, 2.0);
            assert_eq!(s.params.safety_range, 1.0);
            assert_eq!(s.params.fov_half_angle_deg, 60.0);
            assert_eq!(s.gains.formation_position, Diag3([3.0; 3]));
            assert_eq!(s.gains.formation_velocity, Diag3([5.0; 3]));
            assert_eq!(s.gains.potential_shape, Diag3([0.1, 0.5, 0.1]));
            assert_eq!(s.gains.rotational, 0.5);
            assert_eq!(s.gains.obstacle_repulsion, 5.0);
            assert_eq!(s.gains.obstacle_damping, Diag3([1.0; 3]));
            assert!(s.obstacles.iter().all(|o| o.radius == 1.0));
        }
        let c1 = build_case(CaseStudy::Corridor);
        assert_eq!((c1.agents, c1.duration, c1.mode), (8, 145.0, ManeuverMode::Planar));
        assert!(!c1.obstacle_avoidance_enabled);
        assert_eq!(c1.barrier.region.center.z, 5.0);
        assert_eq!(c1.buildings.len(), 2);
        let c2 = build_case(CaseStudy::Obstacles);
        assert!(c2.obstacle_avoidance_enabled);
        let moving: Vec<_> = c2.obstacles.iter().filter(|o| o.velocity != Vector3::ZERO).collect();
        assert_eq!(c2.obstacles.len(), 4);
        assert_eq!(moving.len(), 1);
        assert_eq!(moving[0].activation_time, 42.0);
        assert_eq!(moving[0].velocity, Vector3::new(0.2, 0.05, 0.0));
        let slow = case2_with_velocity(MOVING_OBSTACLE_VELOCITY_SLOW);
        assert_eq!(slow.obstacles[3].velocity, Vector3::new(0.1, 0.025, 0.0));
        let c3 = build_case(CaseStudy::Spatial);
        assert_eq!((c3.agents, c3.duration, c3.mode), (12, 140.0, ManeuverMode::Spatial));
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let spec = build_case(CaseStudy::Obstacles);
        let o = spec
            .with_overrides(&["obstacles.3.velocity=[0.1,0.025,0]", "seed=9", "name=custom", "gains.rotational=0"])
            .unwrap();
        assert_eq!(o.obstacles[3].velocity, MOVING_OBSTACLE_VELOCITY_SLOW);
        assert_eq!(o.seed, 9);
        assert_eq!(o.name, "custom");
        assert_eq!(o.gains.rotational, 0.0);
        assert!(spec.with_overrides(&["nope=1"]).is_err());
        assert!(spec.with_overrides(&["obstacles.9.radius=1"]).is_err());
        assert!(spec.with_overrides(&["seed"]).is_err());
        assert!(matches!(
            spec.with_overrides(&["dt=-1"]),
            Err(ScenarioError::Validation(_))
        ));
    }

    #[test]
    fn placement_is_seeded_and_in_unit_square() {
        let a = initial_positions(50, 4);
        assert_eq!(a, initial_positions(50, 4));
        assert_ne!(a, initial_positions(50, 5));
        for p in &a {
            assert!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0 && p.z == 0.0);
        }
        let spec = build_case(CaseStudy::Corridor).with_seed(4);
        assert!(spec.initial_states().iter().all(|s| s.velocity == Vector3::ZERO));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_spec("/nonexistent/scenario.json"), Err(ScenarioError::Io { .. })));
    }
}
