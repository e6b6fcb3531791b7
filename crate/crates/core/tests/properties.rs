use proptest::prelude::*;

use swarm_core::control::{
    collision_pair, obstacle_term, total_control, ControlContext, GainSet, ManeuverMode, ObstacleView, Snapshot,
    UavParams, DEFAULT_MAX_ACCEL,
};
use swarm_core::cvt::{lloyd_run, BarrierRegion, DensityField, LloydConfig};
use swarm_core::geometry::Vector3;
use swarm_core::scenario::Placement;
use swarm_core::sim::{integrate_step, UavState};
use swarm_core::{ScenarioSpec, TrajectoryLog};

fn vec3(range: f64) -> impl Strategy<Value = Vector3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn state(range: f64) -> impl Strategy<Value = UavState> {
    (vec3(range), vec3(3.0), -3.0..3.0f64).prop_map(|(position, velocity, heading)| UavState {
        position,
        velocity,
        heading,
    })
}

fn context(mode: ManeuverMode) -> ControlContext {
    ControlContext {
        gains: GainSet::default(),
        params: UavParams::default(),
        mode,
        obstacle_avoidance: true,
        max_accel: DEFAULT_MAX_ACCEL,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_control_is_ballistic(s in state(50.0), dt in 0.01..0.5f64) {
        let next = integrate_step(&s, Vector3::ZERO, dt).unwrap();
        prop_assert_eq!(next.velocity, s.velocity);
        prop_assert_eq!(next.position, s.position + s.velocity * dt);
    }

    #[test]
    fn collision_pair_is_odd(p in vec3(3.0), v in vec3(3.0)) {
        prop_assume!(p.norm() > 1e-6);
        let g = GainSet::default();
        let params = UavParams::default();
        prop_assert_eq!(collision_pair(p, v, &g, &params), -collision_pair(-p, -v, &g, &params));
    }

    #[test]
    fn command_respects_bound(
        states in prop::collection::vec(state(6.0), 1..8),
        targets in prop::collection::vec(vec3(6.0), 8),
        centers in prop::collection::vec(vec3(6.0), 0..4),
        spatial in any::<bool>(),
    ) {
        let mode = if spatial { ManeuverMode::Spatial } else { ManeuverMode::Planar };
        let ctx = context(mode);
        let obstacles: Vec<ObstacleView> = centers.iter().map(|c| ObstacleView::fixed(*c, 0.5)).collect();
        prop_assume!(states.iter().all(|s| obstacles.iter().all(|o| s.position.distance(o.center) > 1e-6)));
        let snap = Snapshot {
            states: &states,
            targets: &targets,
            obstacles: &obstacles,
            buildings: &[],
            barrier_velocity: Vector3::X,
        };
        for i in 0..states.len() {
            let b = total_control(i, &snap, &ctx).unwrap();
            prop_assert!(b.command.norm() <= DEFAULT_MAX_ACCEL * (1.0 + 1e-12));
            prop_assert_eq!(b.unclamped, b.formation + b.collision + b.obstacle);
        }
    }

    #[test]
    fn distant_obstacles_are_ignored(s in state(5.0), offset in vec3(1.0)) {
        let params = UavParams::default();
        let dir = offset.normalized().unwrap_or(Vector3::X);
        let far = ObstacleView::fixed(s.position + dir * (params.detection_range + 1.5), 1.0);
        for mode in [ManeuverMode::Planar, ManeuverMode::Spatial] {
            let r = obstacle_term(&s, &[far], &GainSet::default(), &params, mode).unwrap();
            prop_assert_eq!(r.detected, 0);
            prop_assert_eq!(r.accel, Vector3::ZERO);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lloyd_points_stay_in_region(n in 1usize..10, seed in any::<u64>(), hx in 0.5..8.0f64, hy in 0.5..8.0f64) {
        let region = BarrierRegion::planar(Vector3::new(1.0, 2.0, 5.0), hx, hy, Vector3::ZERO).unwrap();
        let cfg = LloydConfig { seed, max_iterations: 20, ..LloydConfig::new(n) };
        let out = lloyd_run(&region, &DensityField::Uniform, &cfg).unwrap();
        prop_assert_eq!(out.points.len(), n);
        prop_assert!(out.points.iter().all(|p| region.contains(*p)));
    }

    #[test]
    fn short_runs_round_trip_through_csv(n in 1usize..5, seed in 0u64..1000) {
        let spec = ScenarioSpec::from_json(&format!(r#"{{
            "agents": {n},
            "duration": 3,
            "barrier": {{"region": {{"shape": "planar", "center": [0, 0, 5], "half_extents": [4, 3, 0], "velocity": [1, 0, 0]}}}},
            "obstacles": [{{"center": [6, 0, 5], "radius": 1}}]
        }}"#)).unwrap();
        let log = spec.with_seed(seed).simulate().unwrap();
        prop_assert_eq!(log.records.len(), 31);
        let text = log.trajectory_csv();
        let back = TrajectoryLog::from_trajectory_csv(&text, spec.mode).unwrap();
        prop_assert_eq!(back.trajectory_csv(), text);
        let again = spec.with_seed(seed).simulate().unwrap();
        prop_assert_eq!(again.trajectory_csv(), log.trajectory_csv());
    }
}

#[test]
fn explicit_placement_is_used() {
    let mut spec = ScenarioSpec::from_json(
        r#"{"agents": 2, "duration": 1,
            "barrier": {"region": {"shape": "planar", "center": [0, 0, 5], "half_extents": [4, 3, 0]}},
            "placement": {"kind": "explicit", "positions": [[-3, 0, 5], [3, 0, 5]]}}"#,
    )
    .unwrap();
    let log = spec.simulate().unwrap();
    assert_eq!(log.records[0].agents[0].position, Vector3::new(-3.0, 0.0, 5.0));
    spec.placement = Placement::UnitSquareGaussian;
    let log = spec.simulate().unwrap();
    assert!(log.records[0].agents.iter().all(|a| (0.0..1.0).contains(&a.position.x)));
}
