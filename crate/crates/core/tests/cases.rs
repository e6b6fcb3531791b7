use swarm_core::scenario::{case2_with_velocity, MOVING_OBSTACLE_VELOCITY_SLOW};
use swarm_core::sim::{phase_spans, EventKind, Phase};
use swarm_core::{build_case, run_scenario, CaseStudy, ScenarioSpec};

#[test]
fn case1_runs_through_all_phases() {
    let spec = build_case(CaseStudy::Corridor);
    let log = run_scenario(&spec, 7).unwrap();
    assert_eq!(log.records.len(), 1451);
    let phases: Vec<Phase> = phase_spans(&log).iter().map(|s| s.phase).collect();
    assert_eq!(phases, vec![Phase::Deploy, Phase::Corridor, Phase::Recover]);
    let changes: Vec<_> = log.phase_changes().collect();
    assert_eq!(changes.len(), 2);
    assert!(changes[0].0 < changes[1].0);
    assert!(log.events.iter().any(|e| e.kind == EventKind::Retarget));
}

#[test]
fn corridor_squeezes_the_formation() {
    let spec = build_case(CaseStudy::Corridor);
    let log = run_scenario(&spec, 3).unwrap();
    let building_x = spec.buildings.iter().map(|b| (b.min.x, b.max.x)).next().unwrap();
    let mut inside = 0;
    for r in &log.records {
        for a in &r.agents {
            if a.position.x > building_x.0 && a.position.x < building_x.1 {
                inside += 1;
                assert!(a.position.y.abs() < 3.0, "agent outside the gap at t={}", r.time);
            }
        }
    }
    assert!(inside > 0, "no agent ever flew between the buildings");
}

#[test]
fn spatial_case_uses_altitude() {
    let spec = build_case(CaseStudy::Spatial);
    let log = run_scenario(&spec, 2).unwrap();
    let spread = log
        .records
        .iter()
        .flat_map(|r| r.agents.iter().map(|a| a.position.z))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z), hi.max(z)));
    assert!(spread.1 - spread.0 > 1.0);
}

#[test]
fn slow_obstacle_variant_differs_only_in_velocity() {
    let fast = build_case(CaseStudy::Obstacles);
    let slow = case2_with_velocity(MOVING_OBSTACLE_VELOCITY_SLOW);
    assert_eq!(fast.obstacles.len(), slow.obstacles.len());
    assert_ne!(fast.obstacles[3].velocity, slow.obstacles[3].velocity);
    assert_eq!(fast.obstacles[..3], slow.obstacles[..3]);
}

#[test]
fn built_cases_survive_a_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("swarm-core-cases-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for case in [CaseStudy::Corridor, CaseStudy::Obstacles, CaseStudy::Spatial] {
        let spec = build_case(case);
        let path = dir.join(format!("case{}.json", case.id()));
        std::fs::write(&path, spec.to_json()).unwrap();
        let back: ScenarioSpec = swarm_core::load_spec(&path).unwrap();
        assert_eq!(back, spec);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
