use std::path::PathBuf;

use vrasp::bench::generate_instance;
use vrasp::domain::Evaluator;
use vrasp::oracle::{export_lp, grid_schedule_search, grid_schedules, is_feasible_schedule, LpExportConfig, LpModel};
use vrasp::scenario::{build_scenario_set, ScenarioConfig};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

#[test]
fn coarse_grid_never_beats_canonical() {
    for seed in 0..20u64 {
        let instance = generate_instance(4, seed);
        let set = build_scenario_set(&instance, 4, seed, &ScenarioConfig::default()).unwrap();
        let eval = Evaluator::new(&instance, &set).unwrap();
        let visits = [1, 2, 3];
        let canonical = eval.route_cost(&visits).total;
        let (schedule, cost) = grid_schedule_search(&eval, &visits, 5.0, 60.0).unwrap();
        assert!(cost >= canonical - 1e-9);
        assert_eq!(schedule, eval.canonical(&visits));
    }
}

#[test]
fn every_grid_schedule_is_feasible() {
    let instance = generate_instance(3, 9);
    let set = build_scenario_set(&instance, 3, 9, &ScenarioConfig::default()).unwrap();
    let grid = grid_schedules(&[2, 1, 3], &set, 10.0, 30.0).unwrap();
    assert_eq!(grid.len(), 4 * 4 * 4);
    assert!(grid.iter().all(|s| is_feasible_schedule(&[2, 1, 3], s, &set)));
}

#[test]
fn lp_export_matches_golden_file() {
    let instance = generate_instance(3, 2);
    let set = build_scenario_set(&instance, 2, 2, &ScenarioConfig::default()).unwrap();
    for (model, name) in [(LpModel::P0, "p0_n3.lp"), (LpModel::P1, "p1_n3_m2.lp")] {
        let text = export_lp(&instance, &set, &LpExportConfig::new(model)).unwrap();
        let path = golden(name);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, &text).unwrap();
        }
        let expected = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, expected, "{name} drifted; rerun with UPDATE_GOLDEN=1 after reviewing");
    }
}
