use coverage_core::experiments::{
    generate_random_scenario, parse_scenario, render_report, report_csv, report_json, run_experiment, scenario_svg,
    Format, ScenarioTemplate, SolverKind, CSV_COLUMNS,
};

#[test]
fn generated_scenarios_round_trip_and_run() {
    let t = ScenarioTemplate::desk(4);
    let batch: Vec<_> = (0..3).map(|s| generate_random_scenario(&t, s).unwrap()).collect();
    for s in &batch {
        assert_eq!(&parse_scenario(&s.to_json().unwrap()).unwrap(), s);
    }
    let report = run_experiment(&batch);
    assert_eq!(report.scenarios.len(), 3);
    for sr in &report.scenarios {
        assert!(sr.error.is_none());
        let anchor = sr.cost(SolverKind::Centralized1).unwrap();
        for row in &sr.rows {
            let c = row.cost.unwrap();
            assert!(c <= sr.initial_cost.unwrap() + 1e-9);
            let pct = 100.0 * (c - anchor) / anchor;
            assert!((row.pct_vs_centralized.unwrap() - pct).abs() < 1e-9);
            assert!(row.max_wave_messages <= sr.m * sr.m);
        }
        let svg = scenario_svg(sr, SolverKind::Distributed4).unwrap();
        assert_eq!(svg.matches(r#"class="robot""#).count(), sr.m);
    }
    let csv = report_csv(&report).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 1 + report.scenarios.iter().map(|s| s.rows.len()).sum::<usize>());
}

#[test]
fn batch_order_and_thread_count_do_not_matter() {
    let t = ScenarioTemplate::convex(3);
    let batch: Vec<_> = (10..14).map(|s| generate_random_scenario(&t, s).unwrap()).collect();
    let mut reversed = batch.clone();
    reversed.reverse();
    let a = report_json(&run_experiment(&batch)).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| report_json(&run_experiment(&reversed)).unwrap());
    assert_eq!(a, b);
}

#[test]
fn render_writes_requested_formats() {
    let s = generate_random_scenario(&ScenarioTemplate::desk(3), 1).unwrap();
    let report = run_experiment(&[s]);
    let dir = tempfile::tempdir().unwrap();
    let files = render_report(&report, dir.path(), &[Format::Csv, Format::Svg]).unwrap();
    let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["report.csv", "desk-1.svg"]);
}
