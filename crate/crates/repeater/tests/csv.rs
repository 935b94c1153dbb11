use repeater::config::ExperimentConfig;
use repeater::experiments::{run_distance_optimization, run_lambda_sweep, run_one_shot};
use repeater::output::SweepResult;

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    for (k, v) in [
        ("sweep.links", "2,3"),
        ("chain.total_length_km", "60"),
        ("workload.lambda_grid", "log:10:20000:7"),
        ("engine", "both"),
        ("sim.requests", "20000"),
        ("sim.trials", "20000"),
        ("optimize.distance_km", "100,400"),
        ("optimize.nodes_max", "20"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg
}

#[test]
fn csv_round_trips() {
    let cfg = small();
    for result in [
        run_lambda_sweep(&cfg).unwrap(),
        run_distance_optimization(&cfg).unwrap(),
        run_one_shot(&cfg).unwrap(),
    ] {
        let text = result.to_csv_string();
        let back = SweepResult::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, result);
        assert_eq!(back.to_csv_string(), text);
    }
}

#[test]
fn both_engines_fill_both_columns() {
    let r = run_lambda_sweep(&small()).unwrap();
    assert_eq!(r.rows.len(), 2 * 2 * 7);
    for row in &r.rows {
        assert!(row.fidelity_analytic.is_some() && row.fidelity_sim.is_some());
        assert!(row.skr_analytic.is_some() && row.skr_sim.is_some());
        let (lo, hi, m) = (
            row.ci_low.unwrap(),
            row.ci_high.unwrap(),
            row.fidelity_sim.unwrap(),
        );
        assert!(lo <= m && m <= hi);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = small();
    assert_eq!(
        run_lambda_sweep(&cfg).unwrap().to_csv_string(),
        run_lambda_sweep(&cfg).unwrap().to_csv_string()
    );
}

#[test]
fn rejects_foreign_header() {
    assert!(SweepResult::read_csv("a,b\n1,2\n".as_bytes()).is_err());
}
