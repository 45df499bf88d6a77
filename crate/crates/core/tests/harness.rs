use std::fs;

use netsync_core::harness::{
    csv_path, run, run_with, ExperimentConfig, ExperimentId, SUMMARY_CELL,
};

fn tiny(id: ExperimentId) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(id);
    c.realizations = 4;
    match id {
        ExperimentId::LatticeCdi => {
            c.r_max = vec![2.0, 3.0];
            c.side_b = vec![8.0, 10.0];
            c.n_p = vec![0.1, 1.0];
        }
        ExperimentId::StochasticConvergence => {
            c.r_max = vec![2.0, 3.0];
            c.side_b = vec![6.0];
            c.realizations = 5;
        }
        _ => {
            c.n_agents = vec![30, 40, 50, 60];
            c.r_max = vec![20.0];
            c.intensity = 0.02;
            c.area = 900.0;
        }
    }
    c
}

#[test]
fn every_stderr_is_positive_with_several_samples() {
    for id in ExperimentId::ALL {
        let res = run(&tiny(id)).unwrap();
        assert!(!res.rows.is_empty(), "{id}");
        for row in &res.rows {
            if let Some(se) = row.stderr {
                if row.n_samples > 1 {
                    assert!(se > 0.0, "{id}: {row:?}");
                }
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for id in [
        ExperimentId::ExtendedAseb,
        ExperimentId::StochasticConvergence,
    ] {
        assert_eq!(run(&tiny(id)).unwrap(), run(&tiny(id)).unwrap(), "{id}");
    }
}

#[test]
fn interrupted_run_resumes_to_the_same_output() {
    let id = ExperimentId::DenseRseb;
    let config = tiny(id);
    let dir = tempfile::tempdir().unwrap();
    let full = run_with(&config, Some(dir.path()), |_, _| {}).unwrap();
    let csv = fs::read_to_string(csv_path(dir.path(), id)).unwrap();

    let mut seen = 0;
    run_with(&config, Some(dir.path()), |_, _| seen += 1).unwrap();
    assert_eq!(seen, 0, "a completed run recomputes nothing");

    let partial: String = csv
        .lines()
        .filter(|l| l.starts_with("cell,") || l.starts_with("0,"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(csv_path(dir.path(), id), partial).unwrap();
    let mut done = vec![];
    let resumed = run_with(&config, Some(dir.path()), |d, _| done.push(d)).unwrap();
    assert_eq!(done.len(), 3);
    assert_eq!(resumed, full);
    assert_eq!(fs::read_to_string(csv_path(dir.path(), id)).unwrap(), csv);
    assert!(full.rows.iter().any(|r| r.cell == SUMMARY_CELL));
}
