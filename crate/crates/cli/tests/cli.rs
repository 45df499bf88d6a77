use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const LATTICE: &str = r#"
master_seed = 5

[network]
kind = "lattice"
side_b = 3.0
r_max = 1.5

[priors]
scheme = "uniform"
n_p = 1.0

[cdi]
method = "walk"
agents = [0, 5]
n_walks = 2000

[simulate]
trials = 50

[lattice_cdi]
r_max = [2.0]
n_p = [1.0]

[experiment.dense-rseb]
n_agents = [40, 60, 80, 100]
r_max = [30.0]
realizations = 4
"#;

fn netsync(args: &[&str], dir: &Path) -> Output {
    let config = dir.join("netsync.toml");
    if !config.exists() {
        fs::write(&config, LATTICE).unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_netsync"))
        .args(args)
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn generate_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    ok(netsync(&["generate", "--out", o], dir.path()));
    let topo = read(out.join("topology.csv"));
    assert_eq!(topo.lines().count(), 1 + 16);
    ok(netsync(&["bounds", "--out", o], dir.path()));
    let b = read(out.join("bounds.csv"));
    assert!(b.starts_with("statistic,agent,value"));
    assert_eq!(b.lines().filter(|l| l.starts_with("aseb,")).count(), 16);
    assert!(b.contains("\nrseb,,"));
}

#[test]
fn fim_cdi_and_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();
    ok(netsync(&["fim", "--out", o], dir.path()));
    assert_eq!(read(Path::new(o).join("fim.csv")).lines().count(), 16);
    ok(netsync(&["cdi", "--out", o], dir.path()));
    let cdi = read(Path::new(o).join("cdi.csv"));
    assert_eq!(cdi.lines().count(), 3);
    assert!(read(Path::new(o).join("cdi.meta.toml")).contains("method = \"walk\""));
    ok(netsync(&["lattice-cdi", "--out", o], dir.path()));
    assert_eq!(
        read(Path::new(o).join("lattice_cdi.csv")).lines().count(),
        2
    );
}

#[test]
fn simulate_writes_trials_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    ok(netsync(
        &["simulate", "--out", o.to_str().unwrap(), "--jobs", "1"],
        dir.path(),
    ));
    assert_eq!(read(o.join("simulate.csv")).lines().count(), 1 + 50 * 16);
    assert_eq!(read(o.join("simulate_summary.csv")).lines().count(), 1 + 16);
}

#[test]
fn experiment_is_deterministic_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(netsync(
        &["experiment", "dense-rseb", "--out", a.to_str().unwrap()],
        dir.path(),
    ));
    ok(netsync(
        &["experiment", "dense-rseb", "--out", b.to_str().unwrap()],
        dir.path(),
    ));
    let csv = read(a.join("dense-rseb.csv"));
    assert_eq!(csv, read(b.join("dense-rseb.csv")));
    assert!(csv.contains("summary,,30.0,,,,fit_loglog_slope"), "{csv}");
    assert!(read(a.join("dense-rseb.manifest.toml")).contains("cells_completed = 4"));

    // Rerunning a completed run changes nothing.
    ok(netsync(
        &["experiment", "dense-rseb", "--out", a.to_str().unwrap()],
        dir.path(),
    ));
    assert_eq!(read(a.join("dense-rseb.csv")), csv);

    // Dropping the last two cells resumes from the first missing one.
    let partial: String = csv
        .lines()
        .filter(|l| l.starts_with("cell,") || l.starts_with("0,") || l.starts_with("1,"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(b.join("dense-rseb.csv"), partial).unwrap();
    ok(netsync(
        &["experiment", "dense-rseb", "--out", b.to_str().unwrap()],
        dir.path(),
    ));
    assert_eq!(read(b.join("dense-rseb.csv")), csv);

    // A different seed is refused in an existing output directory.
    let clash = netsync(
        &[
            "experiment",
            "dense-rseb",
            "--out",
            a.to_str().unwrap(),
            "--seed",
            "6",
        ],
        dir.path(),
    );
    assert!(!clash.status.success());
}

#[test]
fn unknown_experiment_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = netsync(
        &["experiment", "nope", "--out", dir.path().to_str().unwrap()],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}
