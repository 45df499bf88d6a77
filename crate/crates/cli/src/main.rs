use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use netsync_core::bounds::{aseb_direct, bound_report};
use netsync_core::cdi::{
    cdi_exact, cdi_random_walk, cdi_series, infinite_lattice_cdi_asymptotic,
    infinite_lattice_cdi_numerical, AsymptoticForm, CdiReport, SERIES_CAP,
};
use netsync_core::fim::{
    build_absolute_fim, build_extended_fim, build_relative_fim, build_transition_matrix,
};
use netsync_core::harness::{self, ExperimentId};
use netsync_core::model::io::save_topology;
use netsync_core::rng::derive_seed;
use netsync_core::sim::{draw_clock_state, map_estimate, simulate_measurements};
use netsync_core::stats::Summary;

mod sections;

use sections::{
    CdiMethodName, CdiSection, FimKind, FimSection, LatticeCdiSection, Loaded, SimulateSection,
};

#[derive(Parser)]
#[command(
    name = "netsync",
    version,
    about = "Error bounds and dilution intensity for cooperative clock synchronization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(clap::Args)]
struct Common {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a topology from [network] and save it as CSV.
    Generate,
    /// Write the Fisher information matrix selected by [fim].
    Fim,
    /// Absolute and relative error bounds.
    Bounds,
    /// Cooperative dilution intensity per agent, method from [cdi].
    Cdi,
    /// Infinite-lattice CDI, numerical and asymptotic, over [lattice_cdi].
    LatticeCdi,
    /// MAP estimation trials compared with the absolute bound.
    Simulate,
    /// Run one of the registered experiments.
    Experiment {
        /// extended-rseb, extended-aseb, dense-rseb, dense-aseb, lattice-cdi or stochastic-convergence
        id: String,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(jobs) = cli.common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = Loaded::load(cli.common.config.as_deref(), cli.common.seed)?;
    let out = cli.common.out.as_path();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match cli.command {
        Command::Generate => generate(&cfg, out),
        Command::Fim => fim(&cfg, out),
        Command::Bounds => bounds(&cfg, out),
        Command::Cdi => cdi(&cfg, out),
        Command::LatticeCdi => lattice_cdi(&cfg, out),
        Command::Simulate => simulate(&cfg, out),
        Command::Experiment { id } => experiment(&cfg, out, &id, cli.common.seed),
    }
}

fn created(path: &Path) {
    eprintln!("wrote {}", path.display());
}

fn generate(cfg: &Loaded, out: &Path) -> Result<()> {
    let t = cfg.topology()?;
    let path = out.join("topology.csv");
    save_topology(&t, &path)?;
    created(&path);
    eprintln!(
        "{} agents, {} references, {} links, connected: {}",
        t.n_agents(),
        t.n_references(),
        t.edge_count(),
        t.is_connected()
    );
    Ok(())
}

fn fim(cfg: &Loaded, out: &Path) -> Result<()> {
    let link = cfg.link()?;
    let t = cfg.topology()?;
    let sec: FimSection = cfg.section_or_default("fim")?;
    let m = match sec.variant {
        FimKind::Absolute => build_absolute_fim(&t, &cfg.priors(&t, &link)?, &link)?,
        FimKind::Relative => build_relative_fim(&t, &link)?,
        FimKind::Extended => build_extended_fim(&t, &cfg.priors(&t, &link)?, &link, sec.xi_inf)?,
    };
    let path = out.join("fim.csv");
    m.write_csv(File::create(&path)?, sec.triplets)?;
    created(&path);
    Ok(())
}

fn bounds(cfg: &Loaded, out: &Path) -> Result<()> {
    let link = cfg.link()?;
    let t = cfg.topology()?;
    let report = bound_report(&t, &cfg.priors(&t, &link)?, &link)?;
    let path = out.join("bounds.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["statistic", "agent", "value"])?;
    for (i, v) in report.aseb.iter().enumerate() {
        w.write_record(["aseb", &i.to_string(), &v.to_string()])?;
    }
    let mean = report.aseb.iter().sum::<f64>() / report.aseb.len() as f64;
    w.write_record(["mean_aseb", "", &mean.to_string()])?;
    if let Some(r) = report.rseb {
        w.write_record(["rseb", "", &r.to_string()])?;
    }
    w.write_record([
        "max_method_deviation",
        "",
        &report.max_method_deviation.to_string(),
    ])?;
    if let Some(c) = report.condition_number {
        w.write_record(["condition_number", "", &c.to_string()])?;
    }
    w.flush()?;
    created(&path);
    eprintln!("method: {}", report.method);
    Ok(())
}

fn cdi(cfg: &Loaded, out: &Path) -> Result<()> {
    let link = cfg.link()?;
    let t = cfg.topology()?;
    let priors = cfg.priors(&t, &link)?;
    let sec: CdiSection = cfg.section_or_default("cdi")?;
    let (agents, report) = match sec.method {
        CdiMethodName::Exact | CdiMethodName::Series => {
            let tm = build_transition_matrix(&build_absolute_fim(&t, &priors, &link)?)?;
            let report = if sec.method == CdiMethodName::Exact {
                CdiReport::exact(cdi_exact(&tm)?)
            } else {
                cdi_series(&tm, sec.tol, sec.cap.unwrap_or(SERIES_CAP))?
            };
            ((0..t.n_agents()).collect::<Vec<_>>(), report)
        }
        CdiMethodName::Walk => walk_all(cfg, &t, &priors, &sec)?,
    };
    let path = out.join("cdi.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["agent", "delta", "stderr"])?;
    for (k, &a) in agents.iter().enumerate() {
        let se = report
            .stderr
            .as_ref()
            .map(|s| s[k].to_string())
            .unwrap_or_default();
        w.write_record([a.to_string(), report.delta[k].to_string(), se])?;
    }
    w.flush()?;
    created(&path);
    let mut meta = format!("method = \"{}\"\n", report.method.as_str());
    if let Some(n) = report.truncation_n {
        meta += &format!("truncation_n = {n}\n");
    }
    if let Some(b) = report.tail_bound {
        meta += &format!("tail_bound = {b:e}\n");
    }
    if let Some(n) = report.truncated_walks {
        meta += &format!("truncated_walks = {n}\n");
    }
    let meta_path = out.join("cdi.meta.toml");
    fs::write(&meta_path, meta)?;
    created(&meta_path);
    Ok(())
}

fn walk_all(
    cfg: &Loaded,
    t: &netsync_core::Topology,
    priors: &netsync_core::PriorSpec,
    sec: &CdiSection,
) -> Result<(Vec<usize>, CdiReport)> {
    let agents = sec
        .agents
        .clone()
        .unwrap_or_else(|| (0..t.n_agents()).collect());
    let mut merged: Option<CdiReport> = None;
    for &a in &agents {
        let r = cdi_random_walk(
            t,
            priors,
            a,
            sec.n_walks,
            sec.max_steps,
            derive_seed(cfg.seed, &[a as u64]),
        )?;
        match merged.as_mut() {
            None => merged = Some(r),
            Some(m) => {
                m.delta.extend(r.delta);
                if let (Some(s), Some(rs)) = (m.stderr.as_mut(), r.stderr) {
                    s.extend(rs);
                }
                m.truncated_walks =
                    Some(m.truncated_walks.unwrap_or(0) + r.truncated_walks.unwrap_or(0));
                m.tail_bound = match (m.tail_bound, r.tail_bound) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                };
            }
        }
    }
    match merged {
        Some(r) => Ok((agents, r)),
        None => bail!("no agents to walk from"),
    }
}

fn lattice_cdi(cfg: &Loaded, out: &Path) -> Result<()> {
    let sec: LatticeCdiSection = cfg.section_or_default("lattice_cdi")?;
    let path = out.join("lattice_cdi.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "r_max",
        "n_p",
        "numerical",
        "crossover_n",
        "asymptotic_full",
        "asymptotic_simplified",
    ])?;
    for &r in &sec.r_max {
        for &n_p in &sec.n_p {
            let num = infinite_lattice_cdi_numerical(r, n_p, sec.rel_err_tol)?;
            let full = infinite_lattice_cdi_asymptotic(r, n_p, AsymptoticForm::Full)?;
            let simple = infinite_lattice_cdi_asymptotic(r, n_p, AsymptoticForm::Simplified)?;
            w.write_record([
                r.to_string(),
                n_p.to_string(),
                num.delta.to_string(),
                num.crossover_n.to_string(),
                full.to_string(),
                simple.to_string(),
            ])?;
        }
    }
    w.flush()?;
    created(&path);
    Ok(())
}

fn simulate(cfg: &Loaded, out: &Path) -> Result<()> {
    let link = cfg.link()?;
    let t = cfg.topology()?;
    let priors = cfg.priors(&t, &link)?;
    let sec: SimulateSection = cfg.section_or_default("simulate")?;
    if sec.trials == 0 {
        bail!("[simulate] trials must be at least 1");
    }
    let aseb = aseb_direct(&build_absolute_fim(&t, &priors, &link)?)?;
    let na = t.n_agents();
    let path = out.join("simulate.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["trial", "agent", "error", "aseb", "ratio"])?;
    let mut errors = vec![Vec::with_capacity(sec.trials); na];
    for trial in 0..sec.trials as u64 {
        let clock = draw_clock_state(&priors, derive_seed(cfg.seed, &[trial, 0]));
        let m = simulate_measurements(&t, &clock, &link, derive_seed(cfg.seed, &[trial, 1]))?;
        let est = map_estimate(&t, &priors, &link, &m)?;
        for i in 0..na {
            let e = est[i] - clock.offsets[i];
            errors[i].push(e);
            w.write_record([
                trial.to_string(),
                i.to_string(),
                e.to_string(),
                aseb[i].to_string(),
                (e * e / aseb[i]).to_string(),
            ])?;
        }
    }
    w.flush()?;
    created(&path);

    let summary_path = out.join("simulate_summary.csv");
    let mut s = csv::Writer::from_path(&summary_path)?;
    s.write_record([
        "agent",
        "mean_error",
        "mean_error_stderr",
        "mse",
        "mse_stderr",
        "aseb",
        "mse_over_aseb",
    ])?;
    for i in 0..na {
        let e = Summary::of(&errors[i])?;
        let sq: Vec<f64> = errors[i].iter().map(|x| x * x).collect();
        let m = Summary::of(&sq)?;
        s.write_record([
            i.to_string(),
            e.mean.to_string(),
            e.stderr.to_string(),
            m.mean.to_string(),
            m.stderr.to_string(),
            aseb[i].to_string(),
            (m.mean / aseb[i]).to_string(),
        ])?;
    }
    s.flush()?;
    created(&summary_path);
    Ok(())
}

fn experiment(cfg: &Loaded, out: &Path, id: &str, seed: Option<u64>) -> Result<()> {
    let id: ExperimentId = id.parse()?;
    let config = cfg.file.experiment(id, seed)?;
    let result = harness::run_with(&config, Some(out), |done, total| {
        eprint!("\r{id}: {done}/{total} cells");
        let _ = std::io::stderr().flush();
    })?;
    eprintln!();
    created(&harness::csv_path(out, id));
    created(&harness::manifest_path(out, id));
    for row in result.summary_rows() {
        eprintln!("{}: {}", row.statistic, row.value);
    }
    Ok(())
}
