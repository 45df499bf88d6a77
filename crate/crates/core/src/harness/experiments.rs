use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::{aseb_direct, rseb_grounded, unreachable_agents};
use crate::cdi::{
    expected_cdi_stochastic, infinite_lattice_cdi_asymptotic, infinite_lattice_cdi_numerical,
    lattice_cdi_profile, matched_lattice_cdi, AsymptoticForm, StochasticParams, MAX_RESAMPLES,
};
use crate::error::{NetsyncError, Result};
use crate::fim::{build_absolute_fim, build_relative_fim};
use crate::model::{
    assign_priors, gen_scaling_family, LinkModel, PriorScheme, ScalingMode, Topology,
};
use crate::rng::derive_seed;
use crate::stats::{LinearFit, Summary};

use super::config::{ExperimentConfig, ExperimentId};
use super::output::{
    load_previous, save_manifest, save_result, CellParams, ExperimentResult, Manifest, ResultRow,
    SUMMARY_CELL,
};

/// Fewest grid points a trend fit is attempted on.
pub const MIN_FIT_POINTS: usize = 4;

/// Seed-path tag separating prior draws from topology draws.
const PRIOR_STREAM: u64 = 1 << 32;

const SEED_SCHEME: &str =
    "derive_seed(master, [experiment, grid indices..., realization, attempt])";

/// One point of an experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub params: CellParams,
    /// Grid indices feeding the seed path. Parameters that only change the
    /// statistic (p_a, n_p) are left out so that their cells share draws.
    seed_path: Vec<u64>,
    kind: CellKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellKind {
    Scaling,
    InfiniteLattice,
    FiniteLattice,
    Stochastic,
}

fn tag(id: ExperimentId) -> u64 {
    ExperimentId::ALL.iter().position(|x| *x == id).unwrap() as u64
}

/// The grid of `config` in emission order.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    let mut push = |params: CellParams, seed_path: Vec<u64>, kind: CellKind| {
        let index = out.len();
        out.push(Cell {
            index,
            params,
            seed_path,
            kind,
        });
    };
    match config.id {
        ExperimentId::ExtendedRseb | ExperimentId::DenseRseb => {
            for (ri, &r) in config.r_max.iter().enumerate() {
                for (ni, &n) in config.n_agents.iter().enumerate() {
                    let params = CellParams {
                        n_agents: Some(n),
                        r_max: Some(r),
                        ..Default::default()
                    };
                    push(params, vec![ri as u64, ni as u64], CellKind::Scaling);
                }
            }
        }
        ExperimentId::ExtendedAseb | ExperimentId::DenseAseb => {
            for (ri, &r) in config.r_max.iter().enumerate() {
                for &n_p in &config.n_p {
                    for &p_a in &config.p_a {
                        for (ni, &n) in config.n_agents.iter().enumerate() {
                            let params = CellParams {
                                n_agents: Some(n),
                                r_max: Some(r),
                                n_p: Some(n_p),
                                p_a: Some(p_a),
                                side_b: None,
                            };
                            push(params, vec![ri as u64, ni as u64], CellKind::Scaling);
                        }
                    }
                }
            }
        }
        ExperimentId::LatticeCdi => {
            for &r in &config.r_max {
                for n_p in lattice_n_p(config) {
                    let params = CellParams {
                        r_max: Some(r),
                        n_p: Some(n_p),
                        ..Default::default()
                    };
                    push(params, vec![], CellKind::InfiniteLattice);
                }
            }
            for &b in &config.side_b {
                for &r in &config.r_max {
                    let params = CellParams {
                        r_max: Some(r),
                        n_p: Some(config.finite_n_p),
                        side_b: Some(b),
                        ..Default::default()
                    };
                    push(params, vec![], CellKind::FiniteLattice);
                }
            }
        }
        ExperimentId::StochasticConvergence => {
            for (bi, &b) in config.side_b.iter().enumerate() {
                for (ri, &r) in config.r_max.iter().enumerate() {
                    for &n_p in &config.n_p {
                        let params = CellParams {
                            r_max: Some(r),
                            n_p: Some(n_p),
                            side_b: Some(b),
                            ..Default::default()
                        };
                        push(params, vec![bi as u64, ri as u64], CellKind::Stochastic);
                    }
                }
            }
        }
    }
    out
}

/// Infinite-lattice prior strengths: the sweep plus the finite-lattice one.
fn lattice_n_p(config: &ExperimentConfig) -> Vec<f64> {
    let mut v = config.n_p.clone();
    if !v.contains(&config.finite_n_p) {
        v.push(config.finite_n_p);
    }
    v
}

fn scaling_mode(config: &ExperimentConfig) -> ScalingMode {
    match config.id {
        ExperimentId::DenseRseb | ExperimentId::DenseAseb => {
            ScalingMode::Dense { area: config.area }
        }
        _ => ScalingMode::Extended {
            intensity: config.intensity,
        },
    }
}

/// A connected draw from the scaling family, with the number of rejected
/// disconnected draws.
fn connected_scaling_draw(
    mode: ScalingMode,
    n: usize,
    r: f64,
    seed: u64,
    path: &[u64],
) -> Result<(Topology, usize)> {
    let mut full = path.to_vec();
    full.push(0);
    for attempt in 0..MAX_RESAMPLES {
        *full.last_mut().unwrap() = attempt as u64;
        let topo = gen_scaling_family(mode, n, r, derive_seed(seed, &full))?;
        if topo.is_connected() {
            return Ok((topo, attempt));
        }
    }
    Err(NetsyncError::Disconnected { components: 0 })
}

fn run_cell(config: &ExperimentConfig, cell: &Cell, link: &LinkModel) -> Result<Vec<ResultRow>> {
    let p = cell.params;
    let label = cell.index.to_string();
    let base: Vec<u64> = std::iter::once(tag(config.id))
        .chain(cell.seed_path.iter().copied())
        .collect();
    match cell.kind {
        CellKind::Scaling => {
            let mode = scaling_mode(config);
            let n = p.n_agents.unwrap();
            let r = p.r_max.unwrap();
            let relative = matches!(
                config.id,
                ExperimentId::ExtendedRseb | ExperimentId::DenseRseb
            );
            if !relative && p.p_a == Some(0.0) {
                return Err(NetsyncError::NotSynchronizable {
                    unreachable: (0..n).collect(),
                });
            }
            let draws = (0..config.realizations)
                .into_par_iter()
                .map(|k| {
                    let mut path = base.clone();
                    path.push(k as u64);
                    let (topo, resamples) =
                        connected_scaling_draw(mode, n, r, config.master_seed, &path)?;
                    if relative {
                        let fim = build_relative_fim(&topo, link)?;
                        return Ok((rseb_grounded(&fim)?.rseb.rseb(), resamples));
                    }
                    let (value, prior_resamples) =
                        mean_aseb(&topo, link, p, config.master_seed, &path)?;
                    Ok((value, resamples + prior_resamples))
                })
                .collect::<Result<Vec<_>>>()?;
            let values: Vec<f64> = draws.iter().map(|d| d.0).collect();
            let s = Summary::of(&values)?;
            let name = if relative { "rseb" } else { "mean_aseb" };
            let mut row = p.row(&label, name, s.mean, Some(s.stderr), s.n);
            row.resample_count = draws.iter().map(|d| d.1).sum();
            Ok(vec![row])
        }
        CellKind::InfiniteLattice => {
            let r = p.r_max.unwrap();
            let n_p = p.n_p.unwrap();
            let num = infinite_lattice_cdi_numerical(r, n_p, config.rel_err_tol)?;
            let full = infinite_lattice_cdi_asymptotic(r, n_p, AsymptoticForm::Full)?;
            let simple = infinite_lattice_cdi_asymptotic(r, n_p, AsymptoticForm::Simplified)?;
            let row = |name: &str, v: f64| p.row(&label, name, v, Some(0.0), 1);
            Ok(vec![
                row("numerical", num.delta),
                row("crossover_n", num.crossover_n as f64),
                row("asymptotic_full", full),
                row("asymptotic_simplified", simple),
                row("rel_discrepancy_full", (num.delta - full).abs() / num.delta),
                row(
                    "rel_discrepancy_simplified",
                    (num.delta - simple).abs() / num.delta,
                ),
            ])
        }
        CellKind::FiniteLattice => {
            let prof = lattice_cdi_profile(p.side_b.unwrap(), p.r_max.unwrap(), p.n_p.unwrap())?;
            Ok(vec![
                p.row(&label, "interior_mean", prof.mean_interior, Some(0.0), 1),
                p.row(&label, "all_mean", prof.mean_all, Some(0.0), 1),
            ])
        }
        CellKind::Stochastic => {
            let params = StochasticParams {
                side_b: p.side_b.unwrap(),
                intensity: config.intensity,
                r_max: p.r_max.unwrap(),
            };
            let n_p = p.n_p.unwrap();
            let est = expected_cdi_stochastic(
                params,
                n_p,
                config.realizations,
                derive_seed(config.master_seed, &base),
            )?;
            let lattice = matched_lattice_cdi(params, n_p)?;
            let s = est.summary;
            let mut mean = p.row(&label, "stochastic_mean", s.mean, Some(s.stderr), s.n);
            mean.resample_count = est.resamples;
            let mut gap = p.row(
                &label,
                "relative_gap",
                (s.mean - lattice) / lattice,
                Some(s.stderr / lattice),
                s.n,
            );
            gap.resample_count = est.resamples;
            Ok(vec![
                mean,
                p.row(&label, "matched_lattice", lattice, Some(0.0), 1),
                gap,
            ])
        }
    }
}

/// Mean ASEB over agents with Bernoulli priors; prior sets leaving every
/// agent uninformed are redrawn and counted.
fn mean_aseb(
    topo: &Topology,
    link: &LinkModel,
    p: CellParams,
    seed: u64,
    path: &[u64],
) -> Result<(f64, usize)> {
    let mut prior_path = path.to_vec();
    prior_path.push(PRIOR_STREAM);
    prior_path.push(0);
    let mut last = Vec::new();
    for attempt in 0..MAX_RESAMPLES {
        *prior_path.last_mut().unwrap() = attempt as u64;
        let scheme = PriorScheme::Bernoulli {
            p_a: p.p_a.unwrap(),
            n_p: p.n_p.unwrap(),
            seed: derive_seed(seed, &prior_path),
        };
        let priors = assign_priors(topo, &scheme, link)?;
        last = unreachable_agents(topo, &priors);
        if last.is_empty() {
            let aseb = aseb_direct(&build_absolute_fim(topo, &priors, link)?)?;
            return Ok((aseb.iter().sum::<f64>() / aseb.len() as f64, attempt));
        }
    }
    Err(NetsyncError::NotSynchronizable { unreachable: last })
}

/// Rows of `name` grouped by every parameter except `n_agents`, each group
/// ordered by `n_agents`.
fn series_by_n<'a>(rows: &'a [ResultRow], name: &str) -> Vec<(CellParams, Vec<&'a ResultRow>)> {
    let mut groups: Vec<(CellParams, Vec<&ResultRow>)> = Vec::new();
    for row in rows.iter().filter(|r| r.statistic == name) {
        let key = CellParams {
            n_agents: None,
            r_max: row.r_max,
            n_p: row.n_p,
            p_a: row.p_a,
            side_b: row.side_b,
        };
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    for g in &mut groups {
        g.1.sort_by_key(|r| r.n_agents);
    }
    groups
}

fn fit_rows(key: CellParams, prefix: &str, x: &[f64], y: &[f64]) -> Result<Vec<ResultRow>> {
    if x.len() < MIN_FIT_POINTS {
        return Ok(vec![]);
    }
    let fit = LinearFit::fit(x, y)?;
    let n = x.len();
    Ok(vec![
        key.row(
            SUMMARY_CELL,
            &format!("{prefix}_slope"),
            fit.slope,
            Some(fit.slope_stderr),
            n,
        ),
        key.row(
            SUMMARY_CELL,
            &format!("{prefix}_intercept"),
            fit.intercept,
            None,
            n,
        ),
        key.row(SUMMARY_CELL, &format!("{prefix}_r2"), fit.r2, None, n),
    ])
}

/// Points used for the large-N logarithmic fit: the upper half of the
/// grid, or the whole grid when the upper half is too short to fit.
pub fn upper_half<T: Clone>(points: &[T]) -> Vec<T> {
    let upper = &points[points.len() / 2..];
    if upper.len() >= MIN_FIT_POINTS {
        upper.to_vec()
    } else {
        points.to_vec()
    }
}

/// Grid-wide rows derived from the per-cell rows.
fn summarize(config: &ExperimentConfig, rows: &[ResultRow]) -> Result<Vec<ResultRow>> {
    let mut out = Vec::new();
    match config.id {
        ExperimentId::ExtendedRseb => {
            for (key, series) in series_by_n(rows, "rseb") {
                let pts = upper_half(&series);
                let x: Vec<f64> = pts
                    .iter()
                    .map(|r| (r.n_agents.unwrap() as f64).ln())
                    .collect();
                let y: Vec<f64> = pts.iter().map(|r| r.value).collect();
                out.extend(fit_rows(key, "fit_ln", &x, &y)?);
            }
        }
        ExperimentId::DenseRseb | ExperimentId::DenseAseb => {
            let name = if config.id == ExperimentId::DenseRseb {
                "rseb"
            } else {
                "mean_aseb"
            };
            for (key, series) in series_by_n(rows, name) {
                let x: Vec<f64> = series
                    .iter()
                    .map(|r| (r.n_agents.unwrap() as f64).ln())
                    .collect();
                let y: Vec<f64> = series.iter().map(|r| r.value.ln()).collect();
                out.extend(fit_rows(key, "fit_loglog", &x, &y)?);
            }
        }
        ExperimentId::ExtendedAseb => {
            for (key, series) in series_by_n(rows, "mean_aseb") {
                if let [.., a, b] = series.as_slice() {
                    let rel = (b.value - a.value).abs() / a.value;
                    let ratio = b.value / a.value;
                    let se = (b.stderr.unwrap_or(0.0).powi(2)
                        + (ratio * a.stderr.unwrap_or(0.0)).powi(2))
                    .sqrt()
                        / a.value;
                    out.push(key.row(
                        SUMMARY_CELL,
                        "plateau_rel_change",
                        rel,
                        Some(se),
                        b.n_samples,
                    ));
                }
            }
        }
        ExperimentId::LatticeCdi => {
            let infinite: BTreeMap<u64, f64> = rows
                .iter()
                .filter(|r| r.statistic == "numerical" && r.n_p == Some(config.finite_n_p))
                .map(|r| (r.r_max.unwrap().to_bits(), r.value))
                .collect();
            for row in rows.iter().filter(|r| r.statistic == "interior_mean") {
                if let Some(&inf) = infinite.get(&row.r_max.unwrap().to_bits()) {
                    let key = CellParams {
                        n_agents: None,
                        r_max: row.r_max,
                        n_p: row.n_p,
                        p_a: None,
                        side_b: row.side_b,
                    };
                    out.push(key.row(
                        SUMMARY_CELL,
                        "finite_minus_infinite",
                        row.value - inf,
                        Some(0.0),
                        1,
                    ));
                }
            }
        }
        ExperimentId::StochasticConvergence => {}
    }
    Ok(out)
}

fn assemble(by_cell: &BTreeMap<usize, Vec<ResultRow>>) -> Vec<ResultRow> {
    by_cell.values().flatten().cloned().collect()
}

/// Runs every cell of `config` in memory.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_with(config, None, |_, _| {})
}

/// Runs the cells of `config` in grid order. With an output directory the
/// CSV and manifest are rewritten after every cell, and cells already
/// present in a matching earlier run are skipped. `on_cell` is called
/// with (completed, total) after each cell.
pub fn run_with(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    mut on_cell: impl FnMut(usize, usize),
) -> Result<ExperimentResult> {
    config.validate()?;
    let link = config.link()?;
    let grid = cells(config);
    let start = Instant::now();
    let mut by_cell: BTreeMap<usize, Vec<ResultRow>> = BTreeMap::new();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        for row in load_previous(dir, config)?.rows {
            if let Ok(i) = row.cell.parse::<usize>() {
                if i < grid.len() {
                    by_cell.entry(i).or_default().push(row);
                }
            }
        }
    }
    let echo = config.echo();
    let persist =
        |by_cell: &BTreeMap<usize, Vec<ResultRow>>, summary: Vec<ResultRow>| -> Result<()> {
            if let Some(dir) = out_dir {
                let mut rows = assemble(by_cell);
                rows.extend(summary);
                save_result(dir, config.id, &ExperimentResult { rows })?;
                let manifest = Manifest {
                    experiment: config.id.as_str(),
                    version: env!("CARGO_PKG_VERSION"),
                    master_seed: config.master_seed,
                    seed_scheme: SEED_SCHEME,
                    cells_total: grid.len(),
                    cells_completed: by_cell.len(),
                    wall_time_s: start.elapsed().as_secs_f64(),
                    config: echo.clone(),
                };
                save_manifest(dir, config.id, &manifest)?;
            }
            Ok(())
        };
    for cell in &grid {
        if by_cell.contains_key(&cell.index) {
            continue;
        }
        let rows = run_cell(config, cell, &link)?;
        by_cell.insert(cell.index, rows);
        persist(&by_cell, vec![])?;
        on_cell(by_cell.len(), grid.len());
    }
    let mut rows = assemble(&by_cell);
    let summary = summarize(config, &rows)?;
    persist(&by_cell, summary.clone())?;
    rows.extend(summary);
    Ok(ExperimentResult { rows })
}

pub fn run_extended_rseb(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_id(config, &[ExperimentId::ExtendedRseb])?;
    run(config)
}

pub fn run_extended_aseb(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_id(config, &[ExperimentId::ExtendedAseb])?;
    run(config)
}

pub fn run_dense_scaling(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_id(config, &[ExperimentId::DenseRseb, ExperimentId::DenseAseb])?;
    run(config)
}

pub fn run_lattice_cdi_study(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_id(config, &[ExperimentId::LatticeCdi])?;
    run(config)
}

pub fn run_stochastic_convergence(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_id(config, &[ExperimentId::StochasticConvergence])?;
    run(config)
}

fn expect_id(config: &ExperimentConfig, ids: &[ExperimentId]) -> Result<()> {
    if ids.contains(&config.id) {
        Ok(())
    } else {
        Err(NetsyncError::InvalidParameter(format!(
            "config is for experiment {}",
            config.id
        )))
    }
}
