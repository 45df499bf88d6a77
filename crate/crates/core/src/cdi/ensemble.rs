use rayon::prelude::*;

use crate::bounds::factor_absolute;
use crate::error::{invalid, NetsyncError, Result};
use crate::fim::build_absolute_fim;
use crate::model::{gen_lattice, gen_stochastic, LinkModel, PriorSpec, Topology};
use crate::rng::derive_seed;
use crate::stats::Summary;

/// Consecutive disconnected draws tolerated for one snapshot.
pub const MAX_RESAMPLES: usize = 1000;

/// Per-agent CDI `Δ_ii = J_ii [J⁻¹]_ii − 1`.
fn cdi_vector(topology: &Topology, priors: &PriorSpec, link: &LinkModel) -> Result<Vec<f64>> {
    let fim = build_absolute_fim(topology, priors, link)?;
    let inv = factor_absolute(&fim)?.inverse_diagonal();
    Ok(fim
        .diagonal()
        .iter()
        .zip(&inv)
        .map(|(w, g)| w * g - 1.0)
        .collect())
}

/// Average CDI over all agents.
pub fn mean_cdi(topology: &Topology, priors: &PriorSpec, link: &LinkModel) -> Result<f64> {
    let d = cdi_vector(topology, priors, link)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// Binomial point process on `[0, side_b]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticParams {
    pub side_b: f64,
    pub intensity: f64,
    pub r_max: f64,
}

/// Ensemble mean with the number of discarded disconnected draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEstimate {
    pub summary: Summary,
    pub resamples: usize,
}

/// `E{tr((I − P)⁻¹)/N_a} − 1` over independent snapshots with a uniform
/// prior of `n_p` equivalent observations; disconnected snapshots are
/// redrawn from a fresh derived seed and counted.
pub fn expected_cdi_stochastic(
    params: StochasticParams,
    n_p: f64,
    snapshots: usize,
    seed: u64,
) -> Result<EnsembleEstimate> {
    if snapshots == 0 {
        return Err(invalid("snapshots must be at least 1"));
    }
    let link = LinkModel::unit();
    let draws = (0..snapshots)
        .into_par_iter()
        .map(|s| {
            let mut resamples = 0;
            let topo = connected_draw(params, seed, s as u64, &mut resamples)?;
            let priors = PriorSpec::uniform(topo.n_agents(), n_p, &link)?;
            Ok((mean_cdi(&topo, &priors, &link)?, resamples))
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = draws.iter().map(|d| d.0).collect();
    Ok(EnsembleEstimate {
        summary: Summary::of(&values)?,
        resamples: draws.iter().map(|d| d.1).sum(),
    })
}

fn connected_draw(
    params: StochasticParams,
    seed: u64,
    snapshot: u64,
    resamples: &mut usize,
) -> Result<Topology> {
    for attempt in 0..MAX_RESAMPLES as u64 {
        let topo = gen_stochastic(
            params.side_b,
            params.intensity,
            params.r_max,
            derive_seed(seed, &[snapshot, attempt]),
        )?;
        if topo.is_connected() {
            return Ok(topo);
        }
        *resamples += 1;
    }
    Err(NetsyncError::Disconnected { components: 0 })
}

/// CDI over a finite unit-spacing lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCdiProfile {
    pub delta: Vec<f64>,
    /// Agents at least `r_max` from the boundary.
    pub interior: Vec<usize>,
    pub mean_all: f64,
    pub mean_interior: f64,
}

pub fn lattice_cdi_profile(side_b: f64, r_max: f64, n_p: f64) -> Result<LatticeCdiProfile> {
    let link = LinkModel::unit();
    let topo = gen_lattice(side_b, 1.0, r_max)?;
    let priors = PriorSpec::uniform(topo.n_agents(), n_p, &link)?;
    let delta = cdi_vector(&topo, &priors, &link)?;
    let interior = topo.interior_agents();
    let mean_all = delta.iter().sum::<f64>() / delta.len() as f64;
    let mean_interior = if interior.is_empty() {
        f64::NAN
    } else {
        interior.iter().map(|&i| delta[i]).sum::<f64>() / interior.len() as f64
    };
    Ok(LatticeCdiProfile {
        delta,
        interior,
        mean_all,
        mean_interior,
    })
}

/// Average CDI of the lattice matched to a stochastic ensemble: unit
/// spacing, side `√λ·B` and range `√λ·R_max`.
pub fn matched_lattice_cdi(params: StochasticParams, n_p: f64) -> Result<f64> {
    let scale = params.intensity.sqrt();
    Ok(lattice_cdi_profile(params.side_b * scale, params.r_max * scale, n_p)?.mean_all)
}
