use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, NetsyncError, Result};
use crate::model::{PriorSpec, Topology};
use crate::rng::{derive_seed, rng_from_seed};

use super::{CdiMethod, CdiReport};

const WALKS_PER_CHUNK: usize = 4096;

/// Used when some agent has no absorption chance of its own.
const FALLBACK_MAX_STEPS: usize = 1_000_000;

/// Per-agent probability of absorption in one step, `(d_R + N_p)/(d + N_p)`.
fn absorption_probabilities(topology: &Topology, priors: &PriorSpec) -> Vec<f64> {
    (0..topology.n_agents())
        .map(|a| {
            let np = priors.n_p()[a];
            let d = topology.degree(a) as f64;
            (topology.reference_degree(a) as f64 + np) / (d + np)
        })
        .collect()
}

/// Monte Carlo CDI of `agent_i`: the mean number of returns of a walk that
/// is absorbed at references and, with probability `N_p/(d + N_p)` per
/// step, at the agent's virtual reference.
///
/// `max_steps` defaults to `10/p_min`, i.e. `10(d + N_p)/N_p` for the least
/// absorbing agent; walks reaching it are cut and counted, and the report's
/// `tail_bound` holds `(1 − p_min)^{M+1}/p_min`, a bound on the bias.
pub fn cdi_random_walk(
    topology: &Topology,
    priors: &PriorSpec,
    agent_i: usize,
    n_walks: usize,
    max_steps: Option<usize>,
    seed: u64,
) -> Result<CdiReport> {
    let n = topology.n_agents();
    if agent_i >= n {
        return Err(invalid(format!("agent {agent_i} does not exist")));
    }
    if n_walks == 0 {
        return Err(invalid("n_walks must be positive"));
    }
    if priors.len() != n {
        return Err(invalid("prior spec does not match the topology"));
    }
    if let Some(node) = (0..n).find(|&a| topology.degree(a) == 0 && priors.n_p()[a] == 0.0) {
        return Err(NetsyncError::DegenerateNode { node });
    }
    let p_min = absorption_probabilities(topology, priors)
        .into_iter()
        .fold(1.0_f64, f64::min);
    let max_steps = max_steps.unwrap_or(if p_min > 0.0 {
        (10.0 / p_min).ceil() as usize
    } else {
        FALLBACK_MAX_STEPS
    });
    let tail_bound = (p_min > 0.0).then(|| (1.0 - p_min).powf(max_steps as f64 + 1.0) / p_min);

    let chunks = n_walks.div_ceil(WALKS_PER_CHUNK);
    let partial: Vec<(f64, f64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_from_seed(derive_seed(seed, &[agent_i as u64, c as u64]));
            let count = WALKS_PER_CHUNK.min(n_walks - c * WALKS_PER_CHUNK);
            let (mut sum, mut sum_sq, mut cut) = (0.0, 0.0, 0u64);
            for _ in 0..count {
                let (returns, truncated) = one_walk(topology, priors, agent_i, max_steps, &mut rng);
                let r = returns as f64;
                sum += r;
                sum_sq += r * r;
                cut += truncated as u64;
            }
            (sum, sum_sq, cut)
        })
        .collect();
    let (sum, sum_sq, cut) = partial.iter().fold((0.0, 0.0, 0u64), |acc, p| {
        (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2)
    });
    let w = n_walks as f64;
    let mean = sum / w;
    let stderr = if n_walks > 1 {
        ((sum_sq - w * mean * mean).max(0.0) / (w - 1.0) / w).sqrt()
    } else {
        0.0
    };
    Ok(CdiReport {
        delta: vec![mean],
        method: CdiMethod::Walk,
        truncation_n: Some(max_steps),
        tail_bound,
        stderr: Some(vec![stderr]),
        truncated_walks: Some(cut),
    })
}

fn one_walk<R: Rng>(
    topology: &Topology,
    priors: &PriorSpec,
    start: usize,
    max_steps: usize,
    rng: &mut R,
) -> (u64, bool) {
    let n = topology.n_agents();
    let mut at = start;
    let mut returns = 0;
    for _ in 0..max_steps {
        let nbrs = topology.neighbors(at);
        let np = priors.n_p()[at];
        let u = rng.random::<f64>() * (nbrs.len() as f64 + np);
        if u < np {
            return (returns, false);
        }
        let next = nbrs[((u - np) as usize).min(nbrs.len() - 1)];
        if next >= n {
            return (returns, false);
        }
        at = next;
        if at == start {
            returns += 1;
        }
    }
    (returns, true)
}
