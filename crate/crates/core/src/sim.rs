//! Two-way timing measurements and the MAP and relative estimators.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::bounds::{factor_absolute, Grounded};
use crate::error::{invalid, Result};
use crate::fim::{apply_skew, build_absolute_fim, build_relative_fim, SkewSpec};
use crate::model::{LinkModel, PriorSpec, Topology};
use crate::rng::rng_from_seed;

/// Half-width of the uniform draw used for agents without a prior.
pub const FLAT_PRIOR_HALF_WIDTH: f64 = 1e3;

/// True clock offsets and skews of the agents. References have zero
/// offset and unit skew.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockState {
    pub offsets: Vec<f64>,
    pub skews: Vec<f64>,
}

impl ClockState {
    pub fn new(offsets: Vec<f64>, skews: Vec<f64>) -> Result<Self> {
        if offsets.len() != skews.len() {
            return Err(invalid("offset and skew vectors differ in length"));
        }
        SkewSpec::new(skews.clone())?;
        Ok(Self { offsets, skews })
    }

    /// Offsets with unit skews.
    pub fn offsets_only(offsets: Vec<f64>) -> Self {
        let n = offsets.len();
        Self {
            offsets,
            skews: vec![1.0; n],
        }
    }

    /// Offset expressed in the agent's own clock rate, `θ_i / α_i`.
    fn scaled(&self, i: usize) -> f64 {
        self.offsets[i] / self.skews[i]
    }
}

/// Offsets drawn from independent zero-mean Gaussian priors of variance
/// `1/ξ_P,i`; agents without a prior get a wide uniform draw.
pub fn draw_clock_state(priors: &PriorSpec, seed: u64) -> ClockState {
    let mut rng = rng_from_seed(seed);
    ClockState::offsets_only(draw_offsets(priors, &mut rng))
}

fn draw_offsets<R: Rng>(priors: &PriorSpec, rng: &mut R) -> Vec<f64> {
    priors
        .xi_p()
        .iter()
        .map(|&xi| {
            if xi > 0.0 {
                rng.sample::<f64, _>(rand_distr::StandardNormal) / xi.sqrt()
            } else {
                rng.random_range(-FLAT_PRIOR_HALF_WIDTH..FLAT_PRIOR_HALF_WIDTH)
            }
        })
        .collect()
}

/// Observations per unordered link `(i, j)`, `i < j`, of
/// `τ = 2(θ_j/α_j − θ_i/α_i) + ν` with `ν ~ N(0, 2σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub edges: Vec<(usize, usize)>,
    pub observations: Vec<Vec<f64>>,
    /// Known agent skews used when the data were generated.
    pub skews: Vec<f64>,
}

impl MeasurementSet {
    /// Sample mean of each link.
    pub fn link_means(&self) -> Vec<f64> {
        self.observations
            .iter()
            .map(|o| o.iter().sum::<f64>() / o.len() as f64)
            .collect()
    }
}

pub fn simulate_measurements(
    topology: &Topology,
    clock: &ClockState,
    link: &LinkModel,
    seed: u64,
) -> Result<MeasurementSet> {
    let mut rng = rng_from_seed(seed);
    simulate_with(topology, clock, link, &mut rng)
}

fn simulate_with<R: Rng>(
    topology: &Topology,
    clock: &ClockState,
    link: &LinkModel,
    rng: &mut R,
) -> Result<MeasurementSet> {
    let na = topology.n_agents();
    if clock.offsets.len() != na {
        return Err(invalid("clock state does not match the topology"));
    }
    let noise = Normal::new(0.0, (2.0 * link.sigma2).sqrt()).map_err(|e| invalid(e.to_string()))?;
    let value = |i: usize| if i < na { clock.scaled(i) } else { 0.0 };
    let edges: Vec<(usize, usize)> = topology.edges().filter(|&(i, _)| i < na).collect();
    let observations = edges
        .iter()
        .map(|&(i, j)| {
            let mean = 2.0 * (value(j) - value(i));
            (0..link.n_rounds)
                .map(|_| mean + noise.sample(rng))
                .collect()
        })
        .collect();
    Ok(MeasurementSet {
        edges,
        observations,
        skews: clock.skews.clone(),
    })
}

/// Right-hand side `b` of the normal equations in skew-scaled units: each
/// link adds `±(γ/2)τ̄` to its endpoints.
fn normal_rhs(
    n_agents: usize,
    link: &LinkModel,
    m: &MeasurementSet,
    agents_only: bool,
) -> Vec<f64> {
    let mut b = vec![0.0; n_agents];
    let half = link.gamma() / 2.0;
    for (&(i, j), t) in m.edges.iter().zip(m.link_means()) {
        if j < n_agents {
            b[j] += half * t;
            b[i] -= half * t;
        } else if !agents_only {
            b[i] -= half * t;
        }
    }
    b
}

/// Posterior mode of the offsets under Gaussian priors: `J θ̂ = b` with
/// known skews folded in through `B⁻¹ J B⁻¹`.
pub fn map_estimate(
    topology: &Topology,
    priors: &PriorSpec,
    link: &LinkModel,
    measurements: &MeasurementSet,
) -> Result<Vec<f64>> {
    let na = topology.n_agents();
    if measurements.skews.len() != na {
        return Err(invalid("measurement skews do not match the topology"));
    }
    let skews = SkewSpec::new(measurements.skews.clone())?;
    let unit = build_absolute_fim(
        topology,
        &prior_in_scaled_units(priors, &skews, link)?,
        link,
    )?;
    let fim = apply_skew(&unit, &skews)?;
    let factor = factor_absolute(&fim)?;
    let b: Vec<f64> = normal_rhs(na, link, measurements, false)
        .iter()
        .zip(skews.alphas())
        .map(|(v, a)| v / a)
        .collect();
    Ok(factor.solve(&b))
}

/// Priors on `θ` correspond to priors on `θ/α` scaled by `α²`.
fn prior_in_scaled_units(
    priors: &PriorSpec,
    skews: &SkewSpec,
    link: &LinkModel,
) -> Result<PriorSpec> {
    let xi = priors
        .xi_p()
        .iter()
        .zip(skews.alphas())
        .map(|(x, a)| x * a * a)
        .collect();
    PriorSpec::from_xi(xi, link)
}

/// Relative estimate with its alignment to the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeEstimate {
    pub estimates: Vec<f64>,
    /// Common shift minimizing `Σ(θ̂_i − θ_i − t)²`.
    pub t_star: f64,
    /// `Σ_i (θ̂_i − θ_i − t*)²`.
    pub sum_sq_error: f64,
    /// `sum_sq_error / N_a`, comparable with the RSEB.
    pub relative_mse: f64,
}

/// `θ̂ = J† b` over agent-to-agent links, aligned to `true_offsets` by the
/// optimal common shift.
pub fn relative_estimate(
    topology: &Topology,
    link: &LinkModel,
    measurements: &MeasurementSet,
    true_offsets: &[f64],
) -> Result<RelativeEstimate> {
    let na = topology.n_agents();
    if true_offsets.len() != na {
        return Err(invalid("true offsets do not match the topology"));
    }
    let fim = build_relative_fim(topology, link)?;
    let b = normal_rhs(na, link, measurements, true);
    let x = if na == 1 {
        vec![0.0]
    } else {
        Grounded::new(&fim.to_sparse(), fim.positions())?.apply(&b)
    };
    let mean_x = x.iter().sum::<f64>() / na as f64;
    let estimates: Vec<f64> = x.iter().map(|v| v - mean_x).collect();
    let t_star = estimates
        .iter()
        .zip(true_offsets)
        .map(|(e, t)| e - t)
        .sum::<f64>()
        / na as f64;
    let sum_sq_error: f64 = estimates
        .iter()
        .zip(true_offsets)
        .map(|(e, t)| (e - t - t_star).powi(2))
        .sum();
    Ok(RelativeEstimate {
        estimates,
        t_star,
        sum_sq_error,
        relative_mse: sum_sq_error / na as f64,
    })
}

/// Per-agent error moments of the MAP estimator over repeated trials.
#[derive(Debug, Clone, PartialEq)]
pub struct MapTrials {
    pub mean_error: Vec<f64>,
    pub mse: Vec<f64>,
    pub mse_stderr: Vec<f64>,
    pub trials: usize,
}

/// Draws offsets from the priors and fresh measurements in every trial,
/// then records the MAP error of each agent. Trials run from one seeded
/// stream, so results are reproducible.
pub fn map_trials(
    topology: &Topology,
    priors: &PriorSpec,
    link: &LinkModel,
    trials: usize,
    seed: u64,
) -> Result<MapTrials> {
    let na = topology.n_agents();
    let fim = build_absolute_fim(topology, priors, link)?;
    let factor = factor_absolute(&fim)?;
    let mut rng = rng_from_seed(seed);
    let mut sum = vec![0.0; na];
    let mut sq = vec![0.0; na];
    let mut quad = vec![0.0; na];
    for _ in 0..trials {
        let clock = ClockState::offsets_only(draw_offsets(priors, &mut rng));
        let m = simulate_with(topology, &clock, link, &mut rng)?;
        let est = factor.solve(&normal_rhs(na, link, &m, false));
        for i in 0..na {
            let e = est[i] - clock.offsets[i];
            sum[i] += e;
            sq[i] += e * e;
            quad[i] += e.powi(4);
        }
    }
    let t = trials as f64;
    let mse: Vec<f64> = sq.iter().map(|s| s / t).collect();
    let mse_stderr = (0..na)
        .map(|i| ((quad[i] / t - mse[i] * mse[i]).max(0.0) / (t - 1.0).max(1.0)).sqrt())
        .collect();
    Ok(MapTrials {
        mean_error: sum.iter().map(|s| s / t).collect(),
        mse,
        mse_stderr,
        trials,
    })
}

/// Mean relative squared error over repeated trials with fixed offsets.
pub fn relative_trials(
    topology: &Topology,
    link: &LinkModel,
    true_offsets: &[f64],
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let clock = ClockState::offsets_only(true_offsets.to_vec());
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(trials);
    for _ in 0..trials {
        let m = simulate_with(topology, &clock, link, &mut rng)?;
        values.push(relative_estimate(topology, link, &m, true_offsets)?.sum_sq_error);
    }
    let s = crate::stats::Summary::of(&values)?;
    Ok((s.mean, s.stderr))
}
