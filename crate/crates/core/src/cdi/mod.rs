//! Cooperative dilution intensity: exact, series, random-walk, lattice
//! and ensemble evaluations.

mod ensemble;
mod exact;
mod lattice;
mod walk;

pub use ensemble::{
    expected_cdi_stochastic, lattice_cdi_profile, matched_lattice_cdi, mean_cdi, EnsembleEstimate,
    LatticeCdiProfile, StochasticParams, MAX_RESAMPLES,
};
pub use exact::{cdi_exact, cdi_series, mean_rel_cdi, rel_cdi_exact, SERIES_CAP};
pub use lattice::{
    asymptotic_full, infinite_lattice_cdi_asymptotic, infinite_lattice_cdi_numerical,
    lattice_return_probability, lattice_walk_distribution, AsymptoticForm, InfiniteLatticeCdi,
    LatticeDistribution, LatticeKernel, CROSSOVER_RUN, MAX_CROSSOVER_STEPS, MAX_GRID_CELLS,
};
pub use walk::cdi_random_walk;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdiMethod {
    Exact,
    Series,
    Walk,
    Asymptotic,
}

impl CdiMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CdiMethod::Exact => "exact",
            CdiMethod::Series => "series",
            CdiMethod::Walk => "walk",
            CdiMethod::Asymptotic => "asymptotic",
        }
    }
}

/// Per-agent CDI values with the metadata of the method that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CdiReport {
    pub delta: Vec<f64>,
    pub method: CdiMethod,
    /// Series terms summed, or the walk step cap.
    pub truncation_n: Option<usize>,
    /// Bound on the neglected series tail or on the walk truncation bias.
    pub tail_bound: Option<f64>,
    /// Monte Carlo standard errors, one per entry of `delta`.
    pub stderr: Option<Vec<f64>>,
    /// Walks cut at the step cap.
    pub truncated_walks: Option<u64>,
}

impl CdiReport {
    pub fn exact(delta: Vec<f64>) -> Self {
        Self {
            delta,
            method: CdiMethod::Exact,
            truncation_n: None,
            tail_bound: None,
            stderr: None,
            truncated_walks: None,
        }
    }
}
