//! Benchmark fixtures.

use netsync_core::fim::{
    build_absolute_fim, build_relative_fim, build_transition_matrix, FimMatrix, TransitionMatrix,
};
use netsync_core::{gen_lattice, gen_stochastic, is_connected, LinkModel, PriorSpec, Topology};

/// Square lattice of `(side + 1)²` agents with uniform prior strength.
pub fn lattice(side: f64, r_max: f64, n_p: f64) -> (Topology, PriorSpec) {
    let t = gen_lattice(side, 1.0, r_max).expect("lattice parameters are valid");
    let p = PriorSpec::uniform(t.n_agents(), n_p, &LinkModel::unit()).expect("n_p is valid");
    (t, p)
}

/// First connected stochastic network found from `seed` upward.
pub fn stochastic(side: f64, intensity: f64, r_max: f64, seed: u64) -> Topology {
    (seed..)
        .map(|s| {
            gen_stochastic(side, intensity, r_max, s).expect("stochastic parameters are valid")
        })
        .find(is_connected)
        .expect("some seed yields a connected network")
}

pub fn absolute(t: &Topology, p: &PriorSpec) -> FimMatrix {
    build_absolute_fim(t, p, &LinkModel::unit()).expect("synchronizable fixture")
}

pub fn relative(t: &Topology) -> FimMatrix {
    build_relative_fim(t, &LinkModel::unit()).expect("non-empty fixture")
}

pub fn walk(fim: &FimMatrix) -> TransitionMatrix {
    build_transition_matrix(fim).expect("fixture has no degenerate nodes")
}
