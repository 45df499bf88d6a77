//! Network topologies, prior assignment and link parameters.

mod generators;
pub mod io;
mod link;
mod priors;
mod topology;

pub use generators::{
    gauss_circle_degree, gen_lattice, gen_scaling_family, gen_stochastic, lattice_neighbor_count,
    ScalingMode,
};
pub use link::LinkModel;
pub use priors::{assign_priors, PriorScheme, PriorSpec};
pub use topology::{NodeKind, Position, Provenance, Rect, Topology};

/// Breadth-first connectivity check over agents and references.
pub fn is_connected(topology: &Topology) -> bool {
    topology.is_connected()
}
