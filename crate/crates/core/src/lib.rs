//! Fundamental limits of cooperative clock synchronization.
//!
//! Builds Fisher information matrices over unit-disk networks, evaluates
//! absolute and relative error bounds, computes cooperative dilution
//! intensity (CDI) by exact, series and random-walk methods, simulates
//! two-way timing measurements and runs seeded scaling experiments.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod cdi;
pub mod error;
pub mod fim;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::{NetsyncError, Result};
pub use model::{
    assign_priors, gauss_circle_degree, gen_lattice, gen_scaling_family, gen_stochastic,
    is_connected, lattice_neighbor_count, LinkModel, NodeKind, Position, PriorScheme, PriorSpec,
    Provenance, Rect, ScalingMode, Topology,
};
