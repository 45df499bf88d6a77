#![allow(dead_code)]

use proptest::prelude::*;

use netsync_core::{LinkModel, Position, PriorSpec, Topology};

/// Random agents in a square with a few references and mixed priors.
#[derive(Debug, Clone)]
pub struct Instance {
    pub topology: Topology,
    pub priors: PriorSpec,
}

fn point(side: f64) -> impl Strategy<Value = Position> {
    (0.0..side, 0.0..side).prop_map(|(x, y)| Position::new(x, y))
}

pub fn topology(
    max_agents: usize,
    max_refs: usize,
    side: f64,
    r_max: f64,
) -> impl Strategy<Value = Topology> {
    (
        prop::collection::vec(point(side), 2..=max_agents),
        prop::collection::vec(point(side), 0..=max_refs),
    )
        .prop_map(move |(a, r)| Topology::new(a, r, r_max).unwrap())
}

/// Connected by construction: each agent lands within range of an
/// earlier one.
pub fn connected(max_agents: usize, r_max: f64) -> impl Strategy<Value = Topology> {
    prop::collection::vec(
        (0.0..1.0f64, 0.0..std::f64::consts::TAU, 0.05..0.95f64),
        1..max_agents,
    )
    .prop_map(move |steps| {
        let mut pts = vec![Position::new(0.0, 0.0)];
        for (pick, angle, frac) in steps {
            let parent = pts[((pick * pts.len() as f64) as usize).min(pts.len() - 1)];
            let d = frac * r_max;
            pts.push(Position::new(
                parent.x + d * angle.cos(),
                parent.y + d * angle.sin(),
            ));
        }
        Topology::new(pts, vec![], r_max).unwrap()
    })
}

/// Priors (unit link) with roughly half the agents informed, and at least
/// one.
pub fn priors(n: usize) -> impl Strategy<Value = PriorSpec> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.1..5.0f64], n).prop_map(move |mut v| {
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        PriorSpec::from_equivalent_observations(v, &LinkModel::unit()).unwrap()
    })
}

/// Connected agent graph (so every agent reaches a prior) with mixed priors.
pub fn synchronizable(max_agents: usize) -> impl Strategy<Value = Instance> {
    connected(max_agents, 1.6).prop_flat_map(|t| {
        let n = t.n_agents();
        priors(n).prop_map(move |p| Instance {
            topology: t.clone(),
            priors: p,
        })
    })
}

pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
