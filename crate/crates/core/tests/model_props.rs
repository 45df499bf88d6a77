mod common;

use proptest::prelude::*;

use netsync_core::model::io::write_topology_csv;
use netsync_core::{
    gauss_circle_degree, gen_lattice, gen_scaling_family, gen_stochastic, ScalingMode,
};

fn brute_gauss(r: f64) -> usize {
    let k = r.floor() as i64 + 1;
    let mut n = 0;
    for x in -k..=k {
        for y in -k..=k {
            if ((x * x + y * y) as f64) <= r * r {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn gauss_circle_matches_brute_force_for_integer_radii() {
    for r in 1..=30 {
        assert_eq!(
            gauss_circle_degree(r as f64),
            brute_gauss(r as f64),
            "r = {r}"
        );
    }
}

proptest! {
    #[test]
    fn gauss_circle_matches_brute_force(r in 0.0..30.0f64) {
        prop_assert_eq!(gauss_circle_degree(r), brute_gauss(r));
    }

    #[test]
    fn adjacency_is_symmetric_without_loops(t in common::topology(25, 5, 5.0, 1.5)) {
        for i in 0..t.n_nodes() {
            prop_assert!(!t.has_edge(i, i));
            for &j in t.neighbors(i) {
                prop_assert!(t.has_edge(j, i));
                prop_assert!(t.position(i).distance(&t.position(j)) <= t.r_max());
            }
        }
    }

    #[test]
    fn agent_degrees_split_by_kind(t in common::topology(25, 5, 5.0, 1.5)) {
        for i in 0..t.n_agents() {
            prop_assert_eq!(t.agent_degree(i) + t.reference_degree(i), t.neighbors(i).len());
        }
    }

    #[test]
    fn generators_are_pure(seed in any::<u64>(), n in 5usize..60) {
        let csv = |t: &netsync_core::Topology| {
            let mut buf = Vec::new();
            write_topology_csv(t, &mut buf).unwrap();
            buf
        };
        let a = gen_stochastic(6.0, 1.0, 1.5, seed).unwrap();
        prop_assert_eq!(csv(&a), csv(&gen_stochastic(6.0, 1.0, 1.5, seed).unwrap()));
        let mode = ScalingMode::Dense { area: 100.0 };
        let b = gen_scaling_family(mode, n, 3.0, seed).unwrap();
        prop_assert_eq!(csv(&b), csv(&gen_scaling_family(mode, n, 3.0, seed).unwrap()));
        prop_assert_eq!(b.n_agents(), n);
    }
}

#[test]
fn lattice_interior_degree_is_gauss_count_minus_one() {
    let t = gen_lattice(12.0, 1.0, 3.0).unwrap();
    for i in t.interior_agents() {
        assert_eq!(t.degree(i) + 1, gauss_circle_degree(3.0));
    }
}
