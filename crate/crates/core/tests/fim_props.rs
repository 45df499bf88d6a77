mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use common::{rel_dev, Instance};
use netsync_core::fim::{
    apply_skew, build_absolute_fim, build_extended_fim, build_transition_matrix, SkewSpec,
};
use netsync_core::LinkModel;

fn instance_with_refs() -> impl Strategy<Value = Instance> {
    common::topology(15, 3, 4.0, 1.5).prop_flat_map(|t| {
        let n = t.n_agents();
        common::priors(n).prop_map(move |p| {
            // Isolated agents need a prior to have a non-degenerate row.
            let n_p = (0..t.n_agents())
                .map(|i| {
                    if t.degree(i) == 0 {
                        p.n_p()[i].max(1.0)
                    } else {
                        p.n_p()[i]
                    }
                })
                .collect();
            Instance {
                topology: t.clone(),
                priors: netsync_core::PriorSpec::from_equivalent_observations(
                    n_p,
                    &LinkModel::unit(),
                )
                .unwrap(),
            }
        })
    })
}

proptest! {
    #[test]
    fn absolute_fim_factors_through_transition(inst in instance_with_refs(), rounds in 1u32..4) {
        let link = LinkModel::new(rounds, 0.7).unwrap();
        let priors = netsync_core::PriorSpec::from_equivalent_observations(inst.priors.n_p().to_vec(), &link).unwrap();
        let j = build_absolute_fim(&inst.topology, &priors, &link).unwrap();
        let tm = build_transition_matrix(&j).unwrap();
        let n = j.dim();
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(tm.weights().to_vec()));
        let rebuilt = &w * (DMatrix::identity(n, n) - tm.to_dense());
        let jd = j.to_dense();
        let scale = jd.amax();
        prop_assert!((rebuilt - &jd).amax() <= 1e-13 * scale);
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    prop_assert!(jd[(a, b)] <= 0.0);
                }
                let p = tm.get(a, b);
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn extended_agent_block_matches_absolute_walk(inst in instance_with_refs()) {
        let link = LinkModel::unit();
        let abs = build_transition_matrix(&build_absolute_fim(&inst.topology, &inst.priors, &link).unwrap()).unwrap();
        let ext_fim = build_extended_fim(&inst.topology, &inst.priors, &link, None).unwrap();
        let ext = build_transition_matrix(&ext_fim).unwrap();
        let na = inst.topology.n_agents();
        for a in 0..na {
            prop_assert!(!ext.is_absorbing(a));
            for b in 0..na {
                prop_assert!((ext.get(a, b) - abs.get(a, b)).abs() < 1e-15);
            }
        }
        for s in na..ext.n() {
            prop_assert!(ext.is_absorbing(s));
        }
        let jd = ext_fim.to_dense();
        prop_assert!(jd.iter().enumerate().all(|(k, v)| k % (ext.n() + 1) == 0 || *v <= 0.0));
    }

    #[test]
    fn skew_congruence_inverts(inst in common::synchronizable(20), seed in prop::collection::vec(0.5..2.0f64, 20)) {
        let link = LinkModel::unit();
        let j = build_absolute_fim(&inst.topology, &inst.priors, &link).unwrap();
        let n = j.dim();
        let alphas = seed[..n].to_vec();
        let skewed = apply_skew(&j, &SkewSpec::new(alphas.clone()).unwrap()).unwrap();
        let lhs = skewed.to_dense().cholesky().unwrap().inverse();
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(alphas));
        let rhs = &b * j.to_dense().cholesky().unwrap().inverse() * &b;
        for r in 0..n {
            for c in 0..n {
                let scale = (rhs[(r, r)] * rhs[(c, c)]).sqrt();
                prop_assert!((lhs[(r, c)] - rhs[(r, c)]).abs() <= 1e-12 * scale);
            }
            prop_assert!(rel_dev(lhs[(r, r)], rhs[(r, r)]) < 1e-12);
        }
    }
}
