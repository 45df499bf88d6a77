#![allow(clippy::needless_range_loop)]

mod common;

use proptest::prelude::*;

use netsync_core::bounds::aseb_direct;
use netsync_core::fim::build_absolute_fim;
use netsync_core::rng::derive_seed;
use netsync_core::sim::{
    map_trials, relative_estimate, relative_trials, simulate_measurements, ClockState,
};
use netsync_core::{gen_lattice, LinkModel, Position, PriorSpec, Topology};

fn mixed_grid(link: &LinkModel) -> (Topology, PriorSpec) {
    let t = gen_lattice(2.0, 1.0, 1.5).unwrap();
    let n_p = (0..t.n_agents())
        .map(|i| {
            if i % 3 == 0 {
                0.5 + i as f64 / 4.0
            } else {
                0.0
            }
        })
        .collect();
    (
        t,
        PriorSpec::from_equivalent_observations(n_p, link).unwrap(),
    )
}

#[test]
fn map_estimator_is_unbiased_and_attains_the_bound() {
    let link = LinkModel::new(2, 0.7).unwrap();
    let (t, priors) = mixed_grid(&link);
    let aseb = aseb_direct(&build_absolute_fim(&t, &priors, &link).unwrap()).unwrap();
    let trials = 10_000;
    let r = map_trials(&t, &priors, &link, trials, 17).unwrap();
    for i in 0..t.n_agents() {
        let se_mean = ((r.mse[i] - r.mean_error[i].powi(2)) / (trials as f64 - 1.0)).sqrt();
        assert!(
            r.mean_error[i].abs() <= 4.0 * se_mean,
            "agent {i}: bias {} se {se_mean}",
            r.mean_error[i]
        );
        assert!(r.mse_stderr[i] > 0.0);
        assert!(
            r.mse[i] + 4.0 * r.mse_stderr[i] >= aseb[i],
            "agent {i}: mse {} < bound {}",
            r.mse[i],
            aseb[i]
        );
        assert!(
            r.mse[i] - 4.0 * r.mse_stderr[i] <= aseb[i],
            "agent {i}: mse {} far above bound {}",
            r.mse[i],
            aseb[i]
        );
    }
}

#[test]
fn link_statistics_carry_gamma_information() {
    let link = LinkModel::new(3, 1.5).unwrap();
    let t = gen_lattice(3.0, 1.0, 1.0).unwrap();
    let clock = ClockState::offsets_only((0..t.n_agents()).map(|i| i as f64 * 0.3).collect());
    let sets = 4000;
    let mut sq = 0.0;
    let mut count = 0usize;
    for s in 0..sets {
        let m = simulate_measurements(&t, &clock, &link, derive_seed(3, &[s])).unwrap();
        for (&(i, j), mean) in m.edges.iter().zip(m.link_means()) {
            let truth = clock.offsets[j] - clock.offsets[i];
            sq += (mean / 2.0 - truth).powi(2);
            count += 1;
        }
    }
    let var = sq / count as f64;
    let expected = 1.0 / link.gamma();
    let rel_se = (2.0 / count as f64).sqrt();
    assert!(
        ((var - expected) / expected).abs() < 4.0 * rel_se,
        "{var} vs {expected} over {count} links"
    );
}

#[test]
fn two_agent_relative_error_matches_pseudo_inverse() {
    let link = LinkModel::new(3, 1.5).unwrap();
    let t = Topology::new(
        vec![Position::new(0.0, 0.0), Position::new(1.0, 0.0)],
        vec![],
        1.0,
    )
    .unwrap();
    let (mean, se) = relative_trials(&t, &link, &[0.4, -1.1], 20_000, 8).unwrap();
    let expected = 1.0 / (2.0 * link.gamma());
    assert!(se > 0.0);
    assert!(
        (mean - expected).abs() <= 4.0 * se,
        "{mean} ± {se} vs {expected}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relative_pipeline_is_gauge_invariant(
        t in common::connected(20, 1.6),
        shift in -50.0..50.0f64,
        seed in any::<u64>(),
    ) {
        let link = LinkModel::unit();
        let offsets: Vec<f64> = (0..t.n_agents()).map(|i| (i as f64).sin()).collect();
        let shifted: Vec<f64> = offsets.iter().map(|o| o + shift).collect();
        let a = simulate_measurements(&t, &ClockState::offsets_only(offsets.clone()), &link, seed).unwrap();
        let b = simulate_measurements(&t, &ClockState::offsets_only(shifted.clone()), &link, seed).unwrap();
        let ea = relative_estimate(&t, &link, &a, &offsets).unwrap();
        let eb = relative_estimate(&t, &link, &b, &shifted).unwrap();
        prop_assert!((ea.sum_sq_error - eb.sum_sq_error).abs() <= 1e-9 * (1.0 + ea.sum_sq_error));
        for (x, y) in ea.estimates.iter().zip(&eb.estimates) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
