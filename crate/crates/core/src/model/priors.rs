use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LinkModel, Rect, Topology};
use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

/// Per-agent prior Fisher information `xi_p` together with its equivalent
/// number of two-way observations `n_p = sigma^2 xi_p / (2N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    xi_p: Vec<f64>,
    n_p: Vec<f64>,
}

impl PriorSpec {
    pub fn from_xi(xi_p: Vec<f64>, link: &LinkModel) -> Result<Self> {
        check_non_negative(&xi_p, "xi_p")?;
        let gamma = link.gamma();
        let n_p = xi_p.iter().map(|x| x / gamma).collect();
        Ok(Self { xi_p, n_p })
    }

    pub fn from_equivalent_observations(n_p: Vec<f64>, link: &LinkModel) -> Result<Self> {
        check_non_negative(&n_p, "n_p")?;
        let gamma = link.gamma();
        let xi_p = n_p.iter().map(|n| n * gamma).collect();
        Ok(Self { xi_p, n_p })
    }

    /// No prior information for any of `n_agents` agents.
    pub fn none(n_agents: usize) -> Self {
        Self {
            xi_p: vec![0.0; n_agents],
            n_p: vec![0.0; n_agents],
        }
    }

    pub fn uniform(n_agents: usize, n_p: f64, link: &LinkModel) -> Result<Self> {
        Self::from_equivalent_observations(vec![n_p; n_agents], link)
    }

    pub fn xi_p(&self) -> &[f64] {
        &self.xi_p
    }

    pub fn n_p(&self) -> &[f64] {
        &self.n_p
    }

    pub fn len(&self) -> usize {
        self.xi_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_p.is_empty()
    }

    /// Copy with agent `k`'s prior information replaced by `xi`.
    pub fn with_xi(&self, k: usize, xi: f64, link: &LinkModel) -> Self {
        let mut out = self.clone();
        out.xi_p[k] = xi;
        out.n_p[k] = xi / link.gamma();
        out
    }

    /// Copy with agent `k` removed.
    pub fn without(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.xi_p.remove(k);
        out.n_p.remove(k);
        out
    }
}

fn check_non_negative(v: &[f64], name: &str) -> Result<()> {
    match v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        Some(x) => Err(invalid(format!(
            "{name} entries must be finite and >= 0, got {x}"
        ))),
        None => Ok(()),
    }
}

/// How prior information is distributed over agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum PriorScheme {
    None,
    Uniform {
        n_p: f64,
    },
    /// Each agent independently has a prior with probability `p_a`.
    Bernoulli {
        p_a: f64,
        n_p: f64,
        seed: u64,
    },
    /// Only agents inside `rect` have a prior.
    Region {
        rect: Rect,
        n_p: f64,
    },
}

pub fn assign_priors(
    topology: &Topology,
    scheme: &PriorScheme,
    link: &LinkModel,
) -> Result<PriorSpec> {
    let n = topology.n_agents();
    let n_p: Vec<f64> = match *scheme {
        PriorScheme::None => vec![0.0; n],
        PriorScheme::Uniform { n_p } => vec![n_p; n],
        PriorScheme::Bernoulli { p_a, n_p, seed } => {
            if !(0.0..=1.0).contains(&p_a) {
                return Err(invalid(format!("p_a must lie in [0, 1], got {p_a}")));
            }
            let mut rng = rng_from_seed(seed);
            (0..n)
                .map(|_| if rng.random::<f64>() < p_a { n_p } else { 0.0 })
                .collect()
        }
        PriorScheme::Region { rect, n_p } => (0..n)
            .map(|i| {
                if rect.contains(&topology.position(i)) {
                    n_p
                } else {
                    0.0
                }
            })
            .collect(),
    };
    PriorSpec::from_equivalent_observations(n_p, link)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gen_lattice;

    #[test]
    fn equivalent_observations_scale_with_gamma() {
        let link = LinkModel::new(4, 2.0).unwrap();
        let p = PriorSpec::from_xi(vec![8.0, 0.0], &link).unwrap();
        assert_eq!(p.n_p(), &[2.0, 0.0]);
        assert!(PriorSpec::from_xi(vec![-1.0], &link).is_err());
    }

    #[test]
    fn schemes() {
        let link = LinkModel::unit();
        let t = gen_lattice(9.0, 1.0, 1.0).unwrap();
        let u = assign_priors(&t, &PriorScheme::Uniform { n_p: 5.0 }, &link).unwrap();
        assert!(u.n_p().iter().all(|&x| x == 5.0));

        let all = assign_priors(
            &t,
            &PriorScheme::Bernoulli {
                p_a: 1.0,
                n_p: 5.0,
                seed: 3,
            },
            &link,
        )
        .unwrap();
        assert_eq!(all, u);

        let b = assign_priors(
            &t,
            &PriorScheme::Bernoulli {
                p_a: 0.3,
                n_p: 5.0,
                seed: 3,
            },
            &link,
        )
        .unwrap();
        let frac = b.n_p().iter().filter(|&&x| x > 0.0).count() as f64 / 100.0;
        assert!((frac - 0.3).abs() < 0.15, "fraction {frac}");

        let r = assign_priors(
            &t,
            &PriorScheme::Region {
                rect: Rect::new(0.0, 0.0, 1.0, 1.0),
                n_p: 2.0,
            },
            &link,
        )
        .unwrap();
        assert_eq!(r.n_p().iter().filter(|&&x| x > 0.0).count(), 4);

        assert!(assign_priors(
            &t,
            &PriorScheme::Bernoulli {
                p_a: 1.5,
                n_p: 1.0,
                seed: 0
            },
            &link
        )
        .is_err());
    }
}
