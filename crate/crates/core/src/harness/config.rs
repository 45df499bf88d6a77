use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, NetsyncError, Result};
use crate::model::LinkModel;

/// Default master seed when neither the file nor the command line sets one.
pub const DEFAULT_MASTER_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    ExtendedRseb,
    ExtendedAseb,
    DenseRseb,
    DenseAseb,
    LatticeCdi,
    StochasticConvergence,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::ExtendedRseb,
        ExperimentId::ExtendedAseb,
        ExperimentId::DenseRseb,
        ExperimentId::DenseAseb,
        ExperimentId::LatticeCdi,
        ExperimentId::StochasticConvergence,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::ExtendedRseb => "extended-rseb",
            ExperimentId::ExtendedAseb => "extended-aseb",
            ExperimentId::DenseRseb => "dense-rseb",
            ExperimentId::DenseAseb => "dense-aseb",
            ExperimentId::LatticeCdi => "lattice-cdi",
            ExperimentId::StochasticConvergence => "stochastic-convergence",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = NetsyncError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s || id.as_str().replace('-', "_") == s)
            .ok_or_else(|| {
                let known: Vec<_> = ExperimentId::ALL.iter().map(|i| i.as_str()).collect();
                invalid(format!(
                    "unknown experiment '{s}' (known: {})",
                    known.join(", ")
                ))
            })
    }
}

/// A fully resolved experiment: defaults merged with the config file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(skip)]
    pub id: ExperimentId,
    pub n_agents: Vec<usize>,
    pub r_max: Vec<f64>,
    pub n_p: Vec<f64>,
    pub p_a: Vec<f64>,
    pub side_b: Vec<f64>,
    /// Node intensity for extended and stochastic families, per m².
    pub intensity: f64,
    /// Deployment area for the dense family, m².
    pub area: f64,
    /// Realizations per grid cell (snapshots for the stochastic study).
    pub realizations: usize,
    /// Prior strength used by finite-lattice cells.
    pub finite_n_p: f64,
    pub rel_err_tol: f64,
    pub master_seed: u64,
    pub n_rounds: u32,
    pub sigma2: f64,
}

fn range(lo: usize, hi: usize, step: usize) -> Vec<usize> {
    (lo..=hi).step_by(step).collect()
}

impl ExperimentConfig {
    /// Desk-scale defaults for each study.
    pub fn defaults(id: ExperimentId) -> Self {
        let base = ExperimentConfig {
            id,
            n_agents: range(200, 800, 100),
            r_max: vec![20.0],
            n_p: vec![5.0],
            p_a: vec![1.0],
            side_b: vec![],
            intensity: 0.01,
            area: 10_000.0,
            realizations: 200,
            finite_n_p: 5.0,
            rel_err_tol: 1e-3,
            master_seed: DEFAULT_MASTER_SEED,
            n_rounds: 1,
            sigma2: 2.0,
        };
        match id {
            ExperimentId::ExtendedRseb => ExperimentConfig {
                r_max: vec![20.0, 25.0],
                ..base
            },
            ExperimentId::ExtendedAseb => ExperimentConfig {
                p_a: vec![0.3, 1.0],
                ..base
            },
            ExperimentId::DenseRseb => ExperimentConfig {
                n_agents: range(200, 800, 200),
                r_max: vec![20.0, 25.0],
                ..base
            },
            ExperimentId::DenseAseb => ExperimentConfig {
                n_agents: range(200, 800, 200),
                p_a: vec![0.3, 1.0],
                ..base
            },
            ExperimentId::LatticeCdi => ExperimentConfig {
                n_agents: vec![],
                r_max: (2..=10).map(f64::from).collect(),
                n_p: vec![1e-6, 1e-2, 1.0],
                side_b: vec![50.0, 100.0],
                realizations: 1,
                ..base
            },
            ExperimentId::StochasticConvergence => ExperimentConfig {
                n_agents: vec![],
                r_max: (2..=10).map(f64::from).collect(),
                side_b: vec![50.0, 100.0],
                intensity: 1.0,
                realizations: 100,
                ..base
            },
        }
    }

    pub fn link(&self) -> Result<LinkModel> {
        LinkModel::new(self.n_rounds, self.sigma2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(invalid("realizations must be at least 1"));
        }
        let needs_agents = !matches!(
            self.id,
            ExperimentId::LatticeCdi | ExperimentId::StochasticConvergence
        );
        if needs_agents && self.n_agents.is_empty() {
            return Err(invalid("n_agents grid must not be empty"));
        }
        if self.r_max.is_empty() {
            return Err(invalid("r_max grid must not be empty"));
        }
        if matches!(
            self.id,
            ExperimentId::LatticeCdi | ExperimentId::StochasticConvergence
        ) && self.side_b.is_empty()
        {
            return Err(invalid("side_b grid must not be empty"));
        }
        if self.p_a.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("p_a values must lie in [0, 1]"));
        }
        if self.n_p.is_empty() || self.n_p.iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("n_p values must be non-negative"));
        }
        self.link()?;
        Ok(())
    }

    /// Canonical text of the resolved configuration, echoed into the run
    /// manifest and compared on resume.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }
}

/// Link section of a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub n_rounds: Option<u32>,
    pub sigma2: Option<f64>,
}

/// One `[experiment.<id>]` table; absent keys fall back to defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub n_agents: Option<Vec<usize>>,
    pub r_max: Option<Vec<f64>>,
    pub n_p: Option<Vec<f64>>,
    pub p_a: Option<Vec<f64>>,
    pub side_b: Option<Vec<f64>>,
    pub intensity: Option<f64>,
    pub area: Option<f64>,
    pub realizations: Option<usize>,
    pub snapshots: Option<usize>,
    pub finite_n_p: Option<f64>,
    pub rel_err_tol: Option<f64>,
    pub master_seed: Option<u64>,
}

/// The whole config file. Sections other than `experiment` and `link` are
/// read by the individual CLI commands.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ConfigFile {
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub experiment: BTreeMap<String, ExperimentSection>,
    #[serde(flatten)]
    pub other: BTreeMap<String, toml::Value>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| NetsyncError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn link(&self) -> Result<LinkModel> {
        let d = LinkModel::default();
        LinkModel::new(
            self.link.n_rounds.unwrap_or(d.n_rounds),
            self.link.sigma2.unwrap_or(d.sigma2),
        )
    }

    /// Resolved settings for `id`; `seed` overrides any seed in the file.
    pub fn experiment(&self, id: ExperimentId, seed: Option<u64>) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::defaults(id);
        let key = self
            .experiment
            .keys()
            .find(|k| k.parse::<ExperimentId>().ok() == Some(id));
        if let Some(s) = key.map(|k| &self.experiment[k]) {
            if let Some(v) = &s.n_agents {
                c.n_agents = v.clone();
            }
            if let Some(v) = &s.r_max {
                c.r_max = v.clone();
            }
            if let Some(v) = &s.n_p {
                c.n_p = v.clone();
            }
            if let Some(v) = &s.p_a {
                c.p_a = v.clone();
            }
            if let Some(v) = &s.side_b {
                c.side_b = v.clone();
            }
            c.intensity = s.intensity.unwrap_or(c.intensity);
            c.area = s.area.unwrap_or(c.area);
            c.realizations = s.realizations.or(s.snapshots).unwrap_or(c.realizations);
            c.finite_n_p = s.finite_n_p.unwrap_or(c.finite_n_p);
            c.rel_err_tol = s.rel_err_tol.unwrap_or(c.rel_err_tol);
            c.master_seed = s.master_seed.or(self.master_seed).unwrap_or(c.master_seed);
        } else {
            c.master_seed = self.master_seed.unwrap_or(c.master_seed);
        }
        if let Some(seed) = seed {
            c.master_seed = seed;
        }
        let link = self.link()?;
        c.n_rounds = link.n_rounds;
        c.sigma2 = link.sigma2;
        c.validate()?;
        Ok(c)
    }
}
