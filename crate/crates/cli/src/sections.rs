//! Config-file sections read by the network-level commands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use netsync_core::harness::ConfigFile;
use netsync_core::model::io::load_topology;
use netsync_core::rng::derive_seed;
use netsync_core::{
    assign_priors, gen_lattice, gen_scaling_family, gen_stochastic, LinkModel, PriorScheme,
    PriorSpec, Rect, ScalingMode, Topology,
};

/// Seed-path tag for prior draws, kept apart from the topology stream.
const PRIOR_TAG: u64 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NetworkSection {
    Lattice {
        side_b: f64,
        #[serde(default = "unit_spacing")]
        spacing: f64,
        r_max: f64,
    },
    Stochastic {
        side_b: f64,
        intensity: f64,
        r_max: f64,
    },
    Extended {
        n_agents: usize,
        intensity: f64,
        r_max: f64,
    },
    Dense {
        n_agents: usize,
        area: f64,
        r_max: f64,
    },
    File {
        path: PathBuf,
        r_max: Option<f64>,
    },
}

fn unit_spacing() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum PriorsSection {
    #[default]
    None,
    Uniform {
        n_p: f64,
    },
    Bernoulli {
        p_a: f64,
        n_p: f64,
    },
    Region {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        n_p: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FimKind {
    #[default]
    Absolute,
    Relative,
    Extended,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FimSection {
    #[serde(default)]
    pub variant: FimKind,
    pub xi_inf: Option<f64>,
    /// Write `row,col,value` triplets instead of a dense matrix.
    #[serde(default)]
    pub triplets: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdiMethodName {
    #[default]
    Exact,
    Series,
    Walk,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdiSection {
    #[serde(default)]
    pub method: CdiMethodName,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub cap: Option<usize>,
    /// Agents to walk from; all agents when absent.
    pub agents: Option<Vec<usize>>,
    #[serde(default = "default_walks")]
    pub n_walks: usize,
    pub max_steps: Option<usize>,
}

impl Default for CdiSection {
    fn default() -> Self {
        Self {
            method: CdiMethodName::Exact,
            tol: default_tol(),
            cap: None,
            agents: None,
            n_walks: default_walks(),
            max_steps: None,
        }
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn default_walks() -> usize {
    100_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeCdiSection {
    pub r_max: Vec<f64>,
    pub n_p: Vec<f64>,
    #[serde(default = "default_rel_err_tol")]
    pub rel_err_tol: f64,
}

impl Default for LatticeCdiSection {
    fn default() -> Self {
        Self {
            r_max: (2..=10).map(f64::from).collect(),
            n_p: vec![1e-6, 1e-2, 1.0],
            rel_err_tol: default_rel_err_tol(),
        }
    }
}

fn default_rel_err_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            trials: default_trials(),
        }
    }
}

fn default_trials() -> usize {
    1000
}

/// A parsed config file together with its location, for resolving
/// relative paths.
pub struct Loaded {
    pub file: ConfigFile,
    pub dir: PathBuf,
    pub seed: u64,
}

impl Loaded {
    pub fn load(path: Option<&Path>, seed: Option<u64>) -> Result<Self> {
        let (file, dir) = match path {
            Some(p) => (
                ConfigFile::load(p).with_context(|| format!("reading config {}", p.display()))?,
                p.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (ConfigFile::default(), PathBuf::from(".")),
        };
        let seed = seed
            .or(file.master_seed)
            .unwrap_or(netsync_core::harness::DEFAULT_MASTER_SEED);
        Ok(Self { file, dir, seed })
    }

    /// Section `name`, or `None` when the file has none.
    pub fn section<T: DeserializeOwned>(&self, name: &str) -> Result<Option<T>> {
        match self.file.other.get(name) {
            Some(v) => Ok(Some(
                v.clone()
                    .try_into()
                    .with_context(|| format!("in [{name}]"))?,
            )),
            None => Ok(None),
        }
    }

    pub fn section_or_default<T: DeserializeOwned + Default>(&self, name: &str) -> Result<T> {
        Ok(self.section(name)?.unwrap_or_default())
    }

    pub fn link(&self) -> Result<LinkModel> {
        Ok(self.file.link()?)
    }

    pub fn topology(&self) -> Result<Topology> {
        let Some(net) = self.section::<NetworkSection>("network")? else {
            bail!("config has no [network] section");
        };
        let seed = self.seed;
        Ok(match net {
            NetworkSection::Lattice {
                side_b,
                spacing,
                r_max,
            } => gen_lattice(side_b, spacing, r_max)?,
            NetworkSection::Stochastic {
                side_b,
                intensity,
                r_max,
            } => gen_stochastic(side_b, intensity, r_max, seed)?,
            NetworkSection::Extended {
                n_agents,
                intensity,
                r_max,
            } => gen_scaling_family(ScalingMode::Extended { intensity }, n_agents, r_max, seed)?,
            NetworkSection::Dense {
                n_agents,
                area,
                r_max,
            } => gen_scaling_family(ScalingMode::Dense { area }, n_agents, r_max, seed)?,
            NetworkSection::File { path, r_max } => {
                let path = if path.is_absolute() {
                    path
                } else {
                    self.dir.join(path)
                };
                load_topology(&path, r_max)
                    .with_context(|| format!("loading {}", path.display()))?
            }
        })
    }

    pub fn priors(&self, topology: &Topology, link: &LinkModel) -> Result<PriorSpec> {
        let scheme = match self.section_or_default::<PriorsSection>("priors")? {
            PriorsSection::None => PriorScheme::None,
            PriorsSection::Uniform { n_p } => PriorScheme::Uniform { n_p },
            PriorsSection::Bernoulli { p_a, n_p } => PriorScheme::Bernoulli {
                p_a,
                n_p,
                seed: derive_seed(self.seed, &[PRIOR_TAG]),
            },
            PriorsSection::Region {
                x0,
                y0,
                x1,
                y1,
                n_p,
            } => PriorScheme::Region {
                rect: Rect::new(x0, y0, x1, y1),
                n_p,
            },
        };
        Ok(assign_priors(topology, &scheme, link)?)
    }
}
