use std::collections::BTreeMap;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Position, Provenance, Rect, Topology};
use crate::error::{invalid, NetsyncError, Result};
use crate::rng::rng_from_seed;

/// Agents on every grid point `k * spacing` inside `[0, side_b]^2`.
pub fn gen_lattice(side_b: f64, spacing: f64, r_max: f64) -> Result<Topology> {
    if !(side_b > 0.0) || !(spacing > 0.0) || !side_b.is_finite() || !spacing.is_finite() {
        return Err(invalid(format!(
            "lattice dimensions must be positive, got side_b={side_b}, spacing={spacing}"
        )));
    }
    let per_side = (side_b / spacing + 1e-9).floor() as usize + 1;
    let mut agents = Vec::with_capacity(per_side * per_side);
    for iy in 0..per_side {
        for ix in 0..per_side {
            agents.push(Position::new(ix as f64 * spacing, iy as f64 * spacing));
        }
    }
    let provenance = Provenance {
        generator: "lattice".into(),
        seed: None,
        params: params(&[("side_b", side_b), ("spacing", spacing)]),
    };
    Ok(Topology::new(agents, vec![], r_max)?
        .with_region(Rect::square(side_b))
        .with_provenance(provenance))
}

/// Binomial point process: `round(intensity * side_b^2)` agents placed
/// independently and uniformly on `[0, side_b]^2`.
pub fn gen_stochastic(side_b: f64, intensity: f64, r_max: f64, seed: u64) -> Result<Topology> {
    if !(side_b > 0.0) || !side_b.is_finite() {
        return Err(invalid(format!("side_b must be positive, got {side_b}")));
    }
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(invalid(format!(
            "intensity must be positive, got {intensity}"
        )));
    }
    let n = (intensity * side_b * side_b).round() as usize;
    uniform_square(n, side_b, r_max, seed, "stochastic", intensity)
}

fn uniform_square(
    n: usize,
    side_b: f64,
    r_max: f64,
    seed: u64,
    generator: &str,
    intensity: f64,
) -> Result<Topology> {
    let mut rng = rng_from_seed(seed);
    let agents = (0..n)
        .map(|_| Position::new(rng.random::<f64>() * side_b, rng.random::<f64>() * side_b))
        .collect();
    let provenance = Provenance {
        generator: generator.into(),
        seed: Some(seed),
        params: params(&[
            ("side_b", side_b),
            ("intensity", intensity),
            ("n_agents", n as f64),
        ]),
    };
    Ok(Topology::new(agents, vec![], r_max)?
        .with_region(Rect::square(side_b))
        .with_provenance(provenance))
}

/// How the deployment region reacts to a growing agent count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ScalingMode {
    /// Fixed intensity; the area grows as `n_agents / intensity`.
    Extended { intensity: f64 },
    /// Fixed area; the intensity grows with `n_agents`.
    Dense { area: f64 },
}

impl ScalingMode {
    /// Side of the square region holding `n_agents`.
    pub fn side(&self, n_agents: usize) -> f64 {
        match *self {
            ScalingMode::Extended { intensity } => (n_agents as f64 / intensity).sqrt(),
            ScalingMode::Dense { area } => area.sqrt(),
        }
    }

    pub fn intensity(&self, n_agents: usize) -> f64 {
        match *self {
            ScalingMode::Extended { intensity } => intensity,
            ScalingMode::Dense { area } => n_agents as f64 / area,
        }
    }

    /// Parses `extended` or `dense` with the mode's defining parameter.
    pub fn parse(mode: &str, value: f64) -> Result<Self> {
        match ScalingKind::from_str(mode)? {
            ScalingKind::Extended => Ok(ScalingMode::Extended { intensity: value }),
            ScalingKind::Dense => Ok(ScalingMode::Dense { area: value }),
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            ScalingMode::Extended { intensity } => intensity,
            ScalingMode::Dense { area } => area,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(invalid(format!(
                "scaling parameter must be positive, got {v}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalingKind {
    Extended,
    Dense,
}

impl FromStr for ScalingKind {
    type Err = NetsyncError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extended" => Ok(Self::Extended),
            "dense" => Ok(Self::Dense),
            other => Err(invalid(format!(
                "unknown scaling mode '{other}' (expected dense|extended)"
            ))),
        }
    }
}

pub fn gen_scaling_family(
    mode: ScalingMode,
    n_agents: usize,
    r_max: f64,
    seed: u64,
) -> Result<Topology> {
    mode.validate()?;
    let side = mode.side(n_agents);
    let generator = match mode {
        ScalingMode::Extended { .. } => "extended",
        ScalingMode::Dense { .. } => "dense",
    };
    uniform_square(
        n_agents,
        side,
        r_max,
        seed,
        generator,
        mode.intensity(n_agents),
    )
}

/// Lattice points at distance at most `r_max` from the origin, counting
/// the origin itself: `1 + 4 floor(R) + 4 sum_{n=1}^{floor(R)} floor(sqrt(R^2 - n^2))`.
pub fn gauss_circle_degree(r_max: f64) -> usize {
    let r = r_max.floor() as i64;
    let r2 = r_max * r_max;
    let mut total = 1 + 4 * r;
    for n in 1..=r {
        total += 4 * isqrt_floor(r2 - (n * n) as f64);
    }
    total as usize
}

/// `floor(sqrt(v))` robust to rounding when `v` is (nearly) a perfect square.
fn isqrt_floor(v: f64) -> i64 {
    if v <= 0.0 {
        return 0;
    }
    let mut s = v.sqrt().floor() as i64;
    let tol = 1e-9 * v.max(1.0);
    while ((s + 1) * (s + 1)) as f64 <= v + tol {
        s += 1;
    }
    while s > 0 && (s * s) as f64 > v + tol {
        s -= 1;
    }
    s
}

/// Number of non-origin lattice points within `r_max`: the degree of a node
/// in an infinite lattice network.
pub fn lattice_neighbor_count(r_max: f64) -> usize {
    gauss_circle_degree(r_max) - 1
}

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, String> {
    kv.iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
