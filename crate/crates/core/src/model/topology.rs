use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Relative slack applied to the inclusive `dist <= r_max` test so that
/// lattice points exactly at range survive floating-point rounding.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Position) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Agent,
    Reference,
}

impl NodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeKind::Agent => "agent",
            NodeKind::Reference => "reference",
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn square(side: f64) -> Self {
        Self::new(0.0, 0.0, side, side)
    }

    pub fn contains(&self, p: &Position) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Distance from an interior point to the nearest edge of the rectangle.
    pub fn boundary_distance(&self, p: &Position) -> f64 {
        (p.x - self.x0)
            .min(self.x1 - p.x)
            .min(p.y - self.y0)
            .min(self.y1 - p.y)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Where a topology came from; echoed into the CSV sidecar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: Option<u64>,
    pub params: BTreeMap<String, String>,
}

/// Node placement plus the unit-disk adjacency it induces.
///
/// Agents occupy indices `0..n_agents`, reference nodes the indices after
/// them. Two distinct nodes are adjacent iff their distance is at most
/// `r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Position>,
    n_agents: usize,
    r_max: f64,
    neighbors: Vec<Vec<usize>>,
    region: Option<Rect>,
    provenance: Provenance,
}

impl Topology {
    pub fn new(agents: Vec<Position>, references: Vec<Position>, r_max: f64) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(invalid(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        let n_agents = agents.len();
        let mut positions = agents;
        positions.extend(references);
        if let Some(p) = positions
            .iter()
            .find(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(invalid(format!("non-finite position {p:?}")));
        }
        let neighbors = unit_disk_adjacency(&positions, r_max);
        Ok(Self {
            positions,
            n_agents,
            r_max,
            neighbors,
            region: None,
            provenance: Provenance::default(),
        })
    }

    pub fn with_region(mut self, region: Rect) -> Self {
        self.region = Some(region);
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_references(&self) -> usize {
        self.positions.len() - self.n_agents
    }

    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn region(&self) -> Option<Rect> {
        self.region
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> Position {
        self.positions[i]
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        if i < self.n_agents {
            NodeKind::Agent
        } else {
            NodeKind::Reference
        }
    }

    pub fn is_agent(&self, i: usize) -> bool {
        i < self.n_agents
    }

    /// Sorted neighbor list of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// `d_A,i`: number of neighboring agents.
    pub fn agent_degree(&self, i: usize) -> usize {
        self.neighbors[i]
            .iter()
            .filter(|&&j| j < self.n_agents)
            .count()
    }

    /// `d_R,i`: number of neighboring reference nodes.
    pub fn reference_degree(&self, i: usize) -> usize {
        self.neighbors[i]
            .iter()
            .filter(|&&j| j >= self.n_agents)
            .count()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn agent_degrees(&self) -> Vec<usize> {
        (0..self.n_agents).map(|i| self.agent_degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Unordered edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// True iff agents and references form a single connected component.
    pub fn is_connected(&self) -> bool {
        self.n_nodes() == 0
            || count_components(self.n_nodes(), |i| &self.neighbors[i][..], |_| true) == 1
    }

    /// Number of connected components of the agent-only subgraph.
    pub fn agent_components(&self) -> usize {
        let n = self.n_agents;
        count_components(n, |i| &self.neighbors[i][..], |j| j < n)
    }

    /// Agents whose distance to the region boundary is at least `r_max`.
    /// Without a recorded region every agent counts as interior.
    pub fn interior_agents(&self) -> Vec<usize> {
        match self.region {
            Some(rect) => (0..self.n_agents)
                .filter(|&i| {
                    rect.boundary_distance(&self.positions[i]) >= self.r_max * (1.0 - RANGE_SLACK)
                })
                .collect(),
            None => (0..self.n_agents).collect(),
        }
    }

    /// Returns the topology with agent `k` turned into a reference node and
    /// the map from new agent indices to old ones.
    pub fn promote_to_reference(&self, k: usize) -> Result<(Topology, Vec<usize>)> {
        if k >= self.n_agents {
            return Err(invalid(format!("agent {k} does not exist")));
        }
        let kept: Vec<usize> = (0..self.n_agents).filter(|&i| i != k).collect();
        let agents = kept.iter().map(|&i| self.positions[i]).collect();
        let mut references = vec![self.positions[k]];
        references.extend_from_slice(&self.positions[self.n_agents..]);
        let mut topo = Topology::new(agents, references, self.r_max)?;
        topo.region = self.region;
        topo.provenance = self.provenance.clone();
        Ok((topo, kept))
    }
}

fn count_components<'a, F, G>(n: usize, neighbors: F, include: G) -> usize
where
    F: Fn(usize) -> &'a [usize],
    G: Fn(usize) -> bool,
{
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in neighbors(u) {
                if include(v) && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    components
}

/// Unit-disk graph via a uniform cell grid of side `r_max`.
fn unit_disk_adjacency(positions: &[Position], r_max: f64) -> Vec<Vec<usize>> {
    let r2 = r_max * r_max * (1.0 + RANGE_SLACK);
    let cell = |p: &Position| ((p.x / r_max).floor() as i64, (p.y / r_max).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in positions.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let mut neighbors = vec![Vec::new(); positions.len()];
    for (i, p) in positions.iter().enumerate() {
        let (cx, cy) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in bucket {
                        if j != i && p.distance_sq(&positions[j]) <= r2 {
                            neighbors[i].push(j);
                        }
                    }
                }
            }
        }
        neighbors[i].sort_unstable();
    }
    neighbors
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(d: f64, r: f64) -> Topology {
        Topology::new(
            vec![Position::new(0.0, 0.0), Position::new(d, 0.0)],
            vec![],
            r,
        )
        .unwrap()
    }

    #[test]
    fn range_is_inclusive() {
        assert!(pair(1.5, 1.5).is_connected());
        assert!(!pair(1.5 + 1e-9, 1.5).is_connected());
    }

    #[test]
    fn degrees_split_by_kind() {
        let t = Topology::new(
            vec![Position::new(0.0, 0.0), Position::new(1.0, 0.0)],
            vec![Position::new(0.0, 1.0)],
            1.0,
        )
        .unwrap();
        assert_eq!(t.agent_degree(0), 1);
        assert_eq!(t.reference_degree(0), 1);
        assert_eq!(t.reference_degree(1), 0);
        assert_eq!(t.degree(2), 1);
        assert_eq!(t.edge_count(), 2);
        assert_eq!(t.kind(2), NodeKind::Reference);
    }

    #[test]
    fn promotion_moves_agent_to_references() {
        let t = Topology::new(
            vec![
                Position::new(0.0, 0.0),
                Position::new(1.0, 0.0),
                Position::new(2.0, 0.0),
            ],
            vec![],
            1.0,
        )
        .unwrap();
        let (p, map) = t.promote_to_reference(1).unwrap();
        assert_eq!(p.n_agents(), 2);
        assert_eq!(p.n_references(), 1);
        assert_eq!(map, vec![0, 2]);
        assert_eq!(p.reference_degree(0), 1);
        assert_eq!(p.agent_degree(0), 0);
    }

    #[test]
    fn rejects_bad_range() {
        assert!(Topology::new(vec![], vec![], 0.0).is_err());
        assert!(Topology::new(vec![Position::new(f64::NAN, 0.0)], vec![], 1.0).is_err());
    }
}
