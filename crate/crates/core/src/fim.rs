//! Fisher information matrices and their random-walk transition matrices.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{invalid, NetsyncError, Result};
use crate::linalg::SymSparse;
use crate::model::{LinkModel, Position, PriorSpec, Topology};

/// Matrices up to this side are stored dense.
pub const DENSE_LIMIT: usize = 2000;

/// Default ratio between the virtual-reference information and the
/// largest ordinary diagonal entry.
pub const XI_INF_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FimVariant {
    Absolute,
    Relative,
    Extended,
}

impl FimVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            FimVariant::Absolute => "absolute",
            FimVariant::Relative => "relative",
            FimVariant::Extended => "extended",
        }
    }
}

/// Symmetric storage, dense or sparse.
#[derive(Debug, Clone, PartialEq)]
pub enum SymMatrix {
    Dense(DMatrix<f64>),
    Sparse(SymSparse),
}

impl SymMatrix {
    fn from_sparse(s: SymSparse) -> Self {
        if s.n() <= DENSE_LIMIT {
            SymMatrix::Dense(s.to_dense())
        } else {
            SymMatrix::Sparse(s)
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SymMatrix::Dense(m) => m.nrows(),
            SymMatrix::Sparse(s) => s.n(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            SymMatrix::Dense(m) => m[(i, j)],
            SymMatrix::Sparse(s) => s.get(i, j),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        match self {
            SymMatrix::Dense(m) => m.diagonal().iter().copied().collect(),
            SymMatrix::Sparse(s) => s.diag().to_vec(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, SymMatrix::Dense(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymMatrix::Dense(m) => m.clone(),
            SymMatrix::Sparse(s) => s.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> SymSparse {
        match self {
            SymMatrix::Dense(m) => SymSparse::from_dense(m),
            SymMatrix::Sparse(s) => s.clone(),
        }
    }

    /// Nonzero off-diagonal entries of row `i`.
    pub fn offdiag_row(&self, i: usize) -> Vec<(usize, f64)> {
        match self {
            SymMatrix::Dense(m) => (0..m.ncols())
                .filter(|&j| j != i && m[(i, j)] != 0.0)
                .map(|j| (j, m[(i, j)]))
                .collect(),
            SymMatrix::Sparse(s) => s.row(i).to_vec(),
        }
    }

    fn congruence(&self, scale: &[f64]) -> SymMatrix {
        match self {
            SymMatrix::Dense(m) => {
                let mut out = m.clone();
                for i in 0..out.nrows() {
                    for j in 0..out.ncols() {
                        out[(i, j)] *= scale[i] * scale[j];
                    }
                }
                SymMatrix::Dense(out)
            }
            SymMatrix::Sparse(s) => {
                let mut out = SymSparse::new(s.n());
                for i in 0..s.n() {
                    out.add_diag(i, s.diag()[i] * scale[i] * scale[i]);
                    for &(j, v) in s.row(i) {
                        if j > i {
                            out.add_sym(i, j, v * scale[i] * scale[j]);
                        }
                    }
                }
                SymMatrix::Sparse(out)
            }
        }
    }
}

/// An information matrix over agents (absolute, relative) or over agents,
/// references and virtual references (extended).
#[derive(Debug, Clone, PartialEq)]
pub struct FimMatrix {
    variant: FimVariant,
    gamma: f64,
    n_agents: usize,
    n_references: usize,
    data: SymMatrix,
    positions: Option<Vec<Position>>,
}

impl FimMatrix {
    /// Wraps an explicit symmetric matrix, mainly for fixtures.
    pub fn from_dense(variant: FimVariant, gamma: f64, m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid("information matrix must be square"));
        }
        if variant == FimVariant::Extended {
            return Err(invalid(
                "extended matrices carry a node layout; use build_extended_fim",
            ));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            variant,
            gamma,
            n_agents: n,
            n_references: 0,
            data: SymMatrix::Dense(m),
            positions: None,
        })
    }

    pub fn variant(&self) -> FimVariant {
        self.variant
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.data.n()
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    /// Reference count in the extended layout; zero otherwise.
    pub fn n_references(&self) -> usize {
        self.n_references
    }

    pub fn data(&self) -> &SymMatrix {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data.get(i, j)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.data.diagonal()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.data.to_dense()
    }

    pub fn to_sparse(&self) -> SymSparse {
        self.data.to_sparse()
    }

    /// Node coordinates in matrix order, used to pick a banded ordering.
    pub fn positions(&self) -> Option<&[Position]> {
        self.positions.as_deref()
    }

    /// Forces sparse storage regardless of size.
    pub fn into_sparse(mut self) -> Self {
        if let SymMatrix::Dense(m) = &self.data {
            self.data = SymMatrix::Sparse(SymSparse::from_dense(m));
        }
        self
    }

    /// Forces dense storage regardless of size.
    pub fn into_dense(mut self) -> Self {
        if let SymMatrix::Sparse(s) = &self.data {
            self.data = SymMatrix::Dense(s.to_dense());
        }
        self
    }

    /// Writes the matrix as a dense grid or as `row,col,value` triplets of
    /// the nonzero entries.
    pub fn write_csv<W: Write>(&self, out: W, triplets: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.dim();
        if triplets {
            w.write_record(["row", "col", "value"])?;
            for i in 0..n {
                let mut row = self.data.offdiag_row(i);
                row.push((i, self.get(i, i)));
                row.sort_by_key(|e| e.0);
                for (j, v) in row {
                    if v != 0.0 {
                        w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
                    }
                }
            }
        } else {
            let dense = self.to_dense();
            for i in 0..n {
                w.write_record((0..n).map(|j| dense[(i, j)].to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_priors(topology: &Topology, priors: &PriorSpec) -> Result<()> {
    if priors.len() != topology.n_agents() {
        return Err(invalid(format!(
            "prior spec covers {} agents, topology has {}",
            priors.len(),
            topology.n_agents()
        )));
    }
    Ok(())
}

fn agent_positions(topology: &Topology) -> Vec<Position> {
    topology.positions()[..topology.n_agents()].to_vec()
}

/// `J = γ(D^C + D^R − A) + Ξ^P` over the agents.
pub fn build_absolute_fim(
    topology: &Topology,
    priors: &PriorSpec,
    link: &LinkModel,
) -> Result<FimMatrix> {
    check_priors(topology, priors)?;
    let (n, g) = (topology.n_agents(), link.gamma());
    let mut s = SymSparse::new(n);
    for i in 0..n {
        s.add_diag(i, g * topology.degree(i) as f64 + priors.xi_p()[i]);
        for &j in topology.neighbors(i) {
            if j > i && j < n {
                s.add_sym(i, j, -g);
            }
        }
    }
    Ok(FimMatrix {
        variant: FimVariant::Absolute,
        gamma: g,
        n_agents: n,
        n_references: 0,
        data: SymMatrix::from_sparse(s),
        positions: Some(agent_positions(topology)),
    })
}

/// `γ(D^C − A)` over the agent subgraph; references are ignored.
pub fn build_relative_fim(topology: &Topology, link: &LinkModel) -> Result<FimMatrix> {
    let (n, g) = (topology.n_agents(), link.gamma());
    let mut s = SymSparse::new(n);
    for i in 0..n {
        s.add_diag(i, g * topology.agent_degree(i) as f64);
        for &j in topology.neighbors(i) {
            if j > i && j < n {
                s.add_sym(i, j, -g);
            }
        }
    }
    Ok(FimMatrix {
        variant: FimVariant::Relative,
        gamma: g,
        n_agents: n,
        n_references: 0,
        data: SymMatrix::from_sparse(s),
        positions: Some(agent_positions(topology)),
    })
}

/// The extended matrix over agents, references and one virtual reference
/// per agent, with `xi_inf` on the reference diagonals. `None` picks
/// `XI_INF_FACTOR` times the largest agent diagonal.
///
/// The agent-to-virtual-reference coupling is the prior information
/// `ξ_P,i = γ·N_p,i`, so the extended walk leaves agent `i` for its
/// virtual reference with probability `N_p,i / (d_i + N_p,i)`.
pub fn build_extended_fim(
    topology: &Topology,
    priors: &PriorSpec,
    link: &LinkModel,
    xi_inf: Option<f64>,
) -> Result<FimMatrix> {
    check_priors(topology, priors)?;
    let (na, nr, g) = (topology.n_agents(), topology.n_references(), link.gamma());
    let n = 2 * na + nr;
    let agent_diag: Vec<f64> = (0..na)
        .map(|i| g * topology.degree(i) as f64 + priors.xi_p()[i])
        .collect();
    let xi_inf = match xi_inf {
        Some(x) if x > 0.0 && x.is_finite() => x,
        Some(x) => {
            return Err(invalid(format!(
                "xi_inf must be positive and finite, got {x}"
            )))
        }
        None => XI_INF_FACTOR * agent_diag.iter().fold(1.0_f64, |m, &d| m.max(d)),
    };
    let mut s = SymSparse::new(n);
    for i in 0..na {
        s.add_diag(i, agent_diag[i]);
        for &j in topology.neighbors(i) {
            if j > i {
                s.add_sym(i, j, -g);
            }
        }
        let xi = priors.xi_p()[i];
        if xi > 0.0 {
            s.add_sym(i, na + nr + i, -xi);
        }
    }
    for k in na..n {
        s.add_diag(k, xi_inf);
    }
    let mut positions = topology.positions().to_vec();
    positions.extend_from_slice(&topology.positions()[..na]);
    Ok(FimMatrix {
        variant: FimVariant::Extended,
        gamma: g,
        n_agents: na,
        n_references: nr,
        data: SymMatrix::from_sparse(s),
        positions: Some(positions),
    })
}

/// Per-agent clock skews, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewSpec {
    alphas: Vec<f64>,
}

impl SkewSpec {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if let Some((i, a)) = alphas
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a > 0.0 && a.is_finite()))
        {
            return Err(invalid(format!(
                "skew of agent {i} must be positive, got {a}"
            )));
        }
        Ok(Self { alphas })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            alphas: vec![1.0; n],
        }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

/// `B⁻¹ J B⁻¹` with `B = diag(α)`.
pub fn apply_skew(fim: &FimMatrix, skews: &SkewSpec) -> Result<FimMatrix> {
    if fim.variant == FimVariant::Extended {
        return Err(NetsyncError::VariantMismatch {
            expected: "absolute or relative",
            got: fim.variant.as_str(),
        });
    }
    if skews.alphas.len() != fim.dim() {
        return Err(invalid(format!(
            "{} skews for {} agents",
            skews.alphas.len(),
            fim.dim()
        )));
    }
    let inv: Vec<f64> = skews.alphas.iter().map(|a| 1.0 / a).collect();
    Ok(FimMatrix {
        data: fim.data.congruence(&inv),
        ..fim.clone()
    })
}

/// `P = I − W⁻¹J` on transient rows, unit rows on absorbing states.
///
/// Stored through the symmetric coupling `−J` off the diagonal and the
/// row weights `w = diag(J)`, so `P_ab = coupling_ab / w_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    variant: FimVariant,
    gamma: f64,
    weights: Vec<f64>,
    absorbing: Vec<bool>,
    coupling: SymSparse,
    positions: Option<Vec<Position>>,
}

impl TransitionMatrix {
    pub fn variant(&self) -> FimVariant {
        self.variant
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Diagonal of the generating information matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.absorbing[i]
    }

    pub fn absorbing_states(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.absorbing[i]).collect()
    }

    pub fn transient_states(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.absorbing[i]).collect()
    }

    pub fn coupling(&self) -> &SymSparse {
        &self.coupling
    }

    pub fn positions(&self) -> Option<&[Position]> {
        self.positions.as_deref()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        if self.absorbing[a] {
            if a == b {
                1.0
            } else {
                0.0
            }
        } else if a == b {
            0.0
        } else {
            self.coupling.get(a, b) / self.weights[a]
        }
    }

    /// Outgoing transitions of row `a` (absorbing rows return `(a, 1)`).
    pub fn row(&self, a: usize) -> Vec<(usize, f64)> {
        if self.absorbing[a] {
            vec![(a, 1.0)]
        } else {
            self.coupling
                .row(a)
                .iter()
                .map(|&(b, c)| (b, c / self.weights[a]))
                .collect()
        }
    }

    pub fn row_sum(&self, a: usize) -> f64 {
        self.row(a).iter().map(|e| e.1).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            for (b, p) in self.row(a) {
                m[(a, b)] = p;
            }
        }
        m
    }

    /// Transient states that cannot reach an absorbing state or a row
    /// that leaks probability mass.
    pub fn unreachable_states(&self) -> Vec<usize> {
        let n = self.n();
        let mut ok = vec![false; n];
        let mut stack = Vec::new();
        for a in 0..n {
            let leaks = !self.absorbing[a] && self.row_sum(a) < 1.0 - 1e-12;
            if self.absorbing[a] || leaks {
                ok[a] = true;
                stack.push(a);
            }
        }
        while let Some(u) = stack.pop() {
            for &(v, _) in self.coupling.row(u) {
                if !ok[v] && !self.absorbing[v] {
                    ok[v] = true;
                    stack.push(v);
                }
            }
        }
        (0..n).filter(|&a| !ok[a]).collect()
    }
}

/// The random walk of an information matrix: absorbing on references and
/// virtual references in the extended variant, sub-stochastic in the
/// absolute variant, row-stochastic in the relative variant.
pub fn build_transition_matrix(fim: &FimMatrix) -> Result<TransitionMatrix> {
    let n = fim.dim();
    let weights = fim.diagonal();
    let absorbing: Vec<bool> = (0..n)
        .map(|i| fim.variant == FimVariant::Extended && i >= fim.n_agents)
        .collect();
    if let Some(node) = (0..n).find(|&i| !absorbing[i] && weights[i] <= 0.0) {
        return Err(NetsyncError::DegenerateNode { node });
    }
    let mut coupling = SymSparse::new(n);
    for i in 0..n {
        for (j, v) in fim.data.offdiag_row(i) {
            if j > i {
                coupling.add_sym(i, j, -v);
            }
        }
    }
    Ok(TransitionMatrix {
        variant: fim.variant,
        gamma: fim.gamma,
        weights,
        absorbing,
        coupling,
        positions: fim.positions.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PriorSpec;

    fn pair(r: f64) -> Topology {
        Topology::new(
            vec![Position::new(0.0, 0.0), Position::new(1.0, 0.0)],
            vec![],
            r,
        )
        .unwrap()
    }

    fn triangle() -> Topology {
        Topology::new(
            vec![
                Position::new(0.0, 0.0),
                Position::new(1.0, 0.0),
                Position::new(0.5, 0.8),
            ],
            vec![],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn absolute_two_agents() {
        let link = LinkModel::unit();
        let pri = PriorSpec::from_xi(vec![1.0, 1.0], &link).unwrap();
        let j = build_absolute_fim(&pair(1.0), &pri, &link).unwrap();
        assert_eq!(
            j.to_dense(),
            DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0])
        );
    }

    #[test]
    fn absolute_reference_only_and_isolated() {
        let link = LinkModel::unit();
        let t = Topology::new(
            vec![Position::new(0.0, 0.0)],
            vec![Position::new(1.0, 0.0)],
            1.0,
        )
        .unwrap();
        let j = build_absolute_fim(&t, &PriorSpec::none(1), &link).unwrap();
        assert_eq!(j.to_dense()[(0, 0)], 1.0);
        let lone = Topology::new(vec![Position::new(0.0, 0.0)], vec![], 1.0).unwrap();
        let j = build_absolute_fim(&lone, &PriorSpec::none(1), &link).unwrap();
        assert_eq!(j.to_dense()[(0, 0)], 0.0);
    }

    #[test]
    fn relative_fixtures() {
        let link = LinkModel::unit();
        let j = build_relative_fim(&pair(1.0), &link).unwrap();
        assert_eq!(
            j.to_dense(),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
        let j = build_relative_fim(&triangle(), &link).unwrap().to_dense();
        let expect =
            DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0]);
        assert_eq!(j, expect);
        assert!((j * nalgebra::DVector::from_element(3, 1.0)).norm() == 0.0);
    }

    #[test]
    fn extended_with_one_reference() {
        let link = LinkModel::unit();
        let t = Topology::new(
            vec![Position::new(0.0, 0.0)],
            vec![Position::new(1.0, 0.0)],
            1.0,
        )
        .unwrap();
        let j = build_extended_fim(&t, &PriorSpec::none(1), &link, Some(1e6)).unwrap();
        assert_eq!(j.dim(), 3);
        let m = j.to_dense();
        assert_eq!((m[(0, 0)], m[(0, 1)], m[(1, 1)]), (1.0, -1.0, 1e6));
        assert_eq!(m[(0, 2)], 0.0);
        let pri = PriorSpec::uniform(1, 2.0, &link).unwrap();
        let m = build_extended_fim(&t, &pri, &link, Some(1e6))
            .unwrap()
            .to_dense();
        assert_eq!(m[(0, 2)], -2.0);
    }

    #[test]
    fn transitions() {
        let link = LinkModel::unit();
        let pri = PriorSpec::uniform(2, 1.0, &link).unwrap();
        let p =
            build_transition_matrix(&build_absolute_fim(&pair(1.0), &pri, &link).unwrap()).unwrap();
        assert_eq!(
            p.to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0])
        );
        let p = build_transition_matrix(&build_relative_fim(&triangle(), &link).unwrap()).unwrap();
        for a in 0..3 {
            assert!((p.row_sum(a) - 1.0).abs() < 1e-15);
        }
        let t = Topology::new(
            vec![Position::new(0.0, 0.0)],
            vec![Position::new(1.0, 0.0)],
            1.0,
        )
        .unwrap();
        let p = build_transition_matrix(
            &build_extended_fim(&t, &PriorSpec::none(1), &link, None).unwrap(),
        )
        .unwrap();
        assert_eq!(p.row(1), vec![(1, 1.0)]);
        assert_eq!(p.absorbing_states(), vec![1, 2]);
    }

    #[test]
    fn degenerate_node_is_named() {
        let lone = Topology::new(vec![Position::new(0.0, 0.0)], vec![], 1.0).unwrap();
        let j = build_absolute_fim(&lone, &PriorSpec::none(1), &LinkModel::unit()).unwrap();
        assert!(matches!(
            build_transition_matrix(&j),
            Err(NetsyncError::DegenerateNode { node: 0 })
        ));
    }

    #[test]
    fn skew_fixture() {
        let j = FimMatrix::from_dense(
            FimVariant::Absolute,
            1.0,
            DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]),
        )
        .unwrap();
        let s = apply_skew(&j, &SkewSpec::new(vec![2.0, 1.0]).unwrap()).unwrap();
        assert_eq!(
            s.to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 2.0])
        );
        assert_eq!(apply_skew(&j, &SkewSpec::unit(2)).unwrap(), j);
        assert!(SkewSpec::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn triplet_dump() {
        let link = LinkModel::unit();
        let j = build_relative_fim(&pair(1.0), &link).unwrap();
        let mut buf = Vec::new();
        j.write_csv(&mut buf, true).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "row,col,value\n0,0,1\n0,1,-1\n1,0,-1\n1,1,1\n"
        );
    }
}
