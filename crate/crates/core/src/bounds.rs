//! Absolute and relative synchronization error bounds.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::cdi::cdi_exact;
use crate::error::{invalid, NetsyncError, Result};
use crate::fim::{
    build_absolute_fim, build_relative_fim, build_transition_matrix, FimMatrix, FimVariant,
};
use crate::linalg::{factor_spd, BandedLdl, SymSparse};
use crate::model::{LinkModel, Position, PriorSpec, Topology};
use crate::rng::rng_from_seed;

/// Eigenvalues below this fraction of the largest are treated as zero.
const NULL_EIGEN_TOL: f64 = 1e-9;

/// Largest side for which the bound report computes a condition number.
const CONDITION_LIMIT: usize = 500;

fn require(fim: &FimMatrix, variant: FimVariant) -> Result<()> {
    if fim.variant() != variant {
        return Err(NetsyncError::VariantMismatch {
            expected: variant.as_str(),
            got: fim.variant().as_str(),
        });
    }
    Ok(())
}

/// Agents with no path, through other agents, to a reference neighbor or
/// to an agent holding prior information.
pub fn unreachable_agents(topology: &Topology, priors: &PriorSpec) -> Vec<usize> {
    let n = topology.n_agents();
    let mut ok: Vec<bool> = (0..n)
        .map(|i| priors.xi_p().get(i).is_some_and(|&x| x > 0.0) || topology.reference_degree(i) > 0)
        .collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| ok[i]).collect();
    while let Some(u) = stack.pop() {
        for &v in topology.neighbors(u) {
            if v < n && !ok[v] {
                ok[v] = true;
                stack.push(v);
            }
        }
    }
    (0..n).filter(|&i| !ok[i]).collect()
}

/// The same reachability test read off an absolute information matrix:
/// a row is a source when its diagonal exceeds its off-diagonal mass.
fn uninformed_rows(fim: &FimMatrix) -> Vec<usize> {
    let n = fim.dim();
    let diag = fim.diagonal();
    let rows: Vec<Vec<(usize, f64)>> = (0..n).map(|i| fim.data().offdiag_row(i)).collect();
    let mut ok: Vec<bool> = (0..n)
        .map(|i| diag[i] - rows[i].iter().map(|e| e.1.abs()).sum::<f64>() > 1e-12 * diag[i].abs())
        .collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| ok[i]).collect();
    while let Some(u) = stack.pop() {
        for &(v, _) in &rows[u] {
            if !ok[v] {
                ok[v] = true;
                stack.push(v);
            }
        }
    }
    (0..n).filter(|&i| !ok[i]).collect()
}

pub(crate) fn factor_absolute(fim: &FimMatrix) -> Result<BandedLdl> {
    factor_spd(&fim.to_sparse(), fim.positions()).map_err(|zp| {
        let mut unreachable = uninformed_rows(fim);
        if unreachable.is_empty() {
            unreachable.push(zp.index);
        }
        NetsyncError::NotSynchronizable { unreachable }
    })
}

/// `s(θ_i) = [J⁻¹]_ii` for every agent.
pub fn aseb_direct(fim: &FimMatrix) -> Result<Vec<f64>> {
    require(fim, FimVariant::Absolute)?;
    Ok(factor_absolute(fim)?.inverse_diagonal())
}

/// `s(θ_i) = (1 + Δ_ii) / (γ(d_A,i + d_R,i) + ξ_P,i)`.
pub fn aseb_via_cdi(
    topology: &Topology,
    priors: &PriorSpec,
    link: &LinkModel,
    cdi: &[f64],
) -> Result<Vec<f64>> {
    let n = topology.n_agents();
    if cdi.len() != n || priors.len() != n {
        return Err(invalid("CDI and prior vectors must cover every agent"));
    }
    let infinite: Vec<usize> = (0..n).filter(|&i| !cdi[i].is_finite()).collect();
    if !infinite.is_empty() {
        return Err(NetsyncError::NotSynchronizable {
            unreachable: infinite,
        });
    }
    Ok((0..n)
        .map(|i| (1.0 + cdi[i]) / (link.gamma() * topology.degree(i) as f64 + priors.xi_p()[i]))
        .collect())
}

/// `tr(J†)` together with the agent count; the RSEB is their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rseb {
    pub trace: f64,
    pub n_agents: usize,
}

impl Rseb {
    pub fn rseb(&self) -> f64 {
        self.trace / self.n_agents as f64
    }
}

/// Pseudo-inverse trace plus its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverse {
    pub rseb: Rseb,
    pub diagonal: Vec<f64>,
}

/// `tr(J†)/N_a` by symmetric eigendecomposition, dropping the null
/// direction of the connected agent graph.
pub fn rseb_pseudo(fim: &FimMatrix) -> Result<PseudoInverse> {
    require(fim, FimVariant::Relative)?;
    let n = fim.dim();
    let eig = SymmetricEigen::new(fim.to_dense());
    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let keep: Vec<usize> = (0..n)
        .filter(|&k| eig.eigenvalues[k] > NULL_EIGEN_TOL * top)
        .collect();
    if n > 0 && n - keep.len() > 1 {
        return Err(NetsyncError::Disconnected {
            components: n - keep.len(),
        });
    }
    let diagonal: Vec<f64> = (0..n)
        .map(|i| {
            keep.iter()
                .map(|&k| eig.eigenvectors[(i, k)].powi(2) / eig.eigenvalues[k])
                .sum()
        })
        .collect();
    Ok(PseudoInverse {
        rseb: Rseb {
            trace: diagonal.iter().sum(),
            n_agents: n,
        },
        diagonal,
    })
}

fn components(pattern: &SymSparse) -> usize {
    let n = pattern.n();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, _) in pattern.row(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Grounded inverse `Ĝ` of a connected Laplacian-like matrix: the last
/// node is removed and the rest factored.
pub(crate) struct Grounded {
    factor: BandedLdl,
    n: usize,
}

impl Grounded {
    pub(crate) fn new(lap: &SymSparse, positions: Option<&[Position]>) -> Result<Self> {
        let n = lap.n();
        let c = components(lap);
        if c > 1 {
            return Err(NetsyncError::Disconnected { components: c });
        }
        let reduced = lap.without(n - 1);
        let pos = positions.map(|p| &p[..n - 1]);
        let factor =
            factor_spd(&reduced, pos).map_err(|_| NetsyncError::Disconnected { components: c })?;
        Ok(Self { factor, n })
    }

    /// `Ĝ x`, with a zero in the grounded slot.
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.factor.solve(&x[..self.n - 1]);
        y.push(0.0);
        y
    }

    pub(crate) fn diagonal(&self) -> Vec<f64> {
        let mut d = self.factor.inverse_diagonal();
        d.push(0.0);
        d
    }
}

/// `tr(J†)/N_a` through a grounded factorization; `J† = C Ĝ C` with `C`
/// the centering matrix. Cost is that of one banded factorization.
pub fn rseb_grounded(fim: &FimMatrix) -> Result<PseudoInverse> {
    require(fim, FimVariant::Relative)?;
    let n = fim.dim();
    if n == 1 {
        return Ok(PseudoInverse {
            rseb: Rseb {
                trace: 0.0,
                n_agents: 1,
            },
            diagonal: vec![0.0],
        });
    }
    let g = Grounded::new(&fim.to_sparse(), fim.positions())?;
    let gd = g.diagonal();
    let g1 = g.apply(&vec![1.0; n]);
    let nf = n as f64;
    let total: f64 = g1.iter().sum();
    let diagonal: Vec<f64> = (0..n)
        .map(|i| gd[i] - 2.0 * g1[i] / nf + total / (nf * nf))
        .collect();
    Ok(PseudoInverse {
        rseb: Rseb {
            trace: diagonal.iter().sum(),
            n_agents: n,
        },
        diagonal,
    })
}

/// `Z = (I − P + 1πᵀ)⁻¹` for a connected relative walk, `π ∝ w`.
pub(crate) fn fundamental_matrix(
    transition: &crate::fim::TransitionMatrix,
) -> Result<DMatrix<f64>> {
    if transition.variant() != FimVariant::Relative {
        return Err(NetsyncError::VariantMismatch {
            expected: "relative",
            got: transition.variant().as_str(),
        });
    }
    let c = components(transition.coupling());
    if c > 1 {
        return Err(NetsyncError::Disconnected { components: c });
    }
    let n = transition.n();
    let w = transition.weights();
    let total: f64 = w.iter().sum();
    let mut m = -transition.to_dense();
    for a in 0..n {
        m[(a, a)] += 1.0;
        for b in 0..n {
            m[(a, b)] += w[b] / total;
        }
    }
    m.lu()
        .try_inverse()
        .ok_or(NetsyncError::Disconnected { components: c })
}

/// `tr(J†) = γ⁻¹ tr(C Z (D^C)⁻¹ C)` from the relative walk.
pub fn rseb_via_z(transition: &crate::fim::TransitionMatrix) -> Result<Rseb> {
    let z = fundamental_matrix(transition)?;
    let n = transition.n();
    let nf = n as f64;
    let w = transition.weights();
    let trace = (0..n)
        .map(|i| {
            let col_mean: f64 = (0..n).map(|j| z[(j, i)]).sum::<f64>() / nf;
            (z[(i, i)] - col_mean) / w[i]
        })
        .sum();
    Ok(Rseb { trace, n_agents: n })
}

/// Numerator used when assembling the RSEB from relative CDIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelativeNumerator {
    /// `1 − 1/N_a + Δ̃_ii`, consistent with the fundamental-matrix route.
    Corrected,
    /// `1 + Δ̃_ii` as commonly stated; overestimates the trace.
    Printed,
}

/// `tr(J†) = Σ_i (numerator_i) / (γ d_A,i)`.
pub fn rseb_via_relative_cdi(
    rel_cdi: &[f64],
    degrees: &[f64],
    link: &LinkModel,
    numerator: RelativeNumerator,
) -> Result<Rseb> {
    let n = rel_cdi.len();
    if degrees.len() != n {
        return Err(invalid("relative CDI and degree vectors differ in length"));
    }
    let shift = match numerator {
        RelativeNumerator::Corrected => 1.0 - 1.0 / n as f64,
        RelativeNumerator::Printed => 1.0,
    };
    let trace = (0..n)
        .map(|i| (shift + rel_cdi[i]) / (link.gamma() * degrees[i]))
        .sum();
    Ok(Rseb { trace, n_agents: n })
}

/// Deviations between three formulations of an agent with unbounded
/// prior information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEquivalence {
    /// Reduced inverse of `J` with `ξ_P,k = ξ_inf` against the inverse of
    /// `J` with row and column `k` deleted.
    pub infinite_vs_reduced: f64,
    /// The same reduced inverse against the network with `k` replaced by a
    /// reference node.
    pub infinite_vs_reference: f64,
    /// Deleted-row formulation against the reference formulation.
    pub reduced_vs_reference: f64,
}

impl NodeEquivalence {
    pub fn max(&self) -> f64 {
        self.infinite_vs_reduced
            .max(self.infinite_vs_reference)
            .max(self.reduced_vs_reference)
    }
}

fn dense_spd_inverse(
    m: DMatrix<f64>,
    unreachable: impl FnOnce() -> Vec<usize>,
) -> Result<DMatrix<f64>> {
    match m.cholesky() {
        Some(c) => Ok(c.inverse()),
        None => Err(NetsyncError::NotSynchronizable {
            unreachable: unreachable(),
        }),
    }
}

/// Largest entrywise deviation, each entry scaled by `√(b_ii b_jj)`, which
/// bounds `|b_ij|` for SPD `b` and stays meaningful where `b_ij` is a
/// structural zero (agents separated once `k` is removed).
fn max_rel_dev(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let scale = (b[(i, i)] * b[(j, j)]).sqrt().max(f64::MIN_POSITIVE);
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / scale);
        }
    }
    worst
}

fn delete(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    m.clone().remove_row(k).remove_column(k)
}

/// Compares an agent given prior information `xi_inf` against the same
/// agent removed, and against it turned into a reference node.
pub fn check_node_equivalence(
    topology: &Topology,
    priors: &PriorSpec,
    link: &LinkModel,
    agent_k: usize,
    xi_inf: f64,
) -> Result<NodeEquivalence> {
    if agent_k >= topology.n_agents() {
        return Err(invalid(format!("agent {agent_k} does not exist")));
    }
    let boosted = priors.with_xi(agent_k, xi_inf, link);
    let j_inf = build_absolute_fim(topology, &boosted, link)?.to_dense();
    let full_inv = dense_spd_inverse(j_inf.clone(), || unreachable_agents(topology, &boosted))?;
    let reduced_of_inverse = delete(&full_inv, agent_k);

    let (promoted, kept) = topology.promote_to_reference(agent_k)?;
    let rest = priors.without(agent_k);
    let lost = || {
        unreachable_agents(&promoted, &rest)
            .into_iter()
            .map(|m| kept[m])
            .collect()
    };
    let inverse_of_reduced = dense_spd_inverse(delete(&j_inf, agent_k), lost)?;
    let j_ref = build_absolute_fim(&promoted, &rest, link)?.to_dense();
    let reference_inv = dense_spd_inverse(j_ref, lost)?;

    Ok(NodeEquivalence {
        infinite_vs_reduced: max_rel_dev(&reduced_of_inverse, &inverse_of_reduced),
        infinite_vs_reference: max_rel_dev(&reduced_of_inverse, &reference_inv),
        reduced_vs_reference: max_rel_dev(&inverse_of_reduced, &reference_inv),
    })
}

/// `diag(B J⁻¹ B)` for known skews: the skew-free bound scaled by `α_i²`.
pub fn skewed_bound(aseb: &[f64], alphas: &[f64]) -> Result<Vec<f64>> {
    if aseb.len() != alphas.len() {
        return Err(invalid("skew and bound vectors differ in length"));
    }
    Ok(aseb.iter().zip(alphas).map(|(s, a)| a * a * s).collect())
}

/// Independent uniform skews on `[low, high]`, required to have mean one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSkews {
    pub low: f64,
    pub high: f64,
}

impl UniformSkews {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low > 0.0 && high >= low) {
            return Err(invalid(format!(
                "skew range [{low}, {high}] must be positive and ordered"
            )));
        }
        if ((low + high) / 2.0 - 1.0).abs() > 1e-12 {
            return Err(invalid("skew distribution must have mean 1"));
        }
        Ok(Self { low, high })
    }

    /// `E[α²] = 1 + (high − low)²/12`.
    pub fn second_moment(&self) -> f64 {
        1.0 + (self.high - self.low).powi(2) / 12.0
    }
}

/// Monte Carlo estimate of `diag E{B J⁻¹ B}` against `diag J⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewExpectation {
    pub base: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl SkewExpectation {
    pub fn ratio(&self) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.base)
            .map(|(m, b)| m / b)
            .collect()
    }

    pub fn ratio_stderr(&self) -> Vec<f64> {
        self.stderr
            .iter()
            .zip(&self.base)
            .map(|(s, b)| s / b)
            .collect()
    }

    /// `mean − base`, non-negative in expectation.
    pub fn margin(&self) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.base)
            .map(|(m, b)| m - b)
            .collect()
    }
}

pub fn skewed_bound_expectation(
    fim: &FimMatrix,
    skews: UniformSkews,
    trials: usize,
    seed: u64,
) -> Result<SkewExpectation> {
    if trials < 2 {
        return Err(invalid(
            "at least two trials are needed for a standard error",
        ));
    }
    let base = aseb_direct(fim)?;
    let n = base.len();
    let mut rng = rng_from_seed(seed);
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for _ in 0..trials {
        for i in 0..n {
            let a = if skews.high > skews.low {
                rng.random_range(skews.low..skews.high)
            } else {
                skews.low
            };
            let v = a * a * base[i];
            sum[i] += v;
            sum_sq[i] += v * v;
        }
    }
    let t = trials as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / t).collect();
    let stderr = (0..n)
        .map(|i| ((sum_sq[i] - t * mean[i] * mean[i]).max(0.0) / (t - 1.0) / t).sqrt())
        .collect();
    Ok(SkewExpectation { base, mean, stderr })
}

/// Bounds for one network, cross-checked across methods.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub aseb: Vec<f64>,
    /// Undefined when the agent graph is disconnected.
    pub rseb: Option<f64>,
    pub method: String,
    /// Largest relative disagreement between the methods that were run.
    pub max_method_deviation: f64,
    /// Spectral condition number of the absolute FIM, for small networks.
    pub condition_number: Option<f64>,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn bound_report(
    topology: &Topology,
    priors: &PriorSpec,
    link: &LinkModel,
) -> Result<BoundReport> {
    let fim = build_absolute_fim(topology, priors, link)?;
    let direct = aseb_direct(&fim)?;
    let cdi = cdi_exact(&build_transition_matrix(&fim)?)?;
    let via_cdi = aseb_via_cdi(topology, priors, link, &cdi)?;
    let mut dev = direct
        .iter()
        .zip(&via_cdi)
        .fold(0.0_f64, |m, (a, b)| m.max(rel_dev(*b, *a)));
    let mut method = String::from("aseb:direct+cdi");

    let rel = build_relative_fim(topology, link)?;
    let rseb = match rseb_grounded(&rel) {
        Ok(g) => {
            method.push_str(";rseb:grounded");
            if rel.dim() <= CONDITION_LIMIT {
                let p = rseb_pseudo(&rel)?;
                dev = dev.max(rel_dev(g.rseb.trace, p.rseb.trace));
                method.push_str("+pseudo");
            }
            Some(g.rseb.rseb())
        }
        Err(NetsyncError::Disconnected { .. }) => None,
        Err(e) => return Err(e),
    };

    let condition_number = (fim.dim() <= CONDITION_LIMIT && fim.dim() > 0).then(|| {
        let ev = SymmetricEigen::new(fim.to_dense()).eigenvalues;
        let hi = ev.iter().fold(f64::MIN, |m, &v| m.max(v));
        let lo = ev.iter().fold(f64::MAX, |m, &v| m.min(v));
        hi / lo
    });
    Ok(BoundReport {
        aseb: direct,
        rseb,
        method,
        max_method_deviation: dev,
        condition_number,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fim::build_transition_matrix;
    use crate::model::Position;

    fn j2() -> FimMatrix {
        FimMatrix::from_dense(
            FimVariant::Absolute,
            1.0,
            DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]),
        )
        .unwrap()
    }

    fn path2() -> Topology {
        Topology::new(
            vec![Position::new(0.0, 0.0), Position::new(1.0, 0.0)],
            vec![],
            1.0,
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
    fn aseb_fixtures() {
        let one =
            FimMatrix::from_dense(FimVariant::Absolute, 1.0, DMatrix::from_element(1, 1, 1.0))
                .unwrap();
        assert_eq!(aseb_direct(&one).unwrap(), vec![1.0]);
        let s = aseb_direct(&j2()).unwrap();
        assert!(s.iter().all(|v| (v - 2.0 / 3.0).abs() < 1e-15));
        let sing = FimMatrix::from_dense(
            FimVariant::Absolute,
            1.0,
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]),
        )
        .unwrap();
        match aseb_direct(&sing) {
            Err(NetsyncError::NotSynchronizable { unreachable }) => {
                assert_eq!(unreachable, vec![0, 1])
            }
            other => panic!("expected synchronizability error, got {other:?}"),
        }
    }

    #[test]
    fn aseb_via_cdi_fixtures() {
        let link = LinkModel::unit();
        let pri = PriorSpec::uniform(2, 1.0, &link).unwrap();
        let s = aseb_via_cdi(&path2(), &pri, &link, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((s[0] - 2.0 / 3.0).abs() < 1e-15);
        let t = Topology::new(vec![Position::new(0.0, 0.0)], vec![], 1.0).unwrap();
        let pri = PriorSpec::from_xi(vec![4.0], &link).unwrap();
        assert_eq!(aseb_via_cdi(&t, &pri, &link, &[0.0]).unwrap(), vec![0.25]);
        assert!(aseb_via_cdi(&t, &pri, &link, &[f64::INFINITY]).is_err());
    }

    #[test]
    fn rseb_fixtures() {
        let link = LinkModel::unit();
        let p = rseb_pseudo(&build_relative_fim(&path2(), &link).unwrap()).unwrap();
        assert!((p.rseb.trace - 0.5).abs() < 1e-12 && (p.rseb.rseb() - 0.25).abs() < 1e-12);
        let rel = build_relative_fim(&triangle(), &link).unwrap();
        let p = rseb_pseudo(&rel).unwrap();
        assert!((p.rseb.trace - 2.0 / 3.0).abs() < 1e-12);
        let g = rseb_grounded(&rel).unwrap();
        assert!((g.rseb.trace - 2.0 / 3.0).abs() < 1e-12);
        for i in 0..3 {
            assert!((g.diagonal[i] - p.diagonal[i]).abs() < 1e-12);
        }
        let z = rseb_via_z(&build_transition_matrix(&rel).unwrap()).unwrap();
        assert!((z.trace - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rseb_scales_inversely_with_gamma() {
        let fast = LinkModel::new(4, 2.0).unwrap();
        let p1 =
            rseb_pseudo(&build_relative_fim(&triangle(), &LinkModel::unit()).unwrap()).unwrap();
        let p4 = rseb_pseudo(&build_relative_fim(&triangle(), &fast).unwrap()).unwrap();
        assert!((p1.rseb.rseb() / p4.rseb.rseb() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_relative_is_rejected() {
        let t = Topology::new(
            vec![Position::new(0.0, 0.0), Position::new(5.0, 0.0)],
            vec![],
            1.0,
        )
        .unwrap();
        let rel = build_relative_fim(&t, &LinkModel::unit()).unwrap();
        assert!(matches!(
            rseb_pseudo(&rel),
            Err(NetsyncError::Disconnected { .. })
        ));
        assert!(matches!(
            rseb_grounded(&rel),
            Err(NetsyncError::Disconnected { .. })
        ));
    }

    #[test]
    fn relative_cdi_numerators() {
        let link = LinkModel::unit();
        let c = rseb_via_relative_cdi(
            &[-0.25, -0.25],
            &[1.0, 1.0],
            &link,
            RelativeNumerator::Corrected,
        )
        .unwrap();
        assert!((c.trace - 0.5).abs() < 1e-15);
        let d = [-2.0 / 9.0; 3];
        let c = rseb_via_relative_cdi(&d, &[2.0; 3], &link, RelativeNumerator::Corrected).unwrap();
        assert!((c.trace - 2.0 / 3.0).abs() < 1e-15);
        let p = rseb_via_relative_cdi(&d, &[2.0; 3], &link, RelativeNumerator::Printed).unwrap();
        assert!((p.trace - 7.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn uninformed_component_is_singular() {
        let link = LinkModel::unit();
        let t = Topology::new(
            vec![
                Position::new(0.0, 0.0),
                Position::new(1.0, 0.0),
                Position::new(5.0, 0.0),
            ],
            vec![],
            1.0,
        )
        .unwrap();
        let pri = PriorSpec::from_xi(vec![1.0, 0.0, 0.0], &link).unwrap();
        match check_node_equivalence(&t, &pri, &link, 0, 1e12) {
            Err(NetsyncError::NotSynchronizable { unreachable }) => {
                assert_eq!(unreachable, vec![2])
            }
            other => panic!("unexpected {other:?}"),
        }
        let d = check_node_equivalence(
            &path2(),
            &PriorSpec::from_xi(vec![1.0, 0.0], &link).unwrap(),
            &link,
            0,
            1e12,
        )
        .unwrap();
        assert_eq!(d.reduced_vs_reference, 0.0);
        assert!(d.max() < 1e-10);
    }

    #[test]
    fn unit_skews_give_equality() {
        let e =
            skewed_bound_expectation(&j2(), UniformSkews::new(1.0, 1.0).unwrap(), 10, 3).unwrap();
        assert!(e.ratio().iter().all(|r| (r - 1.0).abs() < 1e-15));
        assert!(e.margin().iter().all(|m| m.abs() < 1e-15));
        assert!(UniformSkews::new(0.8, 1.1).is_err());
        assert!(
            (UniformSkews::new(0.9, 1.1).unwrap().second_moment() - (1.0 + 0.01 / 3.0)).abs()
                < 1e-15
        );
    }

    #[test]
    fn unreachable_listing() {
        let link = LinkModel::unit();
        let t = Topology::new(
            vec![
                Position::new(0.0, 0.0),
                Position::new(1.0, 0.0),
                Position::new(5.0, 0.0),
            ],
            vec![],
            1.0,
        )
        .unwrap();
        let pri = PriorSpec::from_xi(vec![1.0, 0.0, 0.0], &link).unwrap();
        assert_eq!(unreachable_agents(&t, &pri), vec![2]);
    }
}
