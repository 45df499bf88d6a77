use rayon::prelude::*;

use crate::bounds::{fundamental_matrix, Grounded};
use crate::error::{NetsyncError, Result};
use crate::fim::{FimMatrix, FimVariant, TransitionMatrix};
use crate::linalg::{factor_spd, SymSparse};

use super::{CdiMethod, CdiReport};

/// Default cap on the number of series terms.
pub const SERIES_CAP: usize = 1_000_000;

/// `W_T (I − P_TT)` over the transient states, which is symmetric.
fn transient_system(transition: &TransitionMatrix) -> (Vec<usize>, SymSparse) {
    let transient = transition.transient_states();
    let mut index = vec![usize::MAX; transition.n()];
    for (k, &a) in transient.iter().enumerate() {
        index[a] = k;
    }
    let mut m = SymSparse::new(transient.len());
    for (k, &a) in transient.iter().enumerate() {
        m.add_diag(k, transition.weights()[a]);
        for &(b, c) in transition.coupling().row(a) {
            let kb = index[b];
            if kb != usize::MAX && kb > k {
                m.add_sym(k, kb, -c);
            }
        }
    }
    (transient, m)
}

/// `Δ_ii = [(I − P)⁻¹]_ii − 1` for every transient state, in index order.
///
/// Uses `(I − P_TT)⁻¹ = M⁻¹ W_T` with `M = W_T(I − P_TT)` symmetric, so
/// only the diagonal of `M⁻¹` is needed.
pub fn cdi_exact(transition: &TransitionMatrix) -> Result<Vec<f64>> {
    let (transient, m) = transient_system(transition);
    let positions: Option<Vec<_>> = transition
        .positions()
        .map(|p| transient.iter().map(|&a| p[a]).collect());
    let factor = factor_spd(&m, positions.as_deref()).map_err(|zp| {
        let mut unreachable = transition.unreachable_states();
        if unreachable.is_empty() {
            unreachable.push(transient[zp.index]);
        }
        NetsyncError::NotSynchronizable { unreachable }
    })?;
    Ok(factor
        .inverse_diagonal()
        .iter()
        .zip(&transient)
        .map(|(g, &a)| transition.weights()[a] * g - 1.0)
        .collect())
}

/// Block contraction of the transient walk: the smallest `k` with
/// `ρ_k = max row sum of P_TTᵏ ≤ 1/2`, or `None` if none exists within
/// `cap` steps. Agents without any absorption of their own have unit row
/// sums, so single-step sums alone say nothing.
fn block_contraction(rows: &[Vec<(usize, f64)>], cap: usize) -> Option<(usize, f64)> {
    let mut u = vec![1.0; rows.len()];
    let mut next = vec![0.0; rows.len()];
    for k in 1..=cap {
        for (a, row) in rows.iter().enumerate() {
            next[a] = row.iter().map(|&(b, p)| p * u[b]).sum();
        }
        std::mem::swap(&mut u, &mut next);
        let rho = u.iter().copied().fold(0.0_f64, f64::max);
        if rho <= 0.5 {
            return Some((k, rho));
        }
    }
    None
}

/// Partial sums `Σ_{n=1}^{M} diag(P^n)`. With `ρ_k` from
/// [`block_contraction`], `‖P^m‖_∞ ≤ ρ_k^{⌊m/k⌋}`, so the neglected tail is
/// at most `k ρ_k^{⌊(M+1)/k⌋}/(1 − ρ_k)`; `M` is the smallest value that
/// brings this below `tol`.
pub fn cdi_series(transition: &TransitionMatrix, tol: f64, cap: usize) -> Result<CdiReport> {
    if transition.variant() == FimVariant::Relative {
        return Err(NetsyncError::VariantMismatch {
            expected: "absolute or extended",
            got: "relative",
        });
    }
    let transient = transition.transient_states();
    let mut index = vec![usize::MAX; transition.n()];
    for (k, &a) in transient.iter().enumerate() {
        index[a] = k;
    }
    let rows: Vec<Vec<(usize, f64)>> = transient
        .iter()
        .map(|&a| {
            transition
                .row(a)
                .into_iter()
                .filter(|(b, _)| index[*b] != usize::MAX)
                .map(|(b, p)| (index[b], p))
                .collect()
        })
        .collect();
    let one_step = rows
        .iter()
        .map(|r| r.iter().map(|e| e.1).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let Some((k, rho)) = block_contraction(&rows, cap) else {
        return Err(NetsyncError::SeriesDivergence {
            cap,
            contraction: one_step,
        });
    };
    let (terms, tail) = if rho == 0.0 {
        // P_TT is nilpotent of index at most k.
        (k, 0.0)
    } else {
        let kf = k as f64;
        let blocks = ((tol * (1.0 - rho) / kf).ln() / rho.ln()).ceil().max(1.0);
        let terms = blocks * kf - 1.0;
        if terms > cap as f64 {
            return Err(NetsyncError::SeriesDivergence {
                cap,
                contraction: one_step,
            });
        }
        (terms as usize, kf * rho.powf(blocks) / (1.0 - rho))
    };
    let n = transient.len();
    let delta: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut v = vec![0.0; n];
            let mut next = vec![0.0; n];
            v[i] = 1.0;
            let mut acc = 0.0;
            for _ in 0..terms {
                for (a, row) in rows.iter().enumerate() {
                    next[a] = row.iter().map(|&(b, p)| p * v[b]).sum();
                }
                std::mem::swap(&mut v, &mut next);
                acc += v[i];
            }
            acc
        })
        .collect();
    Ok(CdiReport {
        delta,
        method: CdiMethod::Series,
        truncation_n: Some(terms),
        tail_bound: Some(tail),
        stderr: None,
        truncated_walks: None,
    })
}

/// `Δ̃_ii = Z_ii − (1/N)Σ_j Z_ji − (1 − 1/N)` with the fundamental matrix
/// `Z = (I − P + 1πᵀ)⁻¹` and `π_i ∝ d_i`.
pub fn rel_cdi_exact(transition: &TransitionMatrix) -> Result<Vec<f64>> {
    let z = fundamental_matrix(transition)?;
    let n = transition.n();
    let nf = n as f64;
    Ok((0..n)
        .map(|i| {
            let col_mean = (0..n).map(|j| z[(j, i)]).sum::<f64>() / nf;
            z[(i, i)] - col_mean - (1.0 - 1.0 / nf)
        })
        .collect())
}

/// Average relative CDI `(1/N)Σ_i Δ̃_ii` from one grounded factorization,
/// for networks too large for the dense fundamental matrix.
///
/// With `Ĝ` the grounded inverse of `D − A`,
/// `tr Z = Σ_i Ĝ_ii d_i − πᵀ Ĝ d + 1` and `1ᵀZ1 = N`.
pub fn mean_rel_cdi(fim: &FimMatrix) -> Result<f64> {
    if fim.variant() != FimVariant::Relative {
        return Err(NetsyncError::VariantMismatch {
            expected: "relative",
            got: fim.variant().as_str(),
        });
    }
    let n = fim.dim();
    let nf = n as f64;
    if n == 1 {
        return Ok(0.0);
    }
    let g = fim.gamma();
    let g_hat = Grounded::new(&fim.to_sparse(), fim.positions())?;
    let d: Vec<f64> = fim.diagonal().iter().map(|w| w / g).collect();
    let total: f64 = d.iter().sum();
    // Ĝ for D − A is γ times the grounded inverse of J.
    let gdiag = g_hat.diagonal();
    let gd = g_hat.apply(&d);
    let first: f64 = (0..n).map(|i| g * gdiag[i] * d[i]).sum();
    let second: f64 = (0..n).map(|i| d[i] / total * g * gd[i]).sum();
    Ok((first - second) / nf - (1.0 - 1.0 / nf))
}
