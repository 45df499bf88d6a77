//! Banded LDLᵀ factorization with selected inversion of the diagonal.

use super::ordering::Permutation;
use super::sparse::SymSparse;

/// A pivot at or below this fraction of the largest diagonal entry is
/// treated as zero.
pub const PIVOT_RELATIVE_TOL: f64 = 1e-12;

/// Failure to factor: `index` is the original row whose pivot vanished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPivot {
    pub index: usize,
    pub pivot: f64,
}

/// `P A Pᵀ = L D Lᵀ` for a symmetric positive definite band matrix.
///
/// Storage is column-major over the lower band: entry `(i, j)` with
/// `j <= i <= j + bw` lives at `j * (bw + 1) + (i - j)`; the diagonal slot
/// holds `d_j`.
#[derive(Debug, Clone)]
pub struct BandedLdl {
    n: usize,
    bw: usize,
    perm: Permutation,
    band: Vec<f64>,
}

impl BandedLdl {
    pub fn factor(a: &SymSparse, perm: Permutation) -> Result<Self, ZeroPivot> {
        let n = a.n();
        let bw = perm.bandwidth(&a.pattern());
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            let pi = perm.inv[i];
            band[pi * w] = a.diag()[i];
            for &(j, v) in a.row(i) {
                let pj = perm.inv[j];
                if pi > pj {
                    band[pj * w + (pi - pj)] = v;
                }
            }
        }
        let scale = a.diag().iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let tol = PIVOT_RELATIVE_TOL * scale;
        let mut t = vec![0.0; bw];
        for j in 0..n {
            let d = band[j * w];
            if d.is_nan() || d <= tol {
                return Err(ZeroPivot {
                    index: perm.perm[j],
                    pivot: d,
                });
            }
            let m = bw.min(n - 1 - j);
            let col = j * w;
            t[..m].copy_from_slice(&band[col + 1..col + 1 + m]);
            for (r, x) in band[col + 1..col + 1 + m].iter_mut().enumerate() {
                *x = t[r] / d;
            }
            for k in 0..m {
                let tk = t[k];
                if tk == 0.0 {
                    continue;
                }
                let f = tk / d;
                let kc = (j + 1 + k) * w;
                for i in k..m {
                    band[kc + (i - k)] -= t[i] * f;
                }
            }
        }
        Ok(Self { n, bw, perm, band })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `A x = b` in the original indexing.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, w) = (self.n, self.bw + 1);
        let mut y: Vec<f64> = self.perm.perm.iter().map(|&o| b[o]).collect();
        for j in 0..n {
            let m = self.bw.min(n - 1 - j);
            let yj = y[j];
            for r in 1..=m {
                y[j + r] -= self.band[j * w + r] * yj;
            }
        }
        for j in 0..n {
            y[j] /= self.band[j * w];
        }
        for j in (0..n).rev() {
            let m = self.bw.min(n - 1 - j);
            let s: f64 = (1..=m).map(|r| self.band[j * w + r] * y[j + r]).sum();
            y[j] -= s;
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        (0..self.n).map(|j| self.band[j * (self.bw + 1)].ln()).sum()
    }

    /// Diagonal of `A⁻¹` in the original indexing, computed by the
    /// Takahashi recurrences restricted to the band.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let l = &self.band;
        let mut z = vec![0.0; n * w];
        let mut y = vec![0.0; bw];
        for j in (0..n).rev() {
            let m = bw.min(n - 1 - j);
            let lj = &l[j * w + 1..j * w + 1 + m];
            y[..m].fill(0.0);
            for k in 0..m {
                let zc = (j + 1 + k) * w;
                let lk = lj[k];
                let mut acc = z[zc] * lk;
                for i in k + 1..m {
                    let zik = z[zc + (i - k)];
                    y[i] += zik * lk;
                    acc += zik * lj[i];
                }
                y[k] += acc;
            }
            let mut zjj = 1.0 / l[j * w];
            for k in 0..m {
                z[j * w + 1 + k] = -y[k];
                zjj += lj[k] * y[k];
            }
            z[j * w] = zjj;
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.perm.iter().enumerate() {
            out[old] = z[new * w];
        }
        out
    }
}
