use std::f64::consts::PI;

use crate::error::{invalid, NetsyncError, Result};
use crate::model::gauss_circle_degree;

/// Largest convolution grid, in cells, before the memory guard trips.
pub const MAX_GRID_CELLS: usize = 1 << 23;

/// Largest symmetry-reduced frequency grid for the spectral evaluation.
pub const MAX_SPECTRAL_CELLS: usize = 20_000_000;

/// Consecutive terms that must meet the tolerance before the Gaussian
/// tail takes over.
pub const CROSSOVER_RUN: usize = 8;

/// Largest crossover step that is searched for.
pub const MAX_CROSSOVER_STEPS: usize = 8192;

fn isqrt(v: i64) -> i64 {
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Uniform step distribution over the non-zero integer offsets within
/// distance `r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeKernel {
    r_max: f64,
    offsets: Vec<(i64, i64)>,
    sigma_r2: f64,
}

impl LatticeKernel {
    pub fn new(r_max: f64) -> Result<Self> {
        if !(r_max >= 1.0 && r_max.is_finite()) {
            return Err(invalid(format!(
                "lattice kernel needs r_max >= 1, got {r_max}"
            )));
        }
        let r = r_max.floor() as i64;
        let r2 = (r_max * r_max * (1.0 + 1e-12)).floor() as i64;
        let offsets: Vec<(i64, i64)> = (-r..=r)
            .flat_map(|x| (-r..=r).map(move |y| (x, y)))
            .filter(|&(x, y)| (x, y) != (0, 0) && x * x + y * y <= r2)
            .collect();
        let sigma_r2 =
            offsets.iter().map(|&(x, _)| (x * x) as f64).sum::<f64>() / offsets.len() as f64;
        Ok(Self {
            r_max,
            offsets,
            sigma_r2,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }

    /// Neighbor count, one less than the Gauss circle number.
    pub fn degree(&self) -> usize {
        self.offsets.len()
    }

    /// Per-axis step variance.
    pub fn sigma_r2(&self) -> f64 {
        self.sigma_r2
    }

    fn reach(&self) -> i64 {
        self.r_max.floor() as i64
    }

    fn radius_sq(&self) -> i64 {
        (self.r_max * self.r_max * (1.0 + 1e-12)).floor() as i64
    }

    /// Every step flips the parity of `x + y`, so returns vanish at odd
    /// times.
    pub fn is_bipartite(&self) -> bool {
        self.offsets.iter().all(|(x, y)| (x + y).rem_euclid(2) == 1)
    }
}

/// Distribution of the walk position after `n` steps on the grid
/// `[−h, h]²`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDistribution {
    pub half_width: i64,
    pub probs: Vec<f64>,
}

impl LatticeDistribution {
    pub fn at(&self, x: i64, y: i64) -> f64 {
        let h = self.half_width;
        if x.abs() > h || y.abs() > h {
            return 0.0;
        }
        let side = (2 * h + 1) as usize;
        self.probs[(y + h) as usize * side + (x + h) as usize]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// `n`-fold self-convolution of the step kernel.
pub fn lattice_walk_distribution(n: usize, r_max: f64) -> Result<LatticeDistribution> {
    let kernel = LatticeKernel::new(r_max)?;
    let h = n as i64 * kernel.reach();
    let side = (2 * h + 1) as usize;
    if side.checked_mul(side).is_none_or(|c| c > MAX_GRID_CELLS) {
        return Err(NetsyncError::MemoryGuard(format!(
            "{n} steps at r_max {r_max} need a {side}x{side} grid"
        )));
    }
    let mut cur = vec![0.0; side * side];
    let mut next = vec![0.0; side * side];
    cur[h as usize * side + h as usize] = 1.0;
    let w = 1.0 / kernel.degree() as f64;
    for step in 0..n as i64 {
        let s = step * kernel.reach();
        next.fill(0.0);
        for y in -s..=s {
            for x in -s..=s {
                let p = cur[(y + h) as usize * side + (x + h) as usize];
                if p == 0.0 {
                    continue;
                }
                let pw = p * w;
                for &(dx, dy) in kernel.offsets() {
                    next[(y + dy + h) as usize * side + (x + dx + h) as usize] += pw;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(LatticeDistribution {
        half_width: h,
        probs: cur,
    })
}

/// Probability that the lattice walk is back at the origin after `n` steps.
pub fn lattice_return_probability(n: usize, r_max: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("step count must be at least 1"));
    }
    Ok(lattice_walk_distribution(n, r_max)?.at(0, 0))
}

/// Return probabilities `p_1..p_max` from the characteristic function on
/// an `L × L` frequency grid; exact while `n·⌊r_max⌋ < L`.
///
/// The eight-fold symmetry of the kernel reduces the grid to
/// `0 ≤ b ≤ a ≤ L/2`, and the characteristic function is assembled as
/// `φ(a, b) = (1/d)Σ_x cos(2πax/L)·S_x(b)` from per-column cosine sums.
struct SpectralReturns {
    weights: Vec<f64>,
    phi: Vec<f64>,
    power: Vec<f64>,
    norm: f64,
}

impl SpectralReturns {
    fn new(kernel: &LatticeKernel, max_steps: usize) -> Result<Self> {
        let r = kernel.reach();
        let l = (max_steps as i64 * r + 1) | 1;
        let h = l / 2;
        let cells = ((h + 1) * (h + 2) / 2) as usize;
        if cells > MAX_SPECTRAL_CELLS {
            return Err(NetsyncError::MemoryGuard(format!(
                "{max_steps} steps at r_max {} need {cells} frequency cells",
                kernel.r_max()
            )));
        }
        let lf = l as f64;
        let cos_at = |a: i64, x: i64| (2.0 * PI * ((a * x) % l) as f64 / lf).cos();
        let reach_y: Vec<i64> = (0..=r).map(|x| isqrt(kernel.radius_sq() - x * x)).collect();
        let cos_ax: Vec<f64> = (0..=h)
            .flat_map(|a| (0..=r).map(move |x| cos_at(a, x)))
            .collect();
        let d = kernel.degree() as f64;
        let mut weights = Vec::with_capacity(cells);
        let mut phi = Vec::with_capacity(cells);
        let mut prefix = vec![0.0; r as usize + 1];
        let mut column = vec![0.0; r as usize + 1];
        for b in 0..=h {
            prefix[0] = 1.0;
            for y in 1..=r {
                prefix[y as usize] = prefix[y as usize - 1] + 2.0 * cos_at(b, y);
            }
            for x in 0..=r {
                column[x as usize] =
                    prefix[reach_y[x as usize] as usize] - if x == 0 { 1.0 } else { 0.0 };
            }
            let mb = if b == 0 { 1.0 } else { 2.0 };
            for a in b..=h {
                let ca =
                    &cos_ax[a as usize * (r as usize + 1)..(a as usize + 1) * (r as usize + 1)];
                let mut s = column[0];
                for x in 1..=r as usize {
                    s += 2.0 * ca[x] * column[x];
                }
                phi.push(s / d);
                let ma = if a == 0 { 1.0 } else { 2.0 };
                weights.push(ma * mb * if a == b { 1.0 } else { 2.0 });
            }
        }
        let power = vec![1.0; phi.len()];
        Ok(Self {
            weights,
            phi,
            power,
            norm: 1.0 / (lf * lf),
        })
    }

    fn next(&mut self) -> f64 {
        let mut s = 0.0;
        for ((p, f), w) in self.power.iter_mut().zip(&self.phi).zip(&self.weights) {
            *p *= f;
            s += w * *p;
        }
        s * self.norm
    }
}

/// Infinite-lattice CDI with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct InfiniteLatticeCdi {
    pub delta: f64,
    /// Last step summed exactly; the Gaussian tail covers the rest.
    pub crossover_n: usize,
    pub exact_part: f64,
    pub tail_part: f64,
    pub sigma_r2: f64,
    /// Adjacency degree of the walk, excluding the origin.
    pub degree: usize,
    /// Exact return probabilities `p_1..p_{crossover + run − 1}`.
    pub returns: Vec<f64>,
}

/// `Δ = Σ_n p_n q^n`, `q = d/(d + N_p)`, with exact `p_n` up to the first
/// step where the local Gaussian `1/(2πnσ_R²)` matches them within
/// `rel_err_tol` for `CROSSOVER_RUN` consecutive steps, and the Gaussian
/// series summed in closed form beyond it.
pub fn infinite_lattice_cdi_numerical(
    r_max: f64,
    n_p: f64,
    rel_err_tol: f64,
) -> Result<InfiniteLatticeCdi> {
    if !(n_p > 0.0) {
        return Err(invalid(format!("n_p must be positive, got {n_p}")));
    }
    if !(rel_err_tol > 0.0 && rel_err_tol < 1.0) {
        return Err(invalid("rel_err_tol must lie in (0, 1)"));
    }
    let kernel = LatticeKernel::new(r_max)?;
    if kernel.is_bipartite() {
        return Err(NetsyncError::ToleranceNotMet {
            tol: rel_err_tol,
            max_steps: 0,
            detail: "periodic walk: return probabilities vanish at odd steps".into(),
        });
    }
    let s2 = kernel.sigma_r2();
    let gauss = |n: usize| 1.0 / (2.0 * PI * n as f64 * s2);
    let mut budget = ((0.5 / rel_err_tol).ceil() as usize).max(4 * CROSSOVER_RUN);
    loop {
        let cap = budget.min(MAX_CROSSOVER_STEPS);
        let mut spectral = SpectralReturns::new(&kernel, cap + CROSSOVER_RUN)?;
        let mut returns = Vec::with_capacity(cap + CROSSOVER_RUN);
        let mut run = 0;
        for n in 1..=cap + CROSSOVER_RUN {
            let p = spectral.next();
            returns.push(p);
            let ok = n >= 2 && p > 0.0 && ((p - gauss(n)) / p).abs() < rel_err_tol;
            run = if ok { run + 1 } else { 0 };
            if run == CROSSOVER_RUN {
                let m = n + 1 - CROSSOVER_RUN;
                return Ok(assemble(&kernel, n_p, m, returns));
            }
        }
        if cap == MAX_CROSSOVER_STEPS {
            let last = *returns.last().expect("non-empty");
            return Err(NetsyncError::ToleranceNotMet {
                tol: rel_err_tol,
                max_steps: cap,
                detail: format!(
                    "relative Gaussian error at step {} is {:.3e}",
                    returns.len(),
                    ((last - gauss(returns.len())) / last).abs()
                ),
            });
        }
        budget *= 2;
    }
}

fn assemble(kernel: &LatticeKernel, n_p: f64, m: usize, returns: Vec<f64>) -> InfiniteLatticeCdi {
    let d = kernel.degree() as f64;
    let q = d / (d + n_p);
    let mut qn = 1.0;
    let mut exact = 0.0;
    let mut harmonic = 0.0;
    for (k, p) in returns.iter().take(m).enumerate() {
        qn *= q;
        exact += p * qn;
        harmonic += qn / (k + 1) as f64;
    }
    let tail = ((d / n_p).ln_1p() - harmonic) / (2.0 * PI * kernel.sigma_r2());
    InfiniteLatticeCdi {
        delta: exact + tail,
        crossover_n: m,
        exact_part: exact,
        tail_part: tail,
        sigma_r2: kernel.sigma_r2(),
        degree: kernel.degree(),
        returns,
    }
}

/// Closed forms for the infinite-lattice CDI at large range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticForm {
    /// `(1/2πσ_R²)(ln(1 + d̄/N_p) − d̄/(d̄ + N_p))` with the exact kernel
    /// variance.
    Full,
    /// `(2/d̄) ln(1 + d̄/N_p)`, from `σ_R² ≈ d̄/4π`.
    Simplified,
}

/// `(1/2πσ²)(ln(1 + d/N_p) − d/(d + N_p))` for an arbitrary degree.
pub fn asymptotic_full(sigma_r2: f64, degree: f64, n_p: f64) -> f64 {
    ((degree / n_p).ln_1p() - degree / (degree + n_p)) / (2.0 * PI * sigma_r2)
}

/// Asymptotic CDI with `d̄` the Gauss circle number of `r_max`.
pub fn infinite_lattice_cdi_asymptotic(r_max: f64, n_p: f64, form: AsymptoticForm) -> Result<f64> {
    if !(n_p > 0.0) {
        return Err(invalid(format!("n_p must be positive, got {n_p}")));
    }
    let d_bar = gauss_circle_degree(r_max) as f64;
    Ok(match form {
        AsymptoticForm::Full => asymptotic_full(LatticeKernel::new(r_max)?.sigma_r2(), d_bar, n_p),
        AsymptoticForm::Simplified => 2.0 / d_bar * (d_bar / n_p).ln_1p(),
    })
}
