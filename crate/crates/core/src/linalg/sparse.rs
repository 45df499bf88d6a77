use nalgebra::DMatrix;

/// Symmetric matrix stored as a diagonal plus full off-diagonal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparse {
    diag: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SymSparse {
    pub fn new(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            rows: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.diag[i] += v;
    }

    /// Adds `v` at `(i, j)` and `(j, i)`; `i != j`.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        debug_assert_ne!(i, j);
        push_or_add(&mut self.rows[i], j, v);
        push_or_add(&mut self.rows[j], i, v);
    }

    /// Off-diagonal entries of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.rows[i]
                .iter()
                .find(|(c, _)| *c == j)
                .map_or(0.0, |(_, v)| *v)
        }
    }

    pub fn nnz_offdiag(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.diag[i] * x[i] + self.rows[i].iter().map(|&(j, v)| v * x[j]).sum::<f64>())
            .collect()
    }

    /// The matrix with row and column `k` deleted; later indices shift down.
    pub fn without(&self, k: usize) -> SymSparse {
        let shift = |j: usize| if j > k { j - 1 } else { j };
        let mut out = SymSparse::new(self.n() - 1);
        for i in (0..self.n()).filter(|&i| i != k) {
            let r = shift(i);
            out.diag[r] = self.diag[i];
            out.rows[r] = self.rows[i]
                .iter()
                .filter(|(j, _)| *j != k)
                .map(|&(j, v)| (shift(j), v))
                .collect();
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for &(j, v) in &self.rows[i] {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = SymSparse::new(n);
        for i in 0..n {
            out.diag[i] = m[(i, i)];
            for j in 0..n {
                if j != i && m[(i, j)] != 0.0 {
                    out.rows[i].push((j, m[(i, j)]));
                }
            }
        }
        out
    }

    /// Adjacency structure (pattern of off-diagonal entries).
    pub fn pattern(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, _)| j).collect())
            .collect()
    }
}

fn push_or_add(row: &mut Vec<(usize, f64)>, j: usize, v: f64) {
    match row.iter_mut().find(|(c, _)| *c == j) {
        Some(e) => e.1 += v,
        None => row.push((j, v)),
    }
}
