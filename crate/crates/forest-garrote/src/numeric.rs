//! Small numeric helpers: compensated summation and a dense linear solve.

/// Neumaier-compensated running sum. The rule decomposition identity is
/// checked to 1e-10 over sums of tens of thousands of terms, so plain
/// accumulation order noise is not acceptable in the evaluation paths.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Solve `A x = b` for a small symmetric positive-definite-ish system by
/// Gaussian elimination with partial pivoting. Returns `None` when the matrix
/// is singular to working precision.
#[allow(clippy::needless_range_loop)]
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x: Vec<f64> = b.to_vec();

    let scale: f64 = m
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1.0);

    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
        if pivot <= scale * 1e-12 {
            return None;
        }
        m.swap(col, pivot_row);
        x.swap(col, pivot_row);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = x[col];
        for c in col + 1..n {
            v -= m[col][c] * x[c];
        }
        x[col] = v / m[col][col];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(x)
}

/// Incrementally maintained Cholesky factor of a Gram matrix, used by the
/// homotopy solvers: columns are appended as they join the active set and the
/// factor is rebuilt on drops.
#[derive(Debug, Clone, Default)]
pub struct Cholesky {
    /// Row-major lower triangle; row i has i+1 entries.
    l: Vec<Vec<f64>>,
}

impl Cholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    /// Append a column with cross-products `cross` against the existing
    /// active columns and self-product `diag`. Returns false (leaving the
    /// factor unchanged) when the new column is linearly dependent on the
    /// active set to working precision.
    #[allow(clippy::needless_range_loop)]
    pub fn try_append(&mut self, cross: &[f64], diag: f64) -> bool {
        debug_assert_eq!(cross.len(), self.len());
        let mut row = Vec::with_capacity(self.len() + 1);
        for i in 0..self.len() {
            let mut v = cross[i];
            for j in 0..i {
                v -= self.l[i][j] * row[j];
            }
            row.push(v / self.l[i][i]);
        }
        let rest = diag - row.iter().map(|v| v * v).sum::<f64>();
        if rest <= diag.abs().max(1.0) * 1e-12 {
            return false;
        }
        row.push(rest.sqrt());
        self.l.push(row);
        true
    }

    /// Factor the Gram submatrix `gram[idx][idx]` from scratch.
    pub fn from_gram(gram: &dyn Fn(usize, usize) -> f64, idx: &[usize]) -> Option<Self> {
        let mut c = Cholesky::new();
        for (k, &j) in idx.iter().enumerate() {
            let cross: Vec<f64> = idx[..k].iter().map(|&i| gram(i, j)).collect();
            if !c.try_append(&cross, gram(j, j)) {
                return None;
            }
        }
        Some(c)
    }

    /// Solve `(L L^T) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        debug_assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.l[i][j] * x[j];
            }
            x[i] /= self.l[i][i];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.l[j][i] * x[j];
            }
            x[i] /= self.l[i][i];
        }
        x
    }
}
