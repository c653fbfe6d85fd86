use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BackendError, Mode};

/// Dense row-major real matrix. A morphism `m → n` is an `m × n` matrix and
/// sequential composition is the ordinary product `f · g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, BackendError> {
        if entries.len() != rows * cols {
            return Err(BackendError::BadShape {
                rows,
                cols,
                len: entries.len(),
            });
        }
        Ok(Matrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            entries: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, BackendError> {
        if self.cols != other.rows {
            return Err(BackendError::DimMismatch {
                op: "matmul",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let row = &other.entries[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product: block `(i, j)` is `self[i, j] · other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    /// Largest absolute entrywise difference, or `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Matrix) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        Some(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{:>10.6}", self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// The symmetry `u v → v u` where `dim u = m`, `dim v = n`.
///
/// Additive mode: the permutation exchanging the first `m` coordinates with
/// the last `n`. Multiplicative mode: the `mn × mn` commutation matrix with
/// a one at `(i·n + j, j·m + i)`.
pub fn swap_matrix(mode: Mode, m: usize, n: usize) -> Matrix {
    match mode {
        Mode::Dirsum => {
            let mut s = Matrix::zeros(m + n, m + n);
            for i in 0..m {
                s.set(i, n + i, 1.0);
            }
            for j in 0..n {
                s.set(m + j, j, 1.0);
            }
            s
        }
        Mode::Kron => {
            let mut s = Matrix::zeros(m * n, m * n);
            for i in 0..m {
                for j in 0..n {
                    s.set(i * n + j, j * m + i, 1.0);
                }
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn identity_is_left_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(2, 2, &mut rng);
        assert_eq!(Matrix::identity(2).matmul(&a).unwrap(), a);
    }

    #[test]
    fn small_product() {
        let a = Matrix::from_rows(&[&[1.0, 2.0]]);
        let b = Matrix::from_rows(&[&[3.0], &[4.0]]);
        assert_eq!(a.matmul(&b).unwrap(), Matrix::from_rows(&[&[11.0]]));
    }

    #[test]
    fn product_shape_mismatch() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 2);
        assert!(matches!(a.matmul(&b), Err(BackendError::DimMismatch { .. })));
    }

    #[test]
    fn kron_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random(3, 2, &mut rng);
        assert_eq!(Matrix::identity(1).kron(&a), a);

        let swap = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let expected = Matrix::from_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert_eq!(Matrix::identity(2).kron(&swap), expected);

        for (r1, c1, r2, c2) in [(1, 2, 3, 1), (2, 2, 2, 3), (0, 2, 3, 1), (3, 1, 2, 0)] {
            let k = random(r1, c1, &mut rng).kron(&random(r2, c2, &mut rng));
            assert_eq!((k.rows(), k.cols()), (r1 * r2, c1 * c2));
        }
    }

    #[test]
    fn additive_swap_values() {
        assert_eq!(swap_matrix(Mode::Dirsum, 1, 1), Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
        for m in 0..4 {
            for n in 0..4 {
                let s = swap_matrix(Mode::Dirsum, m, n).matmul(&swap_matrix(Mode::Dirsum, n, m)).unwrap();
                assert_eq!(s, Matrix::identity(m + n));
            }
        }
    }

    #[test]
    fn commutation_matrix_swaps_kronecker_factors() {
        for n in 0..4 {
            assert_eq!(swap_matrix(Mode::Kron, 1, n), Matrix::identity(n));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = swap_matrix(Mode::Kron, 2, 2);
        for _ in 0..5 {
            let a = random(2, 2, &mut rng);
            let b = random(2, 2, &mut rng);
            let lhs = s.matmul(&a.kron(&b)).unwrap().matmul(&s.transpose()).unwrap();
            assert!(lhs.approx_eq(&b.kron(&a), 1e-12));
        }
        // naturality: (A ⊗ B) · S(p, q) = S(m, n) · (B ⊗ A) for A: m→p, B: n→q
        let a = random(2, 3, &mut rng);
        let b = random(3, 1, &mut rng);
        let lhs = a.kron(&b).matmul(&swap_matrix(Mode::Kron, 3, 1)).unwrap();
        let rhs = swap_matrix(Mode::Kron, 2, 3).matmul(&b.kron(&a)).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn zero_dimensional_matrices_are_legal() {
        let e = Matrix::new(0, 3, vec![]).unwrap();
        let f = Matrix::new(3, 0, vec![]).unwrap();
        assert_eq!(e.matmul(&Matrix::identity(3)).unwrap(), e);
        assert_eq!(f.matmul(&e).unwrap(), Matrix::zeros(3, 3));
        assert_eq!(e.direct_sum(&Matrix::identity(1)).rows(), 1);
        assert!(Matrix::new(2, 2, vec![1.0]).is_err());
    }
}
