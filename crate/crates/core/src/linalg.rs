//! Householder QR factorization of a column-major design.

use alloc::vec;
use alloc::vec::Vec;

/// Thin QR factorization `X = Q R` of an `n x k` matrix with `n >= k`.
#[derive(Debug, Clone)]
pub struct Qr {
    n: usize,
    k: usize,
    // Column-major; strictly-lower part of column j holds the Householder
    // vector (with implicit leading 1), the upper triangle holds R.
    packed: Vec<f64>,
    betas: Vec<f64>,
}

/// Column `index` is numerically dependent on the columns before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DependentColumn(pub usize);

impl Qr {
    /// Factorizes `columns` (each of length `n`). A column whose remaining
    /// norm falls to `rank_tol * max column norm` or below is reported as
    /// dependent.
    pub fn factorize(columns: &[Vec<f64>], rank_tol: f64) -> Result<Self, DependentColumn> {
        let k = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        let mut packed = Vec::with_capacity(n * k);
        for col in columns {
            debug_assert_eq!(col.len(), n);
            packed.extend_from_slice(col);
        }
        let max_norm = columns
            .iter()
            .map(|c| libm::sqrt(c.iter().map(|v| v * v).sum::<f64>()))
            .fold(0.0_f64, f64::max);
        let threshold = rank_tol * max_norm;
        let mut betas = vec![0.0; k];

        for j in 0..k {
            let (head, tail) = packed.split_at_mut((j + 1) * n);
            let col = &mut head[j * n..];
            let norm = libm::sqrt(col[j..].iter().map(|v| v * v).sum::<f64>());
            if norm <= threshold || norm == 0.0 {
                return Err(DependentColumn(j));
            }
            let alpha = if col[j] > 0.0 { -norm } else { norm };
            let v0 = col[j] - alpha;
            // v = (1, col[j+1..] / v0); beta = -v0 / alpha
            for v in &mut col[j + 1..] {
                *v /= v0;
            }
            let beta = -v0 / alpha;
            betas[j] = beta;
            col[j] = alpha;

            for c in 0..(k - j - 1) {
                let target = &mut tail[c * n..(c + 1) * n];
                let mut dot = target[j];
                for i in j + 1..n {
                    dot += col[i] * target[i];
                }
                dot *= beta;
                target[j] -= dot;
                for i in j + 1..n {
                    target[i] -= dot * col[i];
                }
            }
        }
        Ok(Self { n, k, packed, betas })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.k
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        self.packed[j * self.n + i]
    }

    fn reflect(&self, j: usize, y: &mut [f64]) {
        let col = &self.packed[j * self.n..(j + 1) * self.n];
        let mut dot = y[j];
        for i in j + 1..self.n {
            dot += col[i] * y[i];
        }
        dot *= self.betas[j];
        y[j] -= dot;
        for i in j + 1..self.n {
            y[i] -= dot * col[i];
        }
    }

    /// Overwrites `y` with `Q' y`.
    pub fn apply_qt(&self, y: &mut [f64]) {
        for j in 0..self.k {
            self.reflect(j, y);
        }
    }

    /// Overwrites `y` with `Q y`.
    pub fn apply_q(&self, y: &mut [f64]) {
        for j in (0..self.k).rev() {
            self.reflect(j, y);
        }
    }

    /// Solves `R b = rhs[..k]` by back substitution.
    pub fn solve_r(&self, rhs: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut b = rhs[..k].to_vec();
        for i in (0..k).rev() {
            let mut s = b[i];
            for j in i + 1..k {
                s -= self.r(i, j) * b[j];
            }
            b[i] = s / self.r(i, i);
        }
        b
    }

    /// Least-squares coefficients for response `y`.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        self.solve_r(&qty)
    }

    /// `(X'X)^{-1} = R^{-1} R^{-T}`, row-major `k x k`.
    pub fn xtx_inverse(&self) -> Vec<f64> {
        let k = self.k;
        // R^{-1}, upper triangular, row-major.
        let mut rinv = vec![0.0; k * k];
        for col in 0..k {
            for i in (0..=col).rev() {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for j in i + 1..=col {
                    s -= self.r(i, j) * rinv[j * k + col];
                }
                rinv[i * k + col] = s / self.r(i, i);
            }
        }
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let start = j.max(i);
                let s: f64 = (start..k).map(|m| rinv[i * k + m] * rinv[j * k + m]).sum();
                out[i * k + j] = s;
                out[j * k + i] = s;
            }
        }
        out
    }

    /// Diagonal of the hat matrix, `h_ii = sum_j Q[i, j]^2` over the thin Q.
    pub fn leverage(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.n];
        let mut e = vec![0.0; self.n];
        for j in 0..self.k {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.apply_q(&mut e);
            for (hi, qi) in h.iter_mut().zip(&e) {
                *hi += qi * qi;
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        // [[2, 1], [1, 3]] b = [3, 5] -> b = (0.8, 1.4)
        let cols = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let qr = Qr::factorize(&cols, 1e-10).unwrap();
        let b = qr.solve(&[3.0, 5.0]);
        assert!((b[0] - 0.8).abs() < 1e-14);
        assert!((b[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn detects_dependent_column() {
        let cols = vec![vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        assert_eq!(Qr::factorize(&cols, 1e-10).unwrap_err(), DependentColumn(2));
    }

    #[test]
    fn q_is_orthogonal() {
        let cols = vec![vec![1.0, 1.0, 1.0, 1.0], vec![0.5, -1.0, 2.0, 3.5]];
        let qr = Qr::factorize(&cols, 1e-10).unwrap();
        let mut y = vec![1.0, 2.0, 3.0, 4.0];
        let orig = y.clone();
        qr.apply_qt(&mut y);
        qr.apply_q(&mut y);
        for (a, b) in y.iter().zip(&orig) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
