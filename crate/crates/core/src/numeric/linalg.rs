use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DynError, Result};

/// Default relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// A dense complex matrix with labelled domain and codomain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseOperator {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub entries: Vec<Complex64>,
    pub domain_label: String,
    pub codomain_label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    pub singular_values: Vec<f64>,
}

impl DenseOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
            domain_label: String::new(),
            codomain_label: String::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn with_labels(mut self, domain: &str, codomain: &str) -> Self {
        self.domain_label = domain.to_string();
        self.codomain_label = codomain.to_string();
        self
    }

    /// Build from column vectors (each of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate().take(rows) {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    fn check_finite(&self) -> Result<()> {
        if self
            .entries
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
        {
            Ok(())
        } else {
            Err(DynError::Domain("operator has non-finite entries".into()))
        }
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.check_finite()?;
        if self.rows == 0 || self.cols == 0 {
            return Ok(Vec::new());
        }
        let svd = self.to_matrix().svd(false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    /// Basis of the numerical kernel, from the right singular vectors whose
    /// singular values fall below `tol·‖M‖`.
    pub fn nullspace(&self, tol: f64) -> Result<Vec<Vec<Complex64>>> {
        self.check_finite()?;
        let n = self.cols;
        if n == 0 {
            return Ok(Vec::new());
        }
        // Pad to at least n rows so the SVD returns a full right basis.
        let rows = self.rows.max(n);
        let mut a = DMatrix::<Complex64>::zeros(rows, n);
        for i in 0..self.rows {
            for j in 0..n {
                a[(i, j)] = self.get(i, j);
            }
        }
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested right singular vectors");
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cut = tol * smax;
        let mut basis = Vec::new();
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if smax == 0.0 || s <= cut {
                basis.push((0..n).map(|j| vt[(k, j)].conj()).collect());
            }
        }
        Ok(basis)
    }

    /// Least-squares solution of `M x = b` and its residual norm.
    pub fn solve_least_squares(&self, b: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
        self.check_finite()?;
        let a = self.to_matrix();
        let rhs = DVector::from_column_slice(b);
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let x = svd
            .solve(
                &rhs,
                f64::EPSILON * smax * (self.rows.max(self.cols) as f64),
            )
            .map_err(|e| DynError::Singular(e.to_string()))?;
        let res = (&a * &x - &rhs).norm();
        Ok((x.iter().copied().collect(), res))
    }
}

/// Rank, kernel and cokernel dimensions with singular values below
/// `tol·‖M‖₂` counted as zero.
pub fn rank_nullity(m: &DenseOperator, tol: f64) -> Result<RankReport> {
    let s = m.singular_values()?;
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        s.iter().filter(|&&v| v > tol * smax).count()
    };
    Ok(RankReport {
        rank,
        kernel_dim: m.cols - rank,
        cokernel_dim: m.rows - rank,
        singular_values: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_full_rank() {
        let r = rank_nullity(&DenseOperator::identity(3), RANK_TOL).unwrap();
        assert_eq!((r.rank, r.kernel_dim, r.cokernel_dim), (3, 0, 0));
    }

    #[test]
    fn zero_matrix() {
        let r = rank_nullity(&DenseOperator::zeros(2, 3), RANK_TOL).unwrap();
        assert_eq!((r.rank, r.kernel_dim, r.cokernel_dim), (0, 3, 2));
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let one = Complex64::new(1.0, 0.0);
        let mut m = DenseOperator::zeros(1, 3);
        m.set(0, 0, one);
        m.set(0, 1, one);
        let ns = m.nullspace(RANK_TOL).unwrap();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((v[0] + v[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let mut m = DenseOperator::zeros(1, 1);
        m.set(0, 0, Complex64::new(f64::NAN, 0.0));
        assert!(rank_nullity(&m, RANK_TOL).is_err());
    }
}
