//! Compressed-row sparse operators and the sparse direct solver used for
//! coarse problems and for the symmetric part of nonsymmetric DG operators.
//!
//! Storage is `sprs` CSR; factorization is `sprs-ldl` with a reverse
//! Cuthill-McKee fill-reducing ordering.

use std::io::Write;

use nalgebra::DMatrix;
use sprs::{CsMat, FillInReduction, SymmetryCheck, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{DgError, Result};

/// Square or rectangular sparse matrix in CSR form, tagged with a symmetry flag.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    mat: CsMat<f64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Assemble from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut tri = TriMat::new((nrows, ncols));
        for (i, j, v) in triplets {
            tri.add_triplet(i, j, v);
        }
        Self { mat: tri.to_csr(), symmetric: false }
    }

    pub fn from_csr(mat: CsMat<f64>) -> Self {
        let mat = if mat.is_csr() { mat } else { mat.to_csr() };
        Self { mat, symmetric: false }
    }

    pub fn identity(n: usize) -> Self {
        Self { mat: CsMat::eye(n), symmetric: true }
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &d)| (i, i, d))).with_symmetric(true)
    }

    pub fn with_symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn is_flagged_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn csr(&self) -> &CsMat<f64> {
        &self.mat
    }

    pub fn nrows(&self) -> usize {
        self.mat.rows()
    }

    pub fn ncols(&self) -> usize {
        self.mat.cols()
    }

    pub fn nnz(&self) -> usize {
        self.mat.nnz()
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols(), "matvec input dimension");
        assert_eq!(y.len(), self.nrows(), "matvec output dimension");
        for (i, row) in self.mat.outer_iterator().enumerate() {
            let mut acc = 0.0;
            for (j, &v) in row.iter() {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.apply_into(x, &mut y);
        y
    }

    /// `y = Aᵀ x` without forming the transpose.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows(), "transpose matvec input dimension");
        let mut y = vec![0.0; self.ncols()];
        for (i, row) in self.mat.outer_iterator().enumerate() {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (j, &v) in row.iter() {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        Self { mat: self.mat.transpose_view().to_csr(), symmetric: self.symmetric }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols(), other.nrows(), "matmul inner dimension");
        Self::from_csr(&self.mat * &other.mat)
    }

    /// Galerkin triple product `Pᵀ A P`.
    pub fn galerkin(&self, p: &Self) -> Self {
        let pt = p.transpose();
        let symmetric = self.symmetric;
        pt.matmul(&self.matmul(p)).with_symmetric(symmetric)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { mat: self.mat.map(|&v| v * s), symmetric: self.symmetric }
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.nrows(), other.nrows());
        assert_eq!(self.ncols(), other.ncols());
        let lhs = self.mat.map(|&v| v * a);
        let rhs = other.mat.map(|&v| v * b);
        Self::from_csr(&lhs + &rhs).with_symmetric(self.symmetric && other.symmetric)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.nrows().min(self.ncols());
        let mut d = vec![0.0; n];
        for (i, row) in self.mat.outer_iterator().enumerate().take(n) {
            if let Some(&v) = row.get(i) {
                d[i] = v;
            }
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j).copied().unwrap_or(0.0)
    }

    /// Largest entry magnitude, `‖A‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.mat.data().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Drop stored entries with `|a_ij| < rel_tol · ‖A‖_max`.
    pub fn pruned(&self, rel_tol: f64) -> Self {
        let cutoff = rel_tol * self.max_abs();
        let trip = self.iter().filter(|&(_, _, v)| v.abs() >= cutoff).collect::<Vec<_>>();
        Self::from_triplets(self.nrows(), self.ncols(), trip).with_symmetric(self.symmetric)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows()).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.mat.indptr().outer_inds_sz(i);
        self.mat.indices()[range.clone()].iter().copied().zip(self.mat.data()[range].iter().copied())
    }

    /// Submatrix on the half-open row and column ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let (r0, c0) = (rows.start, cols.start);
        let trip = self
            .iter()
            .filter(|&(i, j, _)| rows.contains(&i) && cols.contains(&j))
            .map(|(i, j, v)| (i - r0, j - c0, v))
            .collect::<Vec<_>>();
        Self::from_triplets(rows.len(), cols.len(), trip)
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetric_part(&self) -> Self {
        self.linear_combination(0.5, &self.transpose(), 0.5).with_symmetric(true)
    }

    /// `(A - Aᵀ)/2`.
    pub fn skew_part(&self) -> Self {
        self.linear_combination(0.5, &self.transpose(), -0.5)
    }

    /// `‖A - Aᵀ‖_max`.
    pub fn asymmetry(&self) -> f64 {
        self.linear_combination(1.0, &self.transpose(), -1.0).max_abs()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows(), self.ncols());
        for (i, j, v) in self.iter() {
            d[(i, j)] += v;
        }
        d
    }

    pub fn from_dense(d: &DMatrix<f64>) -> Self {
        let mut trip = Vec::new();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if d[(i, j)] != 0.0 {
                    trip.push((i, j, d[(i, j)]));
                }
            }
        }
        Self::from_triplets(d.nrows(), d.ncols(), trip)
    }

    /// Coordinate text export: `row col value` per line, 0-based, 17 significant digits.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.nrows(), self.ncols(), self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{} {} {:.16e}", i, j, v)?;
        }
        Ok(())
    }
}

/// Sparse `LDLᵀ` factorization of an SPD matrix.
pub struct CholeskyFactor {
    ldl: LdlNumeric<f64, usize>,
    n: usize,
}

impl std::fmt::Debug for CholeskyFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CholeskyFactor").field("n", &self.n).field("nnz_l", &self.ldl.nnz()).finish()
    }
}

impl CholeskyFactor {
    /// Factor `a`; fails unless every pivot of `D` is positive.
    pub fn new(a: &SparseOperator) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(DgError::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
        }
        let n = a.nrows();
        let ldl = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .numeric(a.csr().view())
            .map_err(|e| DgError::NotSpd { context: format!("LDL factorization failed: {e:?}") })?;
        if let Some((i, &d)) = ldl.d().iter().enumerate().find(|(_, d)| !(**d > 0.0) || !d.is_finite()) {
            return Err(DgError::NotSpd { context: format!("pivot {i} of LDLᵀ is {d:e}") });
        }
        Ok(Self { ldl, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n, "direct solve dimension");
        self.ldl.solve(rhs)
    }
}
