//! Compressed-row sparse matrices and the direct solver wrapper.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Par};

use crate::error::{Error, Result};

/// Triplet accumulator; duplicates are summed on compression.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Adds every entry of `other` shifted by `(row_offset, col_offset)`
    /// and scaled by `scale`.
    pub fn push_block(&mut self, other: &SparseMatrix, row_offset: usize, col_offset: usize, scale: f64) {
        for (i, j, v) in other.iter() {
            self.push(i + row_offset, j + col_offset, scale * v);
        }
    }

    pub fn build(mut self) -> SparseMatrix {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        }
    }
}

/// Sparse matrix in compressed row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Builds from rows whose columns are strictly increasing.
    pub fn from_sorted_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        let nrows = rows.len();
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0) && row.iter().all(|&(j, _)| j < ncols));
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::with_capacity(n, n, n);
        for i in 0..n {
            b.push(i, i, 1.0);
        }
        b.build().with_symmetry(true)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut b = TripletBuilder::with_capacity(n, n, n);
        for (i, &d) in diag.iter().enumerate() {
            b.push(i, i, d);
        }
        b.build().with_symmetry(true)
    }

    pub fn with_symmetry(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Whether the matrix was assembled from a symmetric bilinear form.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matrix-vector dimension mismatch");
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `x^T A`.
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "matrix-vector dimension mismatch");
        let mut y = vec![0.0; self.ncols];
        for (i, j, v) in self.iter() {
            y[j] += v * x[i];
        }
        y
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum of `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &SparseMatrix, b: f64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{} matrices",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut builder = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        builder.push_block(self, 0, 0, a);
        builder.push_block(other, 0, 0, b);
        Ok(builder
            .build()
            .with_symmetry(self.symmetric && other.symmetric))
    }

    pub fn transpose(&self) -> Self {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.iter() {
            b.push(j, i, v);
        }
        b.build().with_symmetry(self.symmetric)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            d[i][j] += v;
        }
        d
    }

    pub(crate) fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    fn to_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let mut col_ptr = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            col_ptr[j + 1] += 1;
        }
        for j in 0..self.ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut next = col_ptr.clone();
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_range(i) {
                let j = self.col_idx[k];
                let dst = next[j];
                row_idx[dst] = i;
                values[dst] = self.values[k];
                next[j] += 1;
            }
        }
        (col_ptr, row_idx, values)
    }
}

static SEQUENTIAL: Once = Once::new();

/// Sparse LU factorization with partial pivoting.
///
/// The symbolic analysis can be reused across matrices with an identical
/// sparsity pattern via [`SparseLu::refactor`].
pub struct SparseLu {
    n: usize,
    pattern: (Vec<usize>, Vec<usize>),
    symbolic: SymbolicLu<usize>,
    lu: Lu<usize, f64>,
}

impl SparseLu {
    pub fn factor(matrix: &SparseMatrix) -> Result<Self> {
        SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
        if matrix.nrows != matrix.ncols {
            return Err(Error::Dimension(format!(
                "LU of a non-square {}x{} matrix",
                matrix.nrows, matrix.ncols
            )));
        }
        let n = matrix.nrows;
        let (col_ptr, row_idx, values) = matrix.to_csc();
        let symbolic_mat =
            SymbolicSparseColMat::<usize>::new_checked(n, n, col_ptr.clone(), None, row_idx.clone());
        let symbolic = SymbolicLu::try_new(symbolic_mat.as_ref())
            .map_err(|e| Error::Solver(format!("symbolic LU: {e:?}")))?;
        let mat = SparseColMat::new(symbolic_mat, values);
        let lu = Lu::try_new_with_symbolic(symbolic.clone(), mat.as_ref())
            .map_err(|e| Error::Solver(format!("numeric LU: {e:?}")))?;
        Ok(Self {
            n,
            pattern: (col_ptr, row_idx),
            symbolic,
            lu,
        })
    }

    /// Refactors with a new matrix, reusing the symbolic analysis when the
    /// sparsity pattern is unchanged.
    pub fn refactor(&mut self, matrix: &SparseMatrix) -> Result<()> {
        let (col_ptr, row_idx, values) = matrix.to_csc();
        if matrix.nrows != self.n || matrix.ncols != self.n || (col_ptr.as_slice(), row_idx.as_slice()) != (self.pattern.0.as_slice(), self.pattern.1.as_slice()) {
            *self = Self::factor(matrix)?;
            return Ok(());
        }
        let symbolic_mat =
            SymbolicSparseColMat::<usize>::new_checked(self.n, self.n, col_ptr, None, row_idx);
        let mat = SparseColMat::new(symbolic_mat, values);
        self.lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat.as_ref())
            .map_err(|e| Error::Solver(format!("numeric LU: {e:?}")))?;
        Ok(())
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::Dimension(format!(
                "rhs of length {} for a {} system",
                rhs.len(),
                self.n
            )));
        }
        let b = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("singular system (non-finite solution)".into()));
        }
        Ok(out)
    }
}

/// One-shot factor and solve.
pub fn solve(matrix: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    SparseLu::factor(matrix)?.solve(rhs)
}
