use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Binary (0/1) sparse matrix in compressed-sparse-row form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
}

impl Csr {
    /// Builds from `(row, col)` pairs. Pairs are sorted; duplicates are kept.
    pub fn from_pairs(rows: usize, cols: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        let mut indptr = vec![0; rows + 1];
        for &(r, c) in &pairs {
            debug_assert!(r < rows && c < cols);
            indptr[r + 1] += 1;
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let indices = pairs.into_iter().map(|(_, c)| c).collect();
        Self {
            rows,
            cols,
            indptr,
            indices,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Column indices stored in row `r`.
    pub fn row(&self, r: usize) -> &[usize] {
        &self.indices[self.indptr[r]..self.indptr[r + 1]]
    }

    pub fn row_len(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c)))
    }

    pub fn transpose(&self) -> Csr {
        Csr::from_pairs(self.cols, self.rows, self.pairs().map(|(r, c)| (c, r)))
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for (r, c) in self.pairs() {
            m.set(r, c, m.get(r, c) + 1.0);
        }
        m
    }

    /// Sparse-dense product: row `i` of the output is the sum of the rows of
    /// `dense` selected by the entries of row `i`.
    pub fn spmm(&self, dense: &Matrix) -> Result<Matrix> {
        if dense.rows() != self.cols {
            return Err(Error::shape(
                "spmm",
                format!("sparse {}x{} times dense {:?}", self.rows, self.cols, dense.shape()),
            ));
        }
        let d = dense.cols();
        let mut out = Matrix::zeros(self.rows, d);
        for r in 0..self.rows {
            let out_row = out.row_mut(r);
            for &c in self.row(r) {
                for (o, v) in out_row.iter_mut().zip(dense.row(c)) {
                    *o += v;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · dense` without building the transpose.
    pub fn spmm_t(&self, dense: &Matrix) -> Result<Matrix> {
        if dense.rows() != self.rows {
            return Err(Error::shape(
                "spmm_t",
                format!(
                    "sparse {}x{} transposed times dense {:?}",
                    self.rows,
                    self.cols,
                    dense.shape()
                ),
            ));
        }
        let d = dense.cols();
        let mut out = Matrix::zeros(self.cols, d);
        for r in 0..self.rows {
            let src = dense.row(r);
            for &c in self.row(r) {
                for (o, v) in out.row_mut(c).iter_mut().zip(src) {
                    *o += v;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spmm_sums_selected_rows() {
        let s = Csr::from_pairs(1, 2, [(0, 0), (0, 1)]);
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert_eq!(s.spmm(&x).unwrap().data(), &[3.0]);
        assert_eq!(s.transpose().spmm_t(&x).unwrap().data(), &[3.0]);
    }

    #[test]
    fn empty_sparse_gives_zeros() {
        let s = Csr::from_pairs(3, 2, []);
        let x = Matrix::filled(2, 4, 1.5);
        assert_eq!(s.spmm(&x).unwrap(), Matrix::zeros(3, 4));
    }

    #[test]
    fn spmm_checks_shapes() {
        let s = Csr::from_pairs(2, 3, [(0, 2)]);
        assert!(s.spmm(&Matrix::zeros(2, 1)).is_err());
        assert!(s.spmm_t(&Matrix::zeros(3, 1)).is_err());
    }
}
