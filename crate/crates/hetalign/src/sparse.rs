//! Minimal CSR sparse matrix used for meta-diagram instance counting.
//!
//! Column indices are kept sorted within each row and explicit zeros are never
//! stored, so every operation here is deterministic: the same inputs produce
//! bit-identical outputs regardless of construction order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Sparse nonnegative matrix in compressed-sparse-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CsrMatrix {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from (row, col, value) triplets; duplicates are summed, zeros dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r},{c}) out of bounds");
            per_row[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &mut per_row {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut v = 0.0;
                while i < row.len() && row[i].0 == c {
                    v += row[i].1;
                    i += 1;
                }
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        Self::from_triplets(
            m.nrows(),
            m.ncols(),
            (0..m.nrows())
                .flat_map(|r| (0..m.ncols()).map(move |c| (r, c, m[(r, c)])))
                .filter(|&(_, _, v)| v != 0.0),
        )
    }

    /// All-ones matrix (dense in CSR clothing); handy as the Hadamard identity.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_triplets(
            rows,
            cols,
            (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c, 1.0))),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        match self.indices[lo..hi].binary_search(&c) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// Iterate stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |i| (r, self.indices[i], self.values[i]))
        })
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols];
        for &c in &self.indices {
            counts[c] += 1;
        }
        let mut indptr = Vec::with_capacity(self.cols + 1);
        indptr.push(0);
        for c in 0..self.cols {
            indptr.push(indptr[c] + counts[c]);
        }
        let mut pos = indptr[..self.cols].to_vec();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for i in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[i];
                indices[pos[c]] = r;
                values[pos[c]] = self.values[i];
                pos[c] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    /// Sparse matrix product `self * other` via row-wise dense accumulation.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.cols != other.rows {
            return Err(Error::Usage(format!(
                "matmul dimension mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = vec![0.0f64; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..self.rows {
            for i in self.indptr[r]..self.indptr[r + 1] {
                let k = self.indices[i];
                let v = self.values[i];
                for j in other.indptr[k]..other.indptr[k + 1] {
                    let c = other.indices[j];
                    if acc[c] == 0.0 {
                        touched.push(c);
                    }
                    acc[c] += v * other.values[j];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != 0.0 {
                    indices.push(c);
                    values.push(acc[c]);
                }
                acc[c] = 0.0;
            }
            touched.clear();
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            rows: self.rows,
            cols: other.cols,
            indptr,
            indices,
            values,
        })
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Usage(format!(
                "hadamard dimension mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..self.rows {
            let (ia, va) = self.row(r);
            let (ib, vb) = other.row(r);
            let (mut p, mut q) = (0, 0);
            while p < ia.len() && q < ib.len() {
                match ia[p].cmp(&ib[q]) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        let v = va[p] * vb[q];
                        if v != 0.0 {
                            indices.push(ia[p]);
                            values.push(v);
                        }
                        p += 1;
                        q += 1;
                    }
                }
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn add(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Usage(format!(
                "add dimension mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..self.rows {
            let (ia, va) = self.row(r);
            let (ib, vb) = other.row(r);
            let (mut p, mut q) = (0, 0);
            while p < ia.len() || q < ib.len() {
                let (c, v) = if q >= ib.len() || (p < ia.len() && ia[p] < ib[q]) {
                    let out = (ia[p], va[p]);
                    p += 1;
                    out
                } else if p >= ia.len() || ib[q] < ia[p] {
                    let out = (ib[q], vb[q]);
                    q += 1;
                    out
                } else {
                    let out = (ia[p], va[p] + vb[q]);
                    p += 1;
                    q += 1;
                    out
                };
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
        })
    }

    /// Drop stored diagonal entries (square matrices only).
    pub fn without_diagonal(&self) -> CsrMatrix {
        assert_eq!(self.rows, self.cols, "diagonal of a non-square matrix");
        CsrMatrix::from_triplets(
            self.rows,
            self.cols,
            self.iter().filter(|&(r, c, _)| r != c),
        )
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).1.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (c, v) in idx.iter().zip(val) {
                sums[*c] += v;
            }
        }
        sums
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> CsrMatrix {
        CsrMatrix::from_triplets(rows, cols, entries.iter().copied())
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = small(2, 2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 0.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = small(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        let b = small(3, 2, &[(0, 1, 4.0), (2, 0, 5.0), (1, 0, 6.0)]);
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.to_dense(), &a.to_dense() * &b.to_dense());
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let a = small(2, 3, &[]);
        let b = small(2, 3, &[]);
        assert!(matches!(a.matmul(&b), Err(crate::Error::Usage(_))));
        let c = small(2, 2, &[]);
        assert!(matches!(a.hadamard(&c), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn without_diagonal_drops_self_pairs() {
        let m = small(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let z = m.without_diagonal();
        assert_eq!(z.get(0, 0), 0.0);
        assert_eq!(z.get(0, 1), 2.0);
        assert_eq!(z.nnz(), 1);
    }

    prop_compose! {
        fn arb_csr(max_dim: usize)(rows in 1..max_dim, cols in 1..max_dim)
            (rows in Just(rows), cols in Just(cols),
             entries in prop::collection::vec(
                 (0..rows, 0..cols, 0.0..5.0f64), 0..40))
            -> CsrMatrix
        {
            CsrMatrix::from_triplets(rows, cols, entries)
        }
    }

    proptest! {
        #[test]
        fn transpose_round_trips(m in arb_csr(12)) {
            prop_assert_eq!(m.transpose().transpose(), m);
        }

        #[test]
        fn ops_match_dense_reference(m in arb_csr(10)) {
            let d = m.to_dense();
            let t = m.transpose().to_dense();
            prop_assert_eq!(&t, &d.transpose());
            let h = m.hadamard(&m).unwrap().to_dense();
            prop_assert_eq!(h, d.component_mul(&d));
            let s = m.add(&m).unwrap().to_dense();
            prop_assert_eq!(s, &d + &d);
            let sums = m.row_sums();
            for (r, sum) in sums.iter().enumerate() {
                prop_assert!((sum - d.row(r).sum()).abs() < 1e-12);
            }
        }
    }
}
