//! Symmetric sparse matrices stored as their upper triangle in row-compressed form.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymmetricSparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, 1.0))).expect("indices in range")
    }

    /// Builds the matrix from `(i, j, value)` entries of either triangle;
    /// duplicates are summed. Entries are sorted by position, so the result does
    /// not depend on the input order beyond floating-point summation order of
    /// duplicates, which follows the input.
    pub fn from_triplets(dim: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: i.max(j) + 1,
                });
            }
            t.push(if i <= j { (i, j, v) } else { (j, i, v) });
        }
        // stable sort keeps the summation order of duplicates deterministic
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            dim,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (upper triangle) entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries `(i, j, value)` with `i <= j`, row by row.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.dim {
            let xi = x[i];
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let a = self.vals[k];
                acc += a * x[j];
                if j != i {
                    y[j] += a * xi;
                }
            }
            y[i] += acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Row sums of the full symmetric matrix.
    pub fn row_sums(&self) -> Vec<f64> {
        self.mul_vec(&vec![1.0; self.dim])
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Self::from_triplets(
            self.dim,
            self.upper_entries()
                .chain(other.upper_entries().map(|(i, j, v)| (i, j, s * v))),
        )
    }

    /// Indices of rows holding at least one nonzero.
    pub fn nonzero_rows(&self) -> Vec<bool> {
        let mut flag = vec![false; self.dim];
        for (i, j, v) in self.upper_entries() {
            if v != 0.0 {
                flag[i] = true;
                flag[j] = true;
            }
        }
        flag
    }

    /// Neighbour lists of the symmetric sparsity graph, without the diagonal.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.dim];
        for (i, j, _) in self.upper_entries() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        adj
    }

    /// Coordinate dump: header `dim nnz`, then one `i j value` line per stored
    /// upper-triangle entry.
    pub fn to_coo_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.dim, self.nnz());
        for (i, j, v) in self.upper_entries() {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (i, j, v) in self.upper_entries() {
            d[i][j] = v;
            d[j][i] = v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_symmetrize() {
        let a = SymmetricSparseMatrix::from_triplets(3, [(0, 0, 1.0), (1, 0, 2.0), (0, 1, 1.0), (2, 2, 4.0)]).unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 0), 3.0);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, 3.0, 4.0]);
        assert_eq!(a.quad_form(&[1.0, 1.0, 0.0]), 7.0);
        assert!(SymmetricSparseMatrix::from_triplets(2, [(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn coo_dump() {
        let a = SymmetricSparseMatrix::from_triplets(2, [(0, 0, 2.0), (0, 1, -1.0), (1, 1, 0.5)]).unwrap();
        assert_eq!(a.to_coo_text(), "2 3\n0 0 2\n0 1 -1\n1 1 0.5\n");
    }

    #[test]
    fn add_scaled_merges_patterns() {
        let a = SymmetricSparseMatrix::identity(2);
        let b = SymmetricSparseMatrix::from_triplets(2, [(0, 1, 1.0)]).unwrap();
        let c = a.add_scaled(&b, -2.0).unwrap();
        assert_eq!(c.to_dense(), vec![vec![1.0, -2.0], vec![-2.0, 1.0]]);
    }
}
