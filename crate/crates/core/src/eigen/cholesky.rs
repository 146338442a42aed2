use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::SymmetricSparseMatrix;

/// Reverse Cuthill-McKee ordering: `perm[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adj, seed, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Endpoint of a long breadth-first path from `seed` within its component.
fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize, degree: &[usize]) -> usize {
    let mut start = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let (levels, last) = bfs_levels(adj, start);
        let far = *last
            .iter()
            .min_by_key(|&&v| (degree[v], v))
            .expect("non-empty last level");
        if levels <= ecc {
            break;
        }
        ecc = levels;
        start = far;
    }
    start
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> (usize, Vec<usize>) {
    let mut dist = std::collections::HashMap::new();
    dist.insert(start, 0usize);
    let mut frontier = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adj[v] {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(depth + 1);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

/// Envelope (skyline) Cholesky factor `P A P^T = L L^T` of a symmetric
/// positive definite matrix, with a fill-reducing RCM permutation.
#[derive(Debug, Clone)]
pub struct Factorization {
    perm: Vec<usize>,
    /// First stored column of each row of `L`.
    first: Vec<usize>,
    /// Offset of row `i` in `values`; row `i` stores columns `first[i]..=i`.
    start: Vec<usize>,
    values: Vec<f64>,
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[self.start[i]..self.start[i + 1]]
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let row = self.row(i);
            let f = self.first[i];
            let (off, diag) = row.split_at(row.len() - 1);
            let dot: f64 = off.iter().zip(&y[f..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - dot) / diag[0];
        }
        for i in (0..n).rev() {
            let row = self.row(i);
            let f = self.first[i];
            let (off, diag) = row.split_at(row.len() - 1);
            let xi = y[i] / diag[0];
            y[i] = xi;
            for (v, l) in y[f..i].iter_mut().zip(off) {
                *v -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Cholesky factorization in RCM order. Fails with the (permuted) index and
/// value of the first non-positive pivot.
pub fn factorize(a: &SymmetricSparseMatrix) -> Result<Factorization> {
    let n = a.dim();
    let perm = reverse_cuthill_mckee(&a.adjacency());
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, j, v) in a.upper_entries() {
        let (pi, pj) = (inv[i], inv[j]);
        let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
        entries[r].push((c, v));
    }
    let first: Vec<usize> = entries
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|&(c, _)| c).min().unwrap_or(i).min(i))
        .collect();
    let mut start = vec![0usize; n + 1];
    for i in 0..n {
        start[i + 1] = start[i] + (i - first[i] + 1);
    }
    let mut values = vec![0.0; start[n]];
    for (i, row) in entries.iter().enumerate() {
        for &(c, v) in row {
            values[start[i] + c - first[i]] += v;
        }
    }
    for i in 0..n {
        let fi = first[i];
        let si = start[i];
        for j in fi..i {
            let fj = first[j];
            let k0 = fi.max(fj);
            let sj = start[j];
            let (done, rest) = values.split_at_mut(si);
            let lj = &done[sj..sj + (j - fj + 1)];
            let li = &rest[..(i - fi + 1)];
            let dot: f64 = li[k0 - fi..j - fi]
                .iter()
                .zip(&lj[k0 - fj..j - fj])
                .map(|(x, y)| x * y)
                .sum();
            let ljj = lj[j - fj];
            rest[j - fi] = (rest[j - fi] - dot) / ljj;
        }
        let row = &mut values[si..si + (i - fi + 1)];
        let (off, diag) = row.split_at_mut(i - fi);
        let d = diag[0] - off.iter().map(|x| x * x).sum::<f64>();
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: i, value: d });
        }
        diag[0] = d.sqrt();
    }
    Ok(Factorization {
        perm,
        first,
        start,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_two_by_two() {
        let f = factorize(&SymmetricSparseMatrix::identity(4)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);
        let a = SymmetricSparseMatrix::from_triplets(2, [(0, 0, 2.0), (0, 1, 1.0), (1, 1, 2.0)]).unwrap();
        let x = factorize(&a).unwrap().solve(&[1.0, 0.0]);
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((x[1] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_reports_pivot() {
        let a = SymmetricSparseMatrix::from_triplets(2, [(0, 0, 1.0), (0, 1, 2.0), (1, 1, 1.0)]).unwrap();
        match factorize(&a) {
            Err(Error::NotPositiveDefinite { pivot, value }) => {
                assert_eq!(pivot, 1);
                assert!((value + 3.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn laplacian_solve_matches_residual() {
        // 2D five-point Laplacian on a 12 x 9 grid
        let (nx, ny) = (12, 9);
        let id = |i: usize, j: usize| j * nx + i;
        let mut t = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                t.push((id(i, j), id(i, j), 4.0));
                if i + 1 < nx {
                    t.push((id(i, j), id(i + 1, j), -1.0));
                }
                if j + 1 < ny {
                    t.push((id(i, j), id(i, j + 1), -1.0));
                }
            }
        }
        let a = SymmetricSparseMatrix::from_triplets(nx * ny, t).unwrap();
        let f = factorize(&a).unwrap();
        let b: Vec<f64> = (0..nx * ny).map(|k| ((k * 7) % 11) as f64 - 5.0).collect();
        let x = f.solve(&b);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12);
        }
        // RCM keeps the envelope near the grid bandwidth
        assert!(f.envelope_size() < nx * ny * (nx.min(ny) + 2));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let adj = vec![vec![1], vec![0, 2], vec![1], vec![]];
        let mut p = reverse_cuthill_mckee(&adj);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }
}
