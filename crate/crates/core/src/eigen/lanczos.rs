use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use super::cholesky::{factorize, Factorization};
use crate::error::{Error, Result};
use crate::fem::DiscreteForm;
use crate::sparse::SymmetricSparseMatrix;

/// Lowest eigenpairs of `K x = lambda M x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `|K x - lambda M x| / |x|_M` in the Euclidean norm.
    pub residuals: Vec<f64>,
    /// Applications of the shift-inverted operator.
    pub iterations: usize,
    pub restarts: usize,
    /// Shift actually used, after any lowering.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    pub block_size: usize,
    /// Defaults to `-alpha^2 - 1` for a discrete form.
    pub shift: Option<f64>,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    /// Starting block; random when empty.
    pub start: Vec<Vec<f64>>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            block_size: 1,
            shift: None,
            tol: 1e-9,
            max_restarts: 300,
            seed: 0x5eed,
            start: Vec::new(),
        }
    }
}

const SHIFT_RETRIES: u32 = 5;

/// Default solve: block size equal to the number of polygon sides, shift
/// `-alpha^2 - 1`.
pub fn lowest_eigenpairs(form: &DiscreteForm, count: usize, shift: Option<f64>, tol: f64) -> Result<EigenResult> {
    let opts = EigenOptions {
        block_size: form.side_count.max(1),
        shift,
        tol,
        ..EigenOptions::default()
    };
    lowest_eigenpairs_with(form, count, &opts)
}

pub fn lowest_eigenpairs_with(form: &DiscreteForm, count: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let k = form.operator();
    let shift = opts.shift.unwrap_or(-form.alpha * form.alpha - 1.0);
    solve_generalized(&k, &form.mass, count, &EigenOptions {
        shift: Some(shift),
        ..opts.clone()
    })
}

/// Factorizes `K - sigma M`, lowering `sigma` by `2^k (1 + |sigma_0|)` after
/// the `k`-th failure.
pub fn factorize_shifted(k: &SymmetricSparseMatrix, m: &SymmetricSparseMatrix, sigma0: f64) -> Result<(Factorization, f64)> {
    let mut sigma = sigma0;
    for attempt in 0..=SHIFT_RETRIES {
        let shifted = k.add_scaled(m, -sigma)?;
        match factorize(&shifted) {
            Ok(f) => return Ok((f, sigma)),
            Err(Error::NotPositiveDefinite { pivot, value }) => {
                if attempt == SHIFT_RETRIES {
                    break;
                }
                let next = sigma - 2f64.powi(attempt as i32) * (1.0 + sigma0.abs());
                warn!(sigma, pivot, value, next, "shifted matrix indefinite, lowering shift");
                sigma = next;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::FactorizationFailure { shift: sigma })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Basis with cached `M v` and `K v` columns.
struct Basis {
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
    kv: Vec<Vec<f64>>,
}

impl Basis {
    fn len(&self) -> usize {
        self.v.len()
    }

    /// `M`-orthogonalizes `w` against the basis (two passes) and appends it
    /// when it carries a new direction. Returns whether it was added.
    fn push(&mut self, mut w: Vec<f64>, k: &SymmetricSparseMatrix, m: &SymmetricSparseMatrix) -> bool {
        let mw0 = m.mul_vec(&w);
        let norm0 = dot(&w, &mw0).max(0.0).sqrt();
        if !(norm0 > 0.0) || !norm0.is_finite() {
            return false;
        }
        for _ in 0..2 {
            for i in 0..self.v.len() {
                let c = dot(&self.mv[i], &w);
                axpy(-c, &self.v[i], &mut w);
            }
        }
        let mut mw = m.mul_vec(&w);
        let norm = dot(&w, &mw).max(0.0).sqrt();
        if !(norm > 1e-10 * norm0) {
            return false;
        }
        let s = 1.0 / norm;
        w.iter_mut().for_each(|x| *x *= s);
        mw.iter_mut().for_each(|x| *x *= s);
        let kw = k.mul_vec(&w);
        self.v.push(w);
        self.mv.push(mw);
        self.kv.push(kw);
        true
    }
}

/// Shift-invert block Krylov iteration with full reorthogonalization and
/// thick restarts, for `K x = lambda M x` with `M` positive definite and the
/// shift below the spectrum.
pub fn solve_generalized(
    k: &SymmetricSparseMatrix,
    m: &SymmetricSparseMatrix,
    count: usize,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let n = k.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.dim(),
        });
    }
    if count == 0 || count > n {
        return Err(Error::InvalidInput(format!(
            "requested {count} eigenpairs of a problem of dimension {n}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let sigma0 = opts.shift.unwrap_or(-1.0);
    let (factor, sigma) = factorize_shifted(k, m, sigma0)?;
    let apply = |x: &[f64]| factor.solve(&m.mul_vec(x));

    let block = opts.block_size.clamp(1, n);
    let max_basis = (2 * count + 2 * block).max(count + 4 * block).max(20).min(n);
    let keep = (count + block).min(max_basis.saturating_sub(block)).max(count.min(max_basis));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };

    let mut basis = Basis {
        v: Vec::new(),
        mv: Vec::new(),
        kv: Vec::new(),
    };
    let mut frontier: Vec<Vec<f64>> = Vec::new();
    let starts: Vec<Vec<f64>> = if opts.start.is_empty() {
        (0..block).map(|_| random_vec(&mut rng)).collect()
    } else {
        opts.start.clone()
    };
    for s in starts {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.len(),
            });
        }
        // one application filters the start towards the low end of the spectrum
        if basis.push(apply(&s), k, m) {
            frontier.push(basis.v[basis.len() - 1].clone());
        }
    }
    let mut iterations = frontier.len();
    let mut restarts = 0;
    loop {
        // expand
        while basis.len() < max_basis && !frontier.is_empty() {
            let mut next = Vec::new();
            for f in std::mem::take(&mut frontier) {
                if basis.len() >= max_basis {
                    break;
                }
                let w = apply(&f);
                iterations += 1;
                let mut added = basis.push(w, k, m);
                let mut tries = 0;
                while !added && tries < 3 && basis.len() < n {
                    added = basis.push(random_vec(&mut rng), k, m);
                    tries += 1;
                }
                if added {
                    next.push(basis.v[basis.len() - 1].clone());
                }
            }
            frontier = next;
        }

        // Rayleigh-Ritz on K
        let b = basis.len();
        let mut h = DMatrix::<f64>::zeros(b, b);
        for i in 0..b {
            for j in i..b {
                let x = 0.5 * (dot(&basis.v[i], &basis.kv[j]) + dot(&basis.v[j], &basis.kv[i]));
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut idx: Vec<usize> = (0..b).collect();
        idx.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
        let take = keep.min(b);
        let mut values = Vec::with_capacity(take);
        let mut ritz = Basis {
            v: Vec::with_capacity(take),
            mv: Vec::with_capacity(take),
            kv: Vec::with_capacity(take),
        };
        let mut residuals = Vec::with_capacity(take);
        for &col in idx.iter().take(take) {
            let lambda = eig.eigenvalues[col];
            let mut y = vec![0.0; n];
            let mut my = vec![0.0; n];
            let mut ky = vec![0.0; n];
            for i in 0..b {
                let c = eig.eigenvectors[(i, col)];
                axpy(c, &basis.v[i], &mut y);
                axpy(c, &basis.mv[i], &mut my);
                axpy(c, &basis.kv[i], &mut ky);
            }
            let ynorm = dot(&y, &my).max(0.0).sqrt();
            let r: f64 = ky
                .iter()
                .zip(&my)
                .map(|(a, c)| (a - lambda * c).powi(2))
                .sum::<f64>()
                .sqrt();
            residuals.push(r / ynorm);
            values.push(lambda);
            ritz.v.push(y);
            ritz.mv.push(my);
            ritz.kv.push(ky);
        }
        let converged = residuals.iter().take(count).filter(|&&r| r <= opts.tol).count();
        debug!(restarts, basis = b, converged, worst = residuals.iter().take(count).cloned().fold(0.0, f64::max), "krylov cycle");
        if converged == count || b == n {
            let mut eigenvalues = values;
            let mut eigenvectors = ritz.v;
            eigenvalues.truncate(count);
            eigenvectors.truncate(count);
            residuals.truncate(count);
            return Ok(EigenResult {
                eigenvalues,
                eigenvectors,
                residuals,
                iterations,
                restarts,
                shift: sigma,
            });
        }
        if restarts >= opts.max_restarts {
            return Err(Error::NoConvergence {
                converged,
                requested: count,
                restarts,
            });
        }
        restarts += 1;
        // thick restart: keep the Ritz vectors, expand from the lowest unconverged ones
        let unconverged: Vec<usize> = (0..take).filter(|&i| residuals[i] > opts.tol).collect();
        frontier = unconverged.iter().take(block).map(|&i| ritz.v[i].clone()).collect();
        if frontier.is_empty() {
            frontier = ritz.v.iter().take(block).cloned().collect();
        }
        basis = ritz;
    }
}
