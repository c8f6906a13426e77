//! Primal active-set solver for `min λᵀΣλ` over the probability simplex.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymEigen};
use crate::scalar::Scalar;

/// Minimises `λᵀΣλ` subject to `1ᵀλ = 1`, `λ ≥ 0` for positive semidefinite `Σ`.
///
/// The working set holds the free (positive) coordinates. Each iteration
/// solves the equality-constrained problem on the free set through its KKT
/// system; infeasible candidates trigger a ratio-test step that drops the
/// blocking coordinate, and a negative multiplier on a bound releases it.
pub fn simplex_qp<T: Scalar>(sigma: &Matrix<T>) -> Result<Vec<T>> {
    let n = sigma.rows();
    if n == 0 || !sigma.is_square() {
        return Err(Error::DimensionMismatch {
            expected: sigma.rows(),
            found: sigma.cols(),
        });
    }
    let scale = (0..n).fold(T::zero(), |m, i| m.max(sigma[(i, i)].abs()));
    if scale == T::zero() {
        // Zero matrix: every feasible point is optimal.
        let mut x = vec![T::zero(); n];
        x[0] = T::one();
        return Ok(x);
    }
    let tol = T::epsilon().sqrt() * T::lit(1e-4);

    // Start at the vertex with the smallest diagonal entry.
    let start = (0..n)
        .min_by(|&a, &b| sigma[(a, a)].partial_cmp(&sigma[(b, b)]).unwrap())
        .unwrap();
    let mut x = vec![T::zero(); n];
    x[start] = T::one();
    let mut free = vec![false; n];
    free[start] = true;

    let max_iter = 50 * n + 100;
    for _ in 0..max_iter {
        let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
        let y = equality_qp(sigma, &idx, scale);
        let mut candidate = vec![T::zero(); n];
        for (k, &i) in idx.iter().enumerate() {
            candidate[i] = y[k];
        }

        if idx.iter().all(|&i| candidate[i] >= -tol) {
            x = candidate;
            let grad = sigma.mul_vec(&x);
            let nu = idx.iter().map(|&i| grad[i]).sum::<T>() / T::from_usize(idx.len()).unwrap();
            let entering = (0..n)
                .filter(|&i| !free[i])
                .map(|i| (i, grad[i] - nu))
                .filter(|&(_, mult)| mult < -tol * scale)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            match entering {
                Some((i, _)) => free[i] = true,
                None => return Ok(finish(x)),
            }
        } else {
            // Move toward the candidate until the first free coordinate hits zero.
            let mut step = T::one();
            let mut blocking = None;
            for &i in &idx {
                let d = candidate[i] - x[i];
                if d < T::zero() {
                    let t = x[i] / -d;
                    if t < step {
                        step = t;
                        blocking = Some(i);
                    }
                }
            }
            for &i in &idx {
                let xi = x[i];
                x[i] = xi + step * (candidate[i] - xi);
            }
            if let Some(b) = blocking {
                x[b] = T::zero();
                free[b] = false;
            }
            for &i in &idx {
                if x[i] <= tol * tol {
                    x[i] = T::zero();
                    free[i] = false;
                }
            }
            if !free.iter().any(|&f| f) {
                // Numerical corner case: restart from the best vertex.
                free[start] = true;
                x = vec![T::zero(); n];
                x[start] = T::one();
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
    })
}

/// Minimiser of `yᵀΣ_FF y` subject to `1ᵀy = 1` on the index set `F`.
fn equality_qp<T: Scalar>(sigma: &Matrix<T>, idx: &[usize], scale: T) -> Vec<T> {
    let k = idx.len();
    if k == 1 {
        return vec![T::one()];
    }
    // KKT system [Σ_FF 1; 1ᵀ 0] [y; -ν] = [0; 1], solved by a pseudo-inverse so that
    // semidefinite blocks still yield the minimum-norm minimiser.
    let kkt = Matrix::from_fn(k + 1, k + 1, |a, b| match (a < k, b < k) {
        (true, true) => sigma[(idx[a], idx[b])],
        (true, false) | (false, true) => scale,
        (false, false) => T::zero(),
    });
    let mut rhs = vec![T::zero(); k + 1];
    rhs[k] = scale;
    let eig = SymEigen::new(&kkt);
    let biggest = eig.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let cutoff = biggest * T::epsilon() * T::from_usize(16 * (k + 1)).unwrap();
    let sol = eig.solve_truncated(&rhs, cutoff);
    sol[..k].to_vec()
}

fn finish<T: Scalar>(mut x: Vec<T>) -> Vec<T> {
    for v in x.iter_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    let s: T = x.iter().copied().sum();
    for v in x.iter_mut() {
        *v /= s;
        if *v > T::one() {
            *v = T::one();
        }
    }
    x
}
