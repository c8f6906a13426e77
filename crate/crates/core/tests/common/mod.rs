#![allow(dead_code)]

use rand::Rng;
use spavg::linalg::Matrix;
use spavg::rng::StreamSeed;

/// `AAᵀ + s·I` with `A` uniform on [-1, 1].
pub fn random_spd(m: usize, shift: f64, seed: u64) -> Matrix<f64> {
    let mut rng = StreamSeed::new(seed).rng();
    let a = Matrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    let mut s = a.matmul(&a.transpose());
    for i in 0..m {
        s[(i, i)] += shift;
    }
    s
}

/// Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| {
        let mut r = r.clone();
        r.push(v);
        r
    }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

pub fn quad(s: &Matrix<f64>, w: &[f64]) -> f64 {
    let n = w.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += w[i] * s[(i, j)] * w[j];
        }
    }
    acc
}

/// Compass search on `f` from `x0`, halving the step down to `tol`.
pub fn compass_search(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64) -> Vec<f64> {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut h = step;
    while h > tol {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * h;
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    x
}

/// Minimiser of `wᵀSw` subject to `Σ w = 1` by compass search on the first
/// `m−1` coordinates.
pub fn search_unit_sum(s: &Matrix<f64>) -> Vec<f64> {
    let m = s.rows();
    let full = |u: &[f64]| {
        let mut w = u.to_vec();
        w.push(1.0 - u.iter().sum::<f64>());
        w
    };
    let u = compass_search(|u| quad(s, &full(u)), &vec![1.0 / m as f64; m - 1], 0.25, 1e-10);
    full(&u)
}

/// Simplex minimiser of `wᵀSw` by enumerating supports and solving each
/// equality-constrained problem with a dense KKT system.
pub fn enumerate_simplex(s: &Matrix<f64>) -> Vec<f64> {
    let m = s.rows();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let k = idx.len();
        let mut a = vec![vec![0.0; k + 1]; k + 1];
        let mut b = vec![0.0; k + 1];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[r][c] = 2.0 * s[(i, j)];
            }
            a[r][k] = 1.0;
            a[k][r] = 1.0;
        }
        b[k] = 1.0;
        let Some(sol) = solve_dense(&a, &b) else { continue };
        if sol[..k].iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut w = vec![0.0; m];
        for (r, &i) in idx.iter().enumerate() {
            w[i] = sol[r].max(0.0);
        }
        let v = quad(s, &w);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, w));
        }
    }
    best.unwrap().1
}

/// Column `p` of the group weights by compass search: the last member of
/// each group absorbs its sum constraint (1 for group `p`, 0 otherwise).
pub fn search_group_column(s: &Matrix<f64>, sizes: &[usize], p: usize) -> Vec<f64> {
    let free: usize = sizes.iter().map(|k| k - 1).sum();
    let full = |u: &[f64]| {
        let mut w = Vec::with_capacity(s.rows());
        let mut at = 0;
        for (q, &k) in sizes.iter().enumerate() {
            let part = &u[at..at + k - 1];
            at += k - 1;
            w.extend_from_slice(part);
            let target = if q == p { 1.0 } else { 0.0 };
            w.push(target - part.iter().sum::<f64>());
        }
        w
    };
    let mut x0 = Vec::with_capacity(free);
    for (q, &k) in sizes.iter().enumerate() {
        let v = if q == p { 1.0 / k as f64 } else { 0.0 };
        x0.extend(std::iter::repeat_n(v, k - 1));
    }
    let u = compass_search(|u| quad(s, &full(u)), &x0, 0.25, 1e-10);
    full(&u)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
