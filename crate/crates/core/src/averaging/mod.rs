//! Optimal linear combinations of competing estimators.
//!
//! Given the mean-square-error matrix `Σ` of a collection of estimators, the
//! weights minimising the quadratic risk of a unit-sum combination are
//! `Σ⁻¹1 / (1ᵀΣ⁻¹1)`. With several target parameters, each estimator is
//! assigned to one group and the weight matrix is `Σ⁻¹L(LᵀΣ⁻¹L)⁻¹`, where `L`
//! is the group selector: every column sums to one over its own group and to
//! zero over the others.

mod qp;

use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymEigen};
use crate::scalar::Scalar;

pub use qp::simplex_qp;

/// Symmetric matrix of (co-)mean-square errors of a labelled estimator collection.
#[derive(Debug, Clone, PartialEq)]
pub struct MseMatrix<T> {
    labels: Vec<String>,
    entries: Matrix<T>,
}

impl<T: Scalar> MseMatrix<T> {
    /// Validates an exactly symmetric matrix with nonnegative diagonal.
    pub fn new(labels: Vec<String>, entries: Matrix<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.rows(),
                found: entries.cols(),
            });
        }
        let m = entries.rows();
        if m == 0 {
            return Err(Error::InvalidArgument("MSE matrix must be at least 1x1".into()));
        }
        if labels.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: labels.len(),
            });
        }
        if !entries.is_symmetric() {
            return Err(Error::InvalidArgument("MSE matrix is not symmetric".into()));
        }
        for i in 0..m {
            let d = entries[(i, i)];
            if !(d >= T::zero()) || !d.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry {i} is negative or not finite"
                )));
            }
        }
        Ok(Self { labels, entries })
    }

    /// Averages the matrix with its transpose before validating.
    pub fn symmetrized(labels: Vec<String>, entries: Matrix<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.rows(),
                found: entries.cols(),
            });
        }
        let half = T::lit(0.5);
        let n = entries.rows();
        let sym = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                entries[(i, i)]
            } else {
                (entries[(i, j)] + entries[(j, i)]) * half
            }
        });
        Self::new(labels, sym)
    }

    /// Convenience constructor with labels `e1..eM`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let entries = Matrix::from_rows(rows)
            .ok_or_else(|| Error::InvalidArgument("ragged rows".into()))?;
        let labels = (1..=entries.rows()).map(|i| format!("e{i}")).collect();
        Self::new(labels, entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            labels: self.labels.clone(),
            entries: self.entries.scaled(c),
        }
    }

    /// Copy with every cross-group block set to zero.
    pub fn masked(&self, groups: &GroupStructure) -> Result<Self> {
        groups.check_dim(self.dim())?;
        let n = self.dim();
        let entries = Matrix::from_fn(n, n, |i, j| {
            if groups.group_of(i) == groups.group_of(j) {
                self.entries[(i, j)]
            } else {
                T::zero()
            }
        });
        Ok(Self {
            labels: self.labels.clone(),
            entries,
        })
    }

    /// Square CSV block: one header row of labels, then `M` rows of values.
    pub fn to_csv(&self) -> String {
        let mut out = self.labels.join(",");
        out.push('\n');
        for i in 0..self.dim() {
            let row: Vec<String> = self.entries.row(i).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty MSE matrix CSV".into()))?;
        let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map(T::lit)
                        .map_err(|e| Error::Parse(format!("bad matrix entry `{s}`: {e}")))
                })
                .collect::<Result<Vec<T>>>()?;
            rows.push(row);
        }
        let entries =
            Matrix::from_rows(&rows).ok_or_else(|| Error::Parse("ragged matrix rows".into()))?;
        Self::new(labels, entries)
    }
}

/// Assignment of consecutive estimators to target parameters.
///
/// `sizes[p]` estimators target parameter `p`; they are stored contiguously
/// in group order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStructure {
    sizes: Vec<usize>,
}

impl GroupStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArgument(
                "every group needs at least one estimator".into(),
            ));
        }
        Ok(Self { sizes })
    }

    /// One group holding all `m` estimators.
    pub fn single(m: usize) -> Self {
        Self { sizes: vec![m] }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn range(&self, p: usize) -> Range<usize> {
        let start: usize = self.sizes[..p].iter().sum();
        start..start + self.sizes[p]
    }

    pub fn group_of(&self, m: usize) -> usize {
        let mut acc = 0;
        for (p, &s) in self.sizes.iter().enumerate() {
            acc += s;
            if m < acc {
                return p;
            }
        }
        panic!("estimator index {m} out of range for {} estimators", acc)
    }

    /// The `M×P` selector `L` with `L[m][p] = 1` iff estimator `m` targets `p`.
    pub fn selector<T: Scalar>(&self) -> Matrix<T> {
        Matrix::from_fn(self.total(), self.n_groups(), |m, p| {
            if self.group_of(m) == p {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    fn check_dim(&self, m: usize) -> Result<()> {
        if self.total() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: self.total(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Linear,
    Convex,
    Masked,
}

/// How cross-group entries of `Σ` enter [`group_weights`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupMode {
    /// Foreign estimators enter with zero-sum weights.
    Full,
    /// Cross-group blocks are zeroed first; foreign weights vanish.
    Masked,
}

/// Solved `M×P` weight matrix with the plug-in MSE of each combined estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution<T> {
    pub weights: Matrix<T>,
    pub estimated_mse: Vec<T>,
    pub mode: WeightMode,
    pub groups: GroupStructure,
}

impl<T: Scalar> WeightSolution<T> {
    pub fn column(&self, p: usize) -> Vec<T> {
        self.weights.column(p)
    }

    /// Largest deviation from the unit/zero column-sum constraints.
    pub fn constraint_violation(&self) -> T {
        let mut worst = T::zero();
        for p in 0..self.groups.n_groups() {
            for q in 0..self.groups.n_groups() {
                let s: T = self.groups.range(q).map(|m| self.weights[(m, p)]).sum();
                let target = if p == q { T::one() } else { T::zero() };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

/// Numerical guards shared by the solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    /// Largest admissible eigenvalue-ratio condition estimate.
    pub condition_cap: T,
    /// Eigenvalues below `-psd_tolerance * trace` reject a matrix as indefinite.
    pub psd_tolerance: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            condition_cap: T::lit(1e12),
            psd_tolerance: T::lit(1e-10),
        }
    }
}

fn guarded_eigen<T: Scalar>(m: &Matrix<T>, opts: &SolverOptions<T>) -> Result<SymEigen<T>> {
    if m.max_abs() == T::zero() || !m.max_abs().is_finite() {
        return Err(Error::SingularMatrix {
            condition: f64::INFINITY,
        });
    }
    let e = SymEigen::new(m);
    let cond = e.condition();
    if !(cond <= opts.condition_cap) {
        return Err(Error::SingularMatrix {
            condition: cond.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    Ok(e)
}

fn clamp_mse<T: Scalar>(v: T, label: &str) -> T {
    if v < T::zero() {
        log::warn!("negative estimated MSE {v} for `{label}` clamped to 0 (indefinite Σ̂)");
        T::zero()
    } else {
        v
    }
}

/// Single-parameter weights `Σ⁻¹1 / (1ᵀΣ⁻¹1)` with plug-in MSE `(1ᵀΣ⁻¹1)⁻¹`.
pub fn oracle_weights<T: Scalar>(sigma: &MseMatrix<T>) -> Result<WeightSolution<T>> {
    oracle_weights_with(sigma, &SolverOptions::default())
}

pub fn oracle_weights_with<T: Scalar>(
    sigma: &MseMatrix<T>,
    opts: &SolverOptions<T>,
) -> Result<WeightSolution<T>> {
    let groups = GroupStructure::single(sigma.dim());
    let mut sol = solve_groups(sigma.entries(), &groups, opts)?;
    sol.mode = WeightMode::Linear;
    Ok(sol)
}

/// Weights `Σ⁻¹L(LᵀΣ⁻¹L)⁻¹` for several target parameters.
pub fn group_weights<T: Scalar>(
    sigma: &MseMatrix<T>,
    groups: &GroupStructure,
    mode: GroupMode,
) -> Result<WeightSolution<T>> {
    group_weights_with(sigma, groups, mode, &SolverOptions::default())
}

pub fn group_weights_with<T: Scalar>(
    sigma: &MseMatrix<T>,
    groups: &GroupStructure,
    mode: GroupMode,
    opts: &SolverOptions<T>,
) -> Result<WeightSolution<T>> {
    groups.check_dim(sigma.dim())?;
    match mode {
        GroupMode::Full => {
            let mut sol = solve_groups(sigma.entries(), groups, opts)?;
            sol.mode = WeightMode::Linear;
            Ok(sol)
        }
        GroupMode::Masked => {
            let masked = sigma.masked(groups)?;
            let mut sol = solve_groups(masked.entries(), groups, opts)?;
            sol.mode = WeightMode::Masked;
            Ok(sol)
        }
    }
}

fn solve_groups<T: Scalar>(
    sigma: &Matrix<T>,
    groups: &GroupStructure,
    opts: &SolverOptions<T>,
) -> Result<WeightSolution<T>> {
    let m = sigma.rows();
    let p = groups.n_groups();
    let eig = guarded_eigen(sigma, opts)?;
    let sel = groups.selector::<T>();

    // A = Σ⁻¹L, column by column.
    let mut a = Matrix::zeros(m, p);
    for q in 0..p {
        let col = eig.solve(&sel.column(q));
        for (i, v) in col.into_iter().enumerate() {
            a[(i, q)] = v;
        }
    }
    let b = sel.transpose().matmul(&a);
    let b_inv = if p == 1 {
        if b[(0, 0)] == T::zero() || !b[(0, 0)].is_finite() {
            return Err(Error::SingularMatrix {
                condition: f64::INFINITY,
            });
        }
        Matrix::from_diag(&[T::one() / b[(0, 0)]])
    } else {
        guarded_eigen(&b, opts)?.inverse()
    };
    let weights = a.matmul(&b_inv);
    let estimated_mse = (0..p)
        .map(|q| clamp_mse(b_inv[(q, q)], &format!("group {q}")))
        .collect();
    Ok(WeightSolution {
        weights,
        estimated_mse,
        mode: WeightMode::Linear,
        groups: groups.clone(),
    })
}

fn check_psd<T: Scalar>(sigma: &Matrix<T>, opts: &SolverOptions<T>) -> Result<()> {
    let e = SymEigen::new(sigma);
    let min = e.min_value();
    let tol = opts.psd_tolerance * sigma.trace().abs();
    if min < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: min.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Unit-sum nonnegative weights minimising `λᵀΣλ` (active-set QP on the simplex).
pub fn convex_weights<T: Scalar>(sigma: &MseMatrix<T>) -> Result<WeightSolution<T>> {
    convex_weights_with(sigma, &SolverOptions::default())
}

pub fn convex_weights_with<T: Scalar>(
    sigma: &MseMatrix<T>,
    opts: &SolverOptions<T>,
) -> Result<WeightSolution<T>> {
    check_psd(sigma.entries(), opts)?;
    let lambda = simplex_qp(sigma.entries())?;
    let mse = clamp_mse(sigma.entries().quad_form(&lambda), "convex");
    let m = lambda.len();
    let weights = Matrix::from_fn(m, 1, |i, _| lambda[i]);
    Ok(WeightSolution {
        weights,
        estimated_mse: vec![mse],
        mode: WeightMode::Convex,
        groups: GroupStructure::single(m),
    })
}

/// Convex weights solved independently on each diagonal block; foreign weights are zero.
pub fn convex_group_weights<T: Scalar>(
    sigma: &MseMatrix<T>,
    groups: &GroupStructure,
) -> Result<WeightSolution<T>> {
    groups.check_dim(sigma.dim())?;
    let opts = SolverOptions::default();
    let m = sigma.dim();
    let mut weights = Matrix::zeros(m, groups.n_groups());
    let mut estimated_mse = Vec::with_capacity(groups.n_groups());
    for p in 0..groups.n_groups() {
        let idx: Vec<usize> = groups.range(p).collect();
        let block = sigma.entries().select(&idx);
        check_psd(&block, &opts)?;
        let lambda = simplex_qp(&block)?;
        estimated_mse.push(clamp_mse(block.quad_form(&lambda), "convex"));
        for (k, &i) in idx.iter().enumerate() {
            weights[(i, p)] = lambda[k];
        }
    }
    Ok(WeightSolution {
        weights,
        estimated_mse,
        mode: WeightMode::Convex,
        groups: groups.clone(),
    })
}

/// Combined estimates `Σ_m w[m][p]·estimates[m]`.
pub fn combine<T: Scalar>(estimates: &[T], solution: &WeightSolution<T>) -> Result<Vec<T>> {
    let w = &solution.weights;
    if estimates.len() != w.rows() {
        return Err(Error::DimensionMismatch {
            expected: w.rows(),
            found: estimates.len(),
        });
    }
    Ok((0..w.cols())
        .map(|p| (0..w.rows()).map(|m| w[(m, p)] * estimates[m]).sum())
        .collect())
}

/// `wₚᵀ Σ wₚ` for every column of the solution.
pub fn solution_mse<T: Scalar>(sigma: &MseMatrix<T>, solution: &WeightSolution<T>) -> Result<Vec<T>> {
    let w = &solution.weights;
    if sigma.dim() != w.rows() {
        return Err(Error::DimensionMismatch {
            expected: w.rows(),
            found: sigma.dim(),
        });
    }
    Ok((0..w.cols())
        .map(|p| sigma.entries().quad_form(&w.column(p)))
        .collect())
}
