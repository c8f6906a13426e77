//! Parametric bootstrap of the MSE (or MISE) matrix of an estimator bank.

use rayon::prelude::*;

use crate::averaging::{GroupStructure, MseMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{SimRng, StreamSeed};
use crate::summaries::IntensityField;

/// Maps an observation to the estimates of the parameters it targets.
pub type Estimator<O> = Box<dyn Fn(&O) -> Result<Vec<f64>> + Send + Sync>;

/// Maps an observation to an intensity field.
pub type FieldEstimator<O> = Box<dyn Fn(&O) -> Result<IntensityField> + Send + Sync>;

struct Entry<O> {
    name: String,
    targets: Vec<usize>,
    run: Estimator<O>,
}

/// Ordered estimators for the parameters of one model.
///
/// Each estimator returns one value per targeted parameter. The flattened
/// estimate vector lists all estimates of the first parameter (in bank
/// order), then those of the second, and so on, which is the layout
/// [`GroupStructure`] expects.
pub struct EstimatorBank<O> {
    parameters: Vec<String>,
    entries: Vec<Entry<O>>,
}

impl<O> EstimatorBank<O> {
    pub fn new(parameters: &[&str]) -> Self {
        Self {
            parameters: parameters.iter().map(|s| s.to_string()).collect(),
            entries: Vec::new(),
        }
    }

    /// Adds an estimator whose outputs estimate `targets`, in that order.
    pub fn push(
        &mut self,
        name: &str,
        targets: &[&str],
        run: impl Fn(&O) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Result<&mut Self> {
        let idx = targets
            .iter()
            .map(|t| {
                self.parameters
                    .iter()
                    .position(|p| p == t)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown parameter `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if self.entries.iter().any(|e| e.name == name) {
            return Err(Error::InvalidArgument(format!("duplicate estimator `{name}`")));
        }
        self.entries.push(Entry {
            name: name.to_string(),
            targets: idx,
            run: Box::new(run),
        });
        Ok(self)
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn estimator_names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    /// `(estimator index, output index, parameter index)` in flattened order.
    fn layout(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for p in 0..self.parameters.len() {
            for (e, entry) in self.entries.iter().enumerate() {
                for (k, &t) in entry.targets.iter().enumerate() {
                    if t == p {
                        out.push((e, k, p));
                    }
                }
            }
        }
        out
    }

    pub fn groups(&self) -> Result<GroupStructure> {
        let layout = self.layout();
        let sizes: Vec<usize> = (0..self.parameters.len())
            .map(|p| layout.iter().filter(|l| l.2 == p).count())
            .collect();
        GroupStructure::new(sizes)
    }

    /// `estimator:parameter` in flattened order.
    pub fn labels(&self) -> Vec<String> {
        self.layout()
            .iter()
            .map(|&(e, _, p)| format!("{}:{}", self.entries[e].name, self.parameters[p]))
            .collect()
    }

    /// Parameter index of each flattened estimate.
    pub fn targets(&self) -> Vec<usize> {
        self.layout().iter().map(|l| l.2).collect()
    }

    /// Runs every estimator and returns the flattened estimates.
    pub fn evaluate(&self, obs: &O) -> std::result::Result<Vec<f64>, (String, Error)> {
        let mut raw = Vec::with_capacity(self.entries.len());
        for entry in &self.entries {
            let v = (entry.run)(obs).map_err(|e| (entry.name.clone(), e))?;
            if v.len() != entry.targets.len() {
                return Err((
                    entry.name.clone(),
                    Error::DimensionMismatch {
                        expected: entry.targets.len(),
                        found: v.len(),
                    },
                ));
            }
            if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                return Err((entry.name.clone(), Error::InvalidArgument(format!("non-finite estimate {bad}"))));
            }
            raw.push(v);
        }
        Ok(self.layout().iter().map(|&(e, k, _)| raw[e][k]).collect())
    }

    /// Anchor vector of length G for the given rule.
    pub fn anchor(&self, estimates: &[f64], rule: &Anchor) -> Result<Vec<f64>> {
        let targets = self.targets();
        if estimates.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: targets.len(),
                found: estimates.len(),
            });
        }
        let mean_of = |p: usize| {
            let v: Vec<f64> = targets
                .iter()
                .zip(estimates)
                .filter(|(&t, _)| t == p)
                .map(|(_, &x)| x)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        match rule {
            Anchor::MeanOfInitials => Ok((0..self.parameters.len()).map(mean_of).collect()),
            Anchor::Estimator(name) => {
                let e = self
                    .entries
                    .iter()
                    .position(|x| &x.name == name)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown anchor estimator `{name}`")))?;
                let layout = self.layout();
                Ok((0..self.parameters.len())
                    .map(|p| {
                        layout
                            .iter()
                            .position(|l| l.0 == e && l.2 == p)
                            .map(|i| estimates[i])
                            // Parameters the anchor does not estimate fall back to the mean.
                            .unwrap_or_else(|| mean_of(p))
                    })
                    .collect())
            }
            Anchor::Values(v) => {
                if v.len() != self.parameters.len() {
                    return Err(Error::DimensionMismatch {
                        expected: self.parameters.len(),
                        found: v.len(),
                    });
                }
                Ok(v.clone())
            }
        }
    }
}

/// Source of the parameter value `θ̂₀` used to simulate and to centre.
#[derive(Debug, Clone, PartialEq)]
pub enum Anchor {
    /// Per parameter, the mean of all its initial estimates.
    MeanOfInitials,
    /// The named estimator's outputs.
    Estimator(String),
    Values(Vec<f64>),
}

impl Anchor {
    pub fn parse(s: &str) -> Self {
        match s.trim() {
            "mean-of-initials" | "mean" => Anchor::MeanOfInitials,
            name => Anchor::Estimator(name.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// `None` selects the family default.
    pub anchor: Option<Anchor>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_samples: 100,
            seed: 0,
            anchor: None,
        }
    }
}

impl BootstrapConfig {
    fn check(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidArgument("bootstrap needs at least 2 samples".into()));
        }
        Ok(())
    }
}

/// Attempts per bootstrap sample: the first draw and three retries.
pub const ATTEMPTS: u64 = 4;

/// Draws sample `b` and applies `fit`, retrying on fresh sub-streams.
fn sample_with_retries<O, T>(
    root: StreamSeed,
    b: usize,
    simulate: &(dyn Fn(&mut SimRng) -> Result<O> + Sync),
    fit: impl Fn(&O) -> std::result::Result<T, (String, Error)>,
) -> Result<(T, u64)> {
    let mut last = None;
    for attempt in 0..ATTEMPTS {
        let mut rng = root.child(b as u64).child(attempt).rng();
        let outcome = simulate(&mut rng)
            .map_err(|e| ("simulation".to_string(), e))
            .and_then(|obs| fit(&obs));
        match outcome {
            Ok(v) => return Ok((v, attempt)),
            // Shape errors do not depend on the draw; retrying cannot help.
            Err((_, e @ (Error::GridMismatch | Error::DimensionMismatch { .. }))) => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    let (name, reason) = last.unwrap();
    Err(Error::EstimatorFailure {
        sample: b,
        name,
        reason: reason.to_string(),
    })
}

/// Bootstrap estimates and the matrix derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRun {
    pub matrix: MseMatrix<f64>,
    /// Flattened estimates per sample, in sample order.
    pub estimates: Vec<Vec<f64>>,
    /// Samples that needed at least one retry.
    pub retried: usize,
}

/// `Σ̂ᵢⱼ = (1/N) Σ_b (θ̂ᵢ⁽ᵇ⁾ − aᵢ)(θ̂ⱼ⁽ᵇ⁾ − aⱼ)` with `a` the anchor value of
/// each estimate's target parameter. Sample `b` draws from stream
/// `(seed, b, attempt)`; samples run in parallel and are reduced in order.
pub fn bootstrap_run<O: Send>(
    simulate: &(dyn Fn(&[f64], &mut SimRng) -> Result<O> + Sync),
    theta0: &[f64],
    bank: &EstimatorBank<O>,
    config: &BootstrapConfig,
) -> Result<BootstrapRun>
where
    EstimatorBank<O>: Sync,
{
    config.check()?;
    if theta0.len() != bank.parameters().len() {
        return Err(Error::DimensionMismatch {
            expected: bank.parameters().len(),
            found: theta0.len(),
        });
    }
    let root = StreamSeed::new(config.seed);
    let sim = |rng: &mut SimRng| simulate(theta0, rng);
    let results: Vec<Result<(Vec<f64>, u64)>> = (0..config.n_samples)
        .into_par_iter()
        .map(|b| sample_with_retries(root, b, &sim, |obs| bank.evaluate(obs)))
        .collect();
    let mut estimates = Vec::with_capacity(results.len());
    let mut retried = 0;
    for r in results {
        let (v, attempts) = r?;
        retried += (attempts > 0) as usize;
        estimates.push(v);
    }
    let centre: Vec<f64> = bank.targets().iter().map(|&p| theta0[p]).collect();
    let m = centre.len();
    let mut acc = Matrix::zeros(m, m);
    for v in &estimates {
        for i in 0..m {
            let di = v[i] - centre[i];
            for j in 0..m {
                acc[(i, j)] += di * (v[j] - centre[j]);
            }
        }
    }
    let matrix = MseMatrix::symmetrized(bank.labels(), acc.scaled(1.0 / estimates.len() as f64))?;
    Ok(BootstrapRun {
        matrix,
        estimates,
        retried,
    })
}

pub fn bootstrap_mse_matrix<O: Send>(
    simulate: &(dyn Fn(&[f64], &mut SimRng) -> Result<O> + Sync),
    theta0: &[f64],
    bank: &EstimatorBank<O>,
    config: &BootstrapConfig,
) -> Result<MseMatrix<f64>>
where
    EstimatorBank<O>: Sync,
{
    Ok(bootstrap_run(simulate, theta0, bank, config)?.matrix)
}

/// Named field estimators for the MISE bootstrap.
pub type FieldBank<O> = Vec<(String, FieldEstimator<O>)>;

fn evaluate_fields<O>(bank: &FieldBank<O>, obs: &O, grid: &IntensityField) -> std::result::Result<Vec<IntensityField>, (String, Error)> {
    bank.iter()
        .map(|(name, f)| {
            let field = f(obs).map_err(|e| (name.clone(), e))?;
            if !field.same_grid(grid) {
                return Err((name.clone(), Error::GridMismatch));
            }
            Ok(field)
        })
        .collect()
}

/// `Σ̂ᵢⱼ = (1/N) Σ_b pixelArea Σ_pixels (fᵢ⁽ᵇ⁾ − ρ̂₀)(fⱼ⁽ᵇ⁾ − ρ̂₀)`.
pub fn bootstrap_mise_matrix<O: Send>(
    simulate: &(dyn Fn(&IntensityField, &mut SimRng) -> Result<O> + Sync),
    rho0: &IntensityField,
    bank: &FieldBank<O>,
    config: &BootstrapConfig,
) -> Result<MseMatrix<f64>>
where
    FieldBank<O>: Sync,
{
    config.check()?;
    if bank.is_empty() {
        return Err(Error::InvalidArgument("empty field bank".into()));
    }
    let root = StreamSeed::new(config.seed);
    let sim = |rng: &mut SimRng| simulate(rho0, rng);
    let m = bank.len();
    let per_sample: Vec<Result<(Matrix<f64>, u64)>> = (0..config.n_samples)
        .into_par_iter()
        .map(|b| {
            sample_with_retries(root, b, &sim, |obs| {
                let fields = evaluate_fields(bank, obs, rho0)?;
                let mut g = Matrix::zeros(m, m);
                for i in 0..m {
                    for j in i..m {
                        let v = fields[i].centered_inner(&fields[j], rho0).map_err(|e| (bank[i].0.clone(), e))?;
                        g[(i, j)] = v;
                        g[(j, i)] = v;
                    }
                }
                Ok(g)
            })
        })
        .collect();
    let mut acc = Matrix::zeros(m, m);
    for r in per_sample {
        let (g, _) = r?;
        for i in 0..m {
            for j in 0..m {
                acc[(i, j)] += g[(i, j)];
            }
        }
    }
    let labels = bank.iter().map(|(n, _)| n.clone()).collect();
    MseMatrix::symmetrized(labels, acc.scaled(1.0 / config.n_samples as f64))
}
