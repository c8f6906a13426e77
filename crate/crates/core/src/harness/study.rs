use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Realization};
use crate::rng::StreamSeed;

use super::families::truth_vector;
use super::{average_pipeline, ExperimentConfig, Family, PipelineOptions, PipelineResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// Estimator name or averaging mode.
    pub name: String,
    pub parameter: String,
    pub mse: f64,
    /// Absent for a single replication.
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub replications: usize,
    /// Replications that failed, with the reason; they are excluded.
    pub failed: Vec<(usize, String)>,
}

impl ResultTable {
    pub fn get(&self, name: &str, parameter: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.name == name && r.parameter == parameter)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,parameter,mse,se\n");
        for r in &self.rows {
            let se = r.se.map(|s| format!("{s:e}")).unwrap_or_default();
            out.push_str(&format!("{},{},{:e},{}\n", r.name, r.parameter, r.mse, se));
        }
        out
    }
}

/// Squared errors of one replication, in table row order, with row names.
fn squared_errors(
    model: &ModelSpec,
    result: &PipelineResult,
    truth: Option<&[f64]>,
    truth_field: Option<&crate::summaries::IntensityField>,
) -> Result<Vec<(String, String, f64)>> {
    let mut rows = Vec::new();
    match (truth, truth_field, &result.fields) {
        (_, Some(t), Some(fields)) => {
            for (label, f) in result.labels.iter().zip(&fields.initial) {
                let name = label.split(':').next().unwrap_or(label).to_string();
                rows.push((name, "intensity".into(), f.centered_inner(f, t)?));
            }
            for (m, f) in result.modes.iter().zip(&fields.combined) {
                rows.push((m.mode.name().into(), "intensity".into(), f.centered_inner(f, t)?));
            }
        }
        (Some(theta), _, _) => {
            for (p, param) in result.parameters.iter().enumerate() {
                for (label, &x) in result.labels.iter().zip(&result.initial) {
                    let (name, lp) = label.split_once(':').unwrap_or((label, ""));
                    if lp == param {
                        rows.push((name.to_string(), param.clone(), (x - theta[p]).powi(2)));
                    }
                }
                for m in &result.modes {
                    rows.push((m.mode.name().into(), param.clone(), (m.estimates[p] - theta[p]).powi(2)));
                }
            }
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no ground truth for the {:?} family",
                Family::of(model)
            )))
        }
    }
    Ok(rows)
}

fn replicate(cfg: &ExperimentConfig, r: usize, truth: Option<&[f64]>, truth_field: Option<&crate::summaries::IntensityField>) -> Result<Vec<(String, String, f64)>> {
    let family = Family::of(&cfg.model);
    let mut rng = StreamSeed::new(cfg.seed).child(r as u64).child(0).rng();
    let obs: Realization = cfg.model.simulate(&cfg.window, &mut rng)?;
    let mut bootstrap = cfg.bootstrap.clone();
    bootstrap.seed = StreamSeed::new(cfg.bootstrap.seed).child(r as u64).child(1).raw();
    let opts = PipelineOptions {
        bootstrap,
        modes: cfg.modes.clone(),
        estimators: cfg.estimators.clone(),
        grid: cfg.grid,
    };
    let result = average_pipeline(&obs, family, &opts)?;
    squared_errors(&cfg.model, &result, truth, truth_field)
}

/// Simulates `R` datasets from the true model, averages each and reports the
/// Monte Carlo MSE (ISE for intensities) of every initial estimator and mode.
///
/// Replication `r` draws its data from stream `(seed, r, 0)` and bootstraps
/// from `(boot_seed, r, 1)`, so the table does not depend on the thread count.
pub fn run_replication_study(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let truth = truth_vector(&cfg.model);
    let truth_field = match &cfg.model {
        ModelSpec::Poisson(rho) => Some(rho.to_field(cfg.window, cfg.grid.0, cfg.grid.1)?),
        _ => None,
    };
    let run = || -> Vec<Result<Vec<(String, String, f64)>>> {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| replicate(cfg, r, truth.as_deref(), truth_field.as_ref()))
            .collect()
    };
    let outcomes = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut failed = Vec::new();
    let mut ok: Vec<Vec<(String, String, f64)>> = Vec::new();
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => ok.push(v),
            Err(e) => {
                log::warn!("replication {r} failed: {e}");
                failed.push((r, e.to_string()));
            }
        }
    }
    if failed.len() * 100 > cfg.replications || ok.is_empty() {
        return Err(Error::StudyFailed {
            failed: failed.len(),
            total: cfg.replications,
            first: failed.first().map(|f| format!("replication {}: {}", f.0, f.1)).unwrap_or_default(),
        });
    }
    let n = ok.len();
    let rows = (0..ok[0].len())
        .map(|i| {
            let values: Vec<f64> = ok.iter().map(|v| v[i].2).collect();
            let mse = values.iter().sum::<f64>() / n as f64;
            let se = (n >= 2).then(|| {
                let var = values.iter().map(|x| (x - mse).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            });
            ResultRow {
                name: ok[0][i].0.clone(),
                parameter: ok[0][i].1.clone(),
                mse,
                se,
            }
        })
        .collect();
    Ok(ResultTable {
        rows,
        replications: cfg.replications,
        failed,
    })
}
