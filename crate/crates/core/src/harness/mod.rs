//! End-to-end averaging pipelines and replication studies.

mod config;
mod families;
mod study;

pub use config::{parse_params, ExperimentConfig};
pub use families::{fit_single, thomas_truth};
pub use study::{run_replication_study, ResultRow, ResultTable};

use serde::{Deserialize, Serialize};

use crate::averaging::{convex_group_weights, group_weights, GroupMode, GroupStructure, MseMatrix, WeightSolution};
use crate::bootstrap::BootstrapConfig;
use crate::error::{Error, Result};
use crate::models::{ModelSpec, Realization};
use crate::summaries::IntensityField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Poisson,
    Dpp,
    Thomas,
    Boolean,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "poisson" | "intensity" => Ok(Family::Poisson),
            "dpp" => Ok(Family::Dpp),
            "thomas" => Ok(Family::Thomas),
            "boolean" => Ok(Family::Boolean),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }

    pub fn of(model: &ModelSpec) -> Self {
        match model {
            ModelSpec::Poisson(_) => Family::Poisson,
            ModelSpec::DppGauss(_) => Family::Dpp,
            ModelSpec::Thomas(_) => Family::Thomas,
            ModelSpec::Boolean(_) => Family::Boolean,
        }
    }

    /// Estimator names of the full bank, in bank order.
    pub fn estimators(&self) -> &'static [&'static str] {
        match self {
            Family::Poisson => &["default", "diggle", "ppl"],
            Family::Dpp | Family::Thomas => &["k", "pcf", "palm"],
            Family::Boolean => &["area-perim", "tangent"],
        }
    }

    pub fn parameters(&self) -> &'static [&'static str] {
        match self {
            Family::Poisson => &["intensity"],
            Family::Dpp => &["alpha"],
            Family::Thomas => &["kappa", "sigma2", "mu"],
            Family::Boolean => &["rho", "alpha"],
        }
    }

    /// Estimator supplying the bootstrap anchor when none is configured;
    /// `None` means the per-parameter mean of the initial estimates.
    pub fn default_anchor(&self) -> Option<&'static str> {
        match self {
            Family::Poisson => Some("ppl"),
            Family::Dpp => Some("palm"),
            Family::Thomas => Some("pcf"),
            Family::Boolean => None,
        }
    }
}

/// Averaging variants: `av` ignores foreign estimators, `av+` uses them with
/// zero-sum weights, `convex` restricts each parameter's weights to the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AveragingMode {
    #[serde(rename = "AV")]
    Av,
    #[serde(rename = "AV+")]
    AvPlus,
    #[serde(rename = "convex")]
    Convex,
}

impl AveragingMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "av" => Ok(AveragingMode::Av),
            "av+" | "avplus" => Ok(AveragingMode::AvPlus),
            "convex" => Ok(AveragingMode::Convex),
            other => Err(Error::Parse(format!("unknown averaging mode `{other}`"))),
        }
    }

    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let modes = s.split(',').filter(|t| !t.trim().is_empty()).map(Self::parse).collect::<Result<Vec<_>>>()?;
        if modes.is_empty() {
            return Err(Error::Parse("no averaging modes given".into()));
        }
        Ok(modes)
    }

    pub fn name(&self) -> &'static str {
        match self {
            AveragingMode::Av => "AV",
            AveragingMode::AvPlus => "AV+",
            AveragingMode::Convex => "convex",
        }
    }

    pub fn solve(&self, sigma: &MseMatrix<f64>, groups: &GroupStructure) -> Result<WeightSolution<f64>> {
        match self {
            AveragingMode::Av => group_weights(sigma, groups, GroupMode::Masked),
            AveragingMode::AvPlus => group_weights(sigma, groups, GroupMode::Full),
            AveragingMode::Convex => convex_group_weights(sigma, groups),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub bootstrap: BootstrapConfig,
    pub modes: Vec<AveragingMode>,
    /// Subset of the family's estimators, in bank order; `None` keeps all.
    pub estimators: Option<Vec<String>>,
    /// Pixel grid of the intensity family.
    pub grid: (usize, usize),
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            bootstrap: BootstrapConfig::default(),
            modes: vec![AveragingMode::Av, AveragingMode::AvPlus, AveragingMode::Convex],
            estimators: None,
            grid: (128, 128),
        }
    }
}

impl PipelineOptions {
    pub(crate) fn selected(&self, family: Family) -> Result<Vec<&'static str>> {
        let all = family.estimators();
        match &self.estimators {
            None => Ok(all.to_vec()),
            Some(list) => {
                for name in list {
                    if !all.contains(&name.as_str()) {
                        return Err(Error::InvalidArgument(format!(
                            "estimator `{name}` does not belong to the {family:?} family"
                        )));
                    }
                }
                let keep: Vec<&'static str> = all.iter().copied().filter(|n| list.iter().any(|l| l == n)).collect();
                if keep.is_empty() {
                    return Err(Error::InvalidArgument("no estimators selected".into()));
                }
                Ok(keep)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: AveragingMode,
    /// One combined estimate per parameter (integrated intensity for fields).
    pub estimates: Vec<f64>,
    pub estimated_mse: Vec<f64>,
    /// Weight matrix rows, one per initial estimate.
    pub weights: Vec<Vec<f64>>,
}

/// Outcome of averaging on one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub family: Family,
    pub parameters: Vec<String>,
    pub labels: Vec<String>,
    /// Initial estimates in label order (integrated intensity for fields).
    pub initial: Vec<f64>,
    pub anchor: Vec<f64>,
    pub mse_matrix: Vec<Vec<f64>>,
    pub modes: Vec<ModeResult>,
    #[serde(skip)]
    pub fields: Option<FieldOutput>,
}

/// Intensity fields behind a Poisson pipeline result.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOutput {
    pub initial: Vec<IntensityField>,
    /// Combined field per mode, projected onto nonnegative values.
    pub combined: Vec<IntensityField>,
}

impl PipelineResult {
    pub fn mode(&self, mode: AveragingMode) -> Option<&ModeResult> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

/// Runs the family's estimator bank, bootstraps `Σ̂` from the anchor fit and
/// applies every requested averaging mode.
pub fn average_pipeline(obs: &Realization, family: Family, opts: &PipelineOptions) -> Result<PipelineResult> {
    if opts.modes.is_empty() {
        return Err(Error::InvalidArgument("no averaging modes requested".into()));
    }
    match (family, obs) {
        (Family::Poisson, Realization::Points(p)) => families::poisson_pipeline(p, opts),
        (Family::Dpp, Realization::Points(p)) => families::dpp_pipeline(p, opts),
        (Family::Thomas, Realization::Points(p)) => families::thomas_pipeline(p, opts),
        (Family::Boolean, Realization::Grains(g)) => families::boolean_pipeline(g, opts),
        _ => Err(Error::InvalidArgument(format!(
            "observation type does not match the {family:?} family"
        ))),
    }
}
