use serde::{Deserialize, Serialize};

/// One fitted estimator, written as a JSON line by the command line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub estimator: String,
    pub parameters: Vec<String>,
    pub values: Vec<f64>,
    pub converged: bool,
    pub boundary_hit: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FitRecord {
    pub fn new(estimator: &str, parameters: &[&str], values: Vec<f64>) -> Self {
        Self {
            estimator: estimator.to_string(),
            parameters: parameters.iter().map(|s| s.to_string()).collect(),
            values,
            converged: true,
            boundary_hit: false,
            warnings: Vec::new(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}
