use std::path::PathBuf;

use crate::bootstrap::{Anchor, BootstrapConfig};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::summaries::Window;

use super::AveragingMode;

/// Replication study description, read from `key = value` lines.
///
/// Keys: `model`, `params`, `window`, `replications`, `boot_n`, `boot_seed`,
/// `anchor`, `estimators`, `modes`, `seed`, `output`, `threads`, `grid`.
/// `#` starts a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub window: Window,
    pub replications: usize,
    /// `seed` here is the root of the per-replication bootstrap streams.
    pub bootstrap: BootstrapConfig,
    pub estimators: Option<Vec<String>>,
    pub modes: Vec<AveragingMode>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub grid: (usize, usize),
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, window: Window, replications: usize) -> Self {
        Self {
            model,
            window,
            replications,
            bootstrap: BootstrapConfig::default(),
            estimators: None,
            modes: vec![AveragingMode::Av, AveragingMode::AvPlus, AveragingMode::Convex],
            seed: 0,
            output: None,
            threads: None,
            grid: (128, 128),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::InvalidArgument("replications must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidArgument("no averaging modes given".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: Vec<(String, String)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", no + 1)))?;
            let key = k.trim().to_ascii_lowercase();
            if kv.iter().any(|(x, _)| *x == key) {
                return Err(Error::Parse(format!("line {}: duplicate key `{key}`", no + 1)));
            }
            kv.push((key, v.trim().to_string()));
        }
        let get = |k: &str| kv.iter().find(|(x, _)| x == k).map(|(_, v)| v.as_str());
        for (k, _) in &kv {
            const KNOWN: [&str; 13] = [
                "model", "params", "window", "replications", "boot_n", "boot_seed", "anchor", "estimators", "modes",
                "seed", "output", "threads", "grid",
            ];
            if !KNOWN.contains(&k.as_str()) {
                return Err(Error::Parse(format!("unknown key `{k}`")));
            }
        }
        let name = get("model").ok_or_else(|| Error::Parse("missing key `model`".into()))?;
        let params = match get("params") {
            Some(p) => parse_params(p)?,
            None => Vec::new(),
        };
        let model = ModelSpec::from_name(name, &params)?;
        let window = match get("window") {
            Some(w) => Window::parse(w)?,
            None => Window::unit(),
        };
        let replications = parse_num::<usize>("replications", get("replications").unwrap_or("1"))?;
        let mut cfg = Self::new(model, window, replications);
        cfg.seed = get("seed").map(|v| parse_num::<u64>("seed", v)).transpose()?.unwrap_or(0);
        cfg.bootstrap.n_samples = get("boot_n").map(|v| parse_num("boot_n", v)).transpose()?.unwrap_or(100);
        cfg.bootstrap.seed = get("boot_seed").map(|v| parse_num("boot_seed", v)).transpose()?.unwrap_or(cfg.seed);
        cfg.bootstrap.anchor = get("anchor").map(Anchor::parse);
        cfg.estimators = get("estimators").map(|v| {
            v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
        });
        if let Some(m) = get("modes") {
            cfg.modes = AveragingMode::parse_list(m)?;
        }
        cfg.output = get("output").map(PathBuf::from);
        cfg.threads = get("threads").map(|v| parse_num("threads", v)).transpose()?;
        if let Some(g) = get("grid") {
            let parts: Vec<&str> = g.split(',').map(str::trim).collect();
            cfg.grid = match parts.as_slice() {
                [n] => {
                    let n = parse_num("grid", n)?;
                    (n, n)
                }
                [a, b] => (parse_num("grid", a)?, parse_num("grid", b)?),
                _ => return Err(Error::Parse("grid takes `n` or `nx,ny`".into())),
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`")))
}

/// Parses `name=value,name=value`.
pub fn parse_params(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected `name=value`, got `{t}`")))?;
            let x: f64 = parse_num(k, v)?;
            Ok((k.trim().to_string(), x))
        })
        .collect()
}
