//! Bandwidth rules for the kernel intensity estimator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::intensity::edge_mass;
use super::second_order::{close_pairs, squared_intensity};
use super::PointPattern;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthRule {
    /// An eighth of the shorter window side.
    Default,
    /// Minimiser of the Berman–Diggle mean square error criterion.
    Diggle,
    /// Maximiser of the leave-one-out likelihood cross-validation score.
    Ppl,
}

impl BandwidthRule {
    pub fn name(&self) -> &'static str {
        match self {
            BandwidthRule::Default => "default",
            BandwidthRule::Diggle => "diggle",
            BandwidthRule::Ppl => "ppl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "default" => Ok(BandwidthRule::Default),
            "diggle" => Ok(BandwidthRule::Diggle),
            "ppl" => Ok(BandwidthRule::Ppl),
            other => Err(Error::Parse(format!("unknown bandwidth rule `{other}`"))),
        }
    }
}

pub const N_CANDIDATES: usize = 32;

/// 32 log-spaced values from `min_side/200` to `min_side/4`.
pub fn bandwidth_candidates(min_side: f64) -> Vec<f64> {
    let lo = (min_side / 200.0).ln();
    let hi = (min_side / 4.0).ln();
    (0..N_CANDIDATES)
        .map(|k| (lo + (hi - lo) * k as f64 / (N_CANDIDATES - 1) as f64).exp())
        .collect()
}

fn gauss2(d2: f64, s: f64) -> f64 {
    (-d2 / (2.0 * s * s)).exp() / (2.0 * PI * s * s)
}

/// Pair distances and Stieltjes masses of `K̂` on `[0, min_side/4]`.
struct KJumps {
    d2: Vec<f64>,
    mass: Vec<f64>,
    lambda: f64,
}

impl KJumps {
    fn new(pattern: &PointPattern) -> Self {
        let w = pattern.window();
        let lambda = pattern.intensity();
        let scale = if pattern.len() > 1 {
            2.0 / (w.area() * squared_intensity(pattern))
        } else {
            0.0
        };
        let pairs = close_pairs(pattern, w.min_side() / 4.0);
        Self {
            d2: pairs.iter().map(|p| p.d * p.d).collect(),
            mass: pairs.iter().map(|p| scale * p.e).collect(),
            lambda,
        }
    }

    fn criterion(&self, b: f64) -> f64 {
        let s2 = std::f64::consts::SQRT_2 * b;
        let stieltjes: f64 = self
            .d2
            .iter()
            .zip(&self.mass)
            .map(|(&d2, &m)| m * (gauss2(d2, s2) - 2.0 * gauss2(d2, b)))
            .sum();
        1.0 / (4.0 * PI * b * b * self.lambda) + stieltjes
    }
}

/// `M(b) = 1/(4πb²ρ̂) + ∫₀^{R} [φ_{√2 b}(r) − 2 φ_b(r)] dK̂(r)` with `R` a quarter
/// of the shorter side and `φ_s` the isotropic Gaussian density.
pub fn diggle_criterion(pattern: &PointPattern, bandwidth: f64) -> Result<f64> {
    check(pattern, bandwidth)?;
    Ok(KJumps::new(pattern).criterion(bandwidth))
}

/// Squared distances and edge masses needed by the cross-validation score.
struct LooTerms {
    pts: Vec<[f64; 2]>,
    inv_mass: Vec<f64>,
}

impl LooTerms {
    fn score(pattern: &PointPattern, b: f64) -> f64 {
        let w = pattern.window();
        let pts = pattern.points();
        let inv_mass: Vec<f64> = pts.iter().map(|p| 1.0 / edge_mass(w, p[0], p[1], b)).collect();
        let terms = LooTerms {
            pts: pts.to_vec(),
            inv_mass,
        };
        terms.evaluate(b)
    }

    fn evaluate(&self, b: f64) -> f64 {
        let n = self.pts.len();
        let mut loo = vec![0.0; n];
        for i in 0..n {
            for j in i + 1..n {
                let dx = self.pts[i][0] - self.pts[j][0];
                let dy = self.pts[i][1] - self.pts[j][1];
                let k = gauss2(dx * dx + dy * dy, b);
                loo[i] += k * self.inv_mass[j];
                loo[j] += k * self.inv_mass[i];
            }
        }
        // With the uniform edge correction every point carries unit mass, so
        // the integral of the full estimate is exactly n.
        loo.iter().map(|v| v.ln()).sum::<f64>() - n as f64
    }
}

/// `Σᵢ log ρ̂₋ᵢ(xᵢ) − ∫_W ρ̂`, where `ρ̂₋ᵢ` drops point i's own kernel term.
pub fn ppl_score(pattern: &PointPattern, bandwidth: f64) -> Result<f64> {
    check(pattern, bandwidth)?;
    Ok(LooTerms::score(pattern, bandwidth))
}

fn check(pattern: &PointPattern, bandwidth: f64) -> Result<()> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    Ok(())
}

fn arg_best(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) || values[best].is_nan() {
            best = k;
        }
    }
    best
}

pub fn select_bandwidth(pattern: &PointPattern, rule: BandwidthRule) -> Result<f64> {
    let side = pattern.window().min_side();
    if rule == BandwidthRule::Default {
        return Ok(side / 8.0);
    }
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let candidates = bandwidth_candidates(side);
    let best = match rule {
        BandwidthRule::Diggle => {
            let jumps = KJumps::new(pattern);
            let m: Vec<f64> = candidates.iter().map(|&b| jumps.criterion(b)).collect();
            arg_best(&m, |a, b| a < b)
        }
        BandwidthRule::Ppl => {
            let s: Vec<f64> = candidates.iter().map(|&b| LooTerms::score(pattern, b)).collect();
            arg_best(&s, |a, b| a > b)
        }
        BandwidthRule::Default => unreachable!(),
    };
    Ok(candidates[best])
}
