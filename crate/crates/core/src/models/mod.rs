//! Model specifications, closed-form summaries and simulators.

mod boolean;
mod dpp;
mod poisson;
mod thomas;

pub use boolean::{boolean_theory, radius_moments, simulate_boolean, BooleanModel, GermGrainSet, MAX_RADIUS};
pub use dpp::{
    dpp_alpha_max, dpp_theory_g, dpp_theory_k, simulate_dpp_gauss, simulate_dpp_gauss_with, DppGauss,
    SpectralOptions,
};
pub use poisson::{homogeneous_points, poisson_intensity, simulate_poisson, PoissonIntensity};
pub use thomas::{simulate_thomas, thomas_theory_g, thomas_theory_k, Thomas};

use rand::Rng;

use crate::error::{Error, Result};
use crate::summaries::{PointPattern, Window};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Poisson(PoissonIntensity),
    DppGauss(DppGauss),
    Thomas(Thomas),
    Boolean(BooleanModel),
}

/// One simulated observation.
#[derive(Debug, Clone, PartialEq)]
pub enum Realization {
    Points(PointPattern),
    Grains(GermGrainSet),
}

impl Realization {
    pub fn to_csv(&self) -> String {
        match self {
            Realization::Points(p) => p.to_csv(),
            Realization::Grains(g) => g.to_csv(),
        }
    }

    pub fn window(&self) -> &Window {
        match self {
            Realization::Points(p) => p.window(),
            Realization::Grains(g) => g.window(),
        }
    }
}

/// Benchmark DPP: `1`, `2` homogeneous at ρ=100; `3`, `4` with intensity
/// `4e^{4x}` on the unit square. Odd ids use the largest admissible scale,
/// even ids half of it.
pub fn dpp_preset(id: u8) -> Result<DppGauss> {
    let (beta0, beta1) = match id {
        1 | 2 => (100f64.ln(), 0.0f64),
        3 | 4 => (4f64.ln(), 4.0),
        _ => return Err(Error::UnknownPreset(id)),
    };
    let alpha_max = dpp_alpha_max((beta0 + beta1.max(0.0)).exp());
    let alpha = if id % 2 == 1 { alpha_max } else { alpha_max / 2.0 };
    Ok(DppGauss { beta0, beta1, alpha })
}

fn take(params: &mut Vec<(String, f64)>, key: &str) -> Option<f64> {
    let pos = params.iter().position(|(k, _)| k == key)?;
    Some(params.remove(pos).1)
}

impl ModelSpec {
    /// Builds a model from a name (`poisson1`..`poisson4`, `poisson`, `dpp`,
    /// `dpp1`..`dpp4`, `thomas`, `boolean`) and `key=value` overrides.
    pub fn from_name(name: &str, params: &[(String, f64)]) -> Result<Self> {
        let mut params = params.to_vec();
        let name = name.trim().to_ascii_lowercase();
        let spec = if let Some(id) = name.strip_prefix("poisson") {
            if id.is_empty() {
                let rho = take(&mut params, "rho").unwrap_or(100.0);
                ModelSpec::Poisson(PoissonIntensity::Constant(rho))
            } else {
                let id: u8 = id.parse().map_err(|_| Error::Parse(format!("unknown model `{name}`")))?;
                poisson_intensity(id, 0.5, 0.5)?;
                ModelSpec::Poisson(PoissonIntensity::Preset(id))
            }
        } else if let Some(id) = name.strip_prefix("dpp") {
            let mut spec = if id.is_empty() {
                dpp_preset(1)?
            } else {
                dpp_preset(id.parse().map_err(|_| Error::Parse(format!("unknown model `{name}`")))?)?
            };
            if let Some(rho) = take(&mut params, "rho") {
                spec.beta0 = rho.ln();
                spec.beta1 = 0.0;
            }
            if let Some(v) = take(&mut params, "beta0") {
                spec.beta0 = v;
            }
            if let Some(v) = take(&mut params, "beta1") {
                spec.beta1 = v;
            }
            if let Some(v) = take(&mut params, "alpha") {
                spec.alpha = v;
            }
            ModelSpec::DppGauss(spec)
        } else if name == "thomas" {
            let spec = Thomas {
                kappa: take(&mut params, "kappa").unwrap_or(10.0),
                mu: take(&mut params, "mu").unwrap_or(10.0),
                sigma: take(&mut params, "sigma").unwrap_or(0.05),
            };
            spec.check()?;
            ModelSpec::Thomas(spec)
        } else if name == "boolean" {
            let spec = BooleanModel {
                rho: take(&mut params, "rho").unwrap_or(100.0),
                alpha_r: take(&mut params, "alpha").unwrap_or(1.0),
            };
            spec.check()?;
            ModelSpec::Boolean(spec)
        } else {
            return Err(Error::Parse(format!("unknown model `{name}`")));
        };
        if let Some((k, _)) = params.first() {
            return Err(Error::Parse(format!("parameter `{k}` does not apply to model `{name}`")));
        }
        Ok(spec)
    }

    pub fn simulate<R: Rng + ?Sized>(&self, window: &Window, rng: &mut R) -> Result<Realization> {
        Ok(match self {
            ModelSpec::Poisson(i) => Realization::Points(simulate_poisson(i, window, rng)?),
            ModelSpec::DppGauss(s) => Realization::Points(simulate_dpp_gauss(s, window, rng)?),
            ModelSpec::Thomas(s) => Realization::Points(simulate_thomas(s, window, rng)?),
            ModelSpec::Boolean(s) => Realization::Grains(simulate_boolean(s, window, rng)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_by_name() {
        assert_eq!(
            ModelSpec::from_name("poisson3", &[]).unwrap(),
            ModelSpec::Poisson(PoissonIntensity::Preset(3))
        );
        assert!(ModelSpec::from_name("poisson7", &[]).is_err());
        let ModelSpec::DppGauss(d) = ModelSpec::from_name("dpp4", &[]).unwrap() else {
            panic!()
        };
        assert!((d.alpha - 0.5 * dpp_alpha_max(4.0 * 4f64.exp())).abs() < 1e-15);
        let t = ModelSpec::from_name("thomas", &[("kappa".into(), 5.0)]).unwrap();
        assert_eq!(
            t,
            ModelSpec::Thomas(Thomas {
                kappa: 5.0,
                mu: 10.0,
                sigma: 0.05
            })
        );
        assert!(ModelSpec::from_name("boolean", &[("kappa".into(), 5.0)]).is_err());
    }
}
