use crate::averaging::{combine, MseMatrix};
use crate::bootstrap::{bootstrap_mise_matrix, bootstrap_run, Anchor, EstimatorBank, FieldBank};
use crate::error::{Error, Result};
use crate::estimators::{
    boolean_fit_area_perimeter, boolean_fit_tangent, fit_dpp_contrast, fit_loglinear_intensity, fit_palm_dpp,
    fit_palm_thomas, fit_thomas_contrast, measure_set, ContrastConfig, FitRecord, SetMeasurements, Statistic,
};
use crate::models::{
    simulate_boolean, simulate_dpp_gauss, simulate_poisson, simulate_thomas, BooleanModel, DppGauss, GermGrainSet,
    ModelSpec, PoissonIntensity, Realization, Thomas,
};
use crate::rng::SimRng;
use crate::summaries::{kernel_intensity, select_bandwidth, BandwidthRule, IntensityField, PointPattern, Window};

use super::{Family, FieldOutput, ModeResult, PipelineOptions, PipelineResult};

fn anchor_rule(family: Family, opts: &PipelineOptions, selected: &[&str]) -> Anchor {
    match &opts.bootstrap.anchor {
        Some(a) => a.clone(),
        None => match family.default_anchor() {
            Some(name) if selected.contains(&name) => Anchor::Estimator(name.to_string()),
            _ => Anchor::MeanOfInitials,
        },
    }
}

fn finish(
    family: Family,
    bank_parameters: &[String],
    labels: Vec<String>,
    initial: Vec<f64>,
    anchor: Vec<f64>,
    sigma: &MseMatrix<f64>,
    groups: &crate::averaging::GroupStructure,
    opts: &PipelineOptions,
) -> Result<PipelineResult> {
    let mut modes = Vec::with_capacity(opts.modes.len());
    for &mode in &opts.modes {
        let sol = mode.solve(sigma, groups)?;
        modes.push(ModeResult {
            mode,
            estimates: combine(&initial, &sol)?,
            estimated_mse: sol.estimated_mse.clone(),
            weights: sol.weights.to_rows(),
        });
    }
    Ok(PipelineResult {
        family,
        parameters: bank_parameters.to_vec(),
        labels,
        initial,
        anchor,
        mse_matrix: sigma.entries().to_rows(),
        modes,
        fields: None,
    })
}

fn point_pipeline(
    family: Family,
    pattern: &PointPattern,
    bank: &EstimatorBank<PointPattern>,
    simulate: &(dyn Fn(&[f64], &mut SimRng) -> Result<PointPattern> + Sync),
    opts: &PipelineOptions,
    selected: &[&str],
) -> Result<PipelineResult> {
    let initial = bank
        .evaluate(pattern)
        .map_err(|(name, e)| Error::InvalidArgument(format!("estimator `{name}` failed on the data: {e}")))?;
    let anchor = bank.anchor(&initial, &anchor_rule(family, opts, selected))?;
    let run = bootstrap_run(simulate, &anchor, bank, &opts.bootstrap)?;
    let groups = bank.groups()?;
    finish(family, bank.parameters(), bank.labels(), initial, anchor, &run.matrix, &groups, opts)
}

fn kernel_rule(name: &str) -> Result<BandwidthRule> {
    BandwidthRule::parse(name)
}

fn kernel_field(pattern: &PointPattern, rule: BandwidthRule, grid: (usize, usize)) -> Result<IntensityField> {
    let b = select_bandwidth(pattern, rule)?;
    kernel_intensity(pattern, grid, b)
}

pub(super) fn poisson_pipeline(pattern: &PointPattern, opts: &PipelineOptions) -> Result<PipelineResult> {
    let selected = opts.selected(Family::Poisson)?;
    let grid = opts.grid;
    let mut bank: FieldBank<PointPattern> = Vec::new();
    for name in &selected {
        let rule = kernel_rule(name)?;
        bank.push((name.to_string(), Box::new(move |p: &PointPattern| kernel_field(p, rule, grid))));
    }
    let initial = bank
        .iter()
        .map(|(name, f)| f(pattern).map_err(|e| Error::InvalidArgument(format!("estimator `{name}` failed on the data: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&IntensityField> = initial.iter().collect();
    let rho0 = match anchor_rule(Family::Poisson, opts, &selected) {
        Anchor::Estimator(name) => {
            let i = selected
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown anchor estimator `{name}`")))?;
            initial[i].clone()
        }
        Anchor::MeanOfInitials => IntensityField::linear_combination(&refs, &vec![1.0 / refs.len() as f64; refs.len()])?,
        Anchor::Values(v) if v.len() == 1 && v[0] >= 0.0 => {
            IntensityField::from_fn(*pattern.window(), grid.0, grid.1, |_, _| v[0])?
        }
        Anchor::Values(_) => return Err(Error::InvalidArgument("intensity anchor takes one constant value".into())),
    }
    .clamped_nonnegative();
    let window = *pattern.window();
    let simulate = move |rho: &IntensityField, rng: &mut SimRng| {
        simulate_poisson(&PoissonIntensity::Field(rho.clone()), &window, rng)
    };
    let sigma = bootstrap_mise_matrix(&simulate, &rho0, &bank, &opts.bootstrap)?;
    let groups = crate::averaging::GroupStructure::single(bank.len());
    let scalars: Vec<f64> = initial.iter().map(|f| f.integral()).collect();
    let mut modes = Vec::with_capacity(opts.modes.len());
    let mut combined = Vec::with_capacity(opts.modes.len());
    for &mode in &opts.modes {
        let sol = mode.solve(&sigma, &groups)?;
        let w = sol.column(0);
        let field = IntensityField::linear_combination(&refs, &w)?.clamped_nonnegative();
        modes.push(ModeResult {
            mode,
            estimates: vec![field.integral()],
            estimated_mse: sol.estimated_mse.clone(),
            weights: sol.weights.to_rows(),
        });
        combined.push(field);
    }
    Ok(PipelineResult {
        family: Family::Poisson,
        parameters: vec!["intensity".into()],
        labels: selected.iter().map(|n| format!("{n}:intensity")).collect(),
        initial: scalars,
        anchor: vec![rho0.integral()],
        mse_matrix: sigma.entries().to_rows(),
        modes,
        fields: Some(FieldOutput { initial, combined }),
    })
}

fn dpp_estimate(pattern: &PointPattern, name: &str) -> Result<(f64, bool, bool)> {
    let intensity = fit_loglinear_intensity(pattern)?;
    let fit = match name {
        "k" => fit_dpp_contrast(pattern, Statistic::K, &ContrastConfig::k_default(), &intensity)?,
        "pcf" => fit_dpp_contrast(pattern, Statistic::Pcf, &ContrastConfig::pcf_default(), &intensity)?,
        "palm" => fit_palm_dpp(pattern, None, &intensity)?,
        other => return Err(Error::InvalidArgument(format!("unknown DPP estimator `{other}`"))),
    };
    Ok((fit.alpha, fit.converged, fit.boundary_hit))
}

pub(super) fn dpp_pipeline(pattern: &PointPattern, opts: &PipelineOptions) -> Result<PipelineResult> {
    let selected = opts.selected(Family::Dpp)?;
    let mut bank = EstimatorBank::<PointPattern>::new(Family::Dpp.parameters());
    for name in &selected {
        let n = name.to_string();
        bank.push(name, &["alpha"], move |p| Ok(vec![dpp_estimate(p, &n)?.0]))?;
    }
    // The intensity is refitted on every bootstrap pattern; the data fit fixes
    // the trend used for simulation.
    let intensity = fit_loglinear_intensity(pattern)?;
    let window = *pattern.window();
    let simulate = move |theta: &[f64], rng: &mut SimRng| {
        let spec = DppGauss {
            beta0: intensity.beta0,
            beta1: intensity.beta1,
            alpha: theta[0].min(dpp_alpha_max_of(&intensity, &window)),
        };
        simulate_dpp_gauss(&spec, &window, rng)
    };
    point_pipeline(Family::Dpp, pattern, &bank, &simulate, opts, &selected)
}

fn dpp_alpha_max_of(intensity: &crate::estimators::LogLinearFit, window: &Window) -> f64 {
    crate::models::dpp_alpha_max(intensity.max_over(window))
}

fn thomas_estimate(pattern: &PointPattern, name: &str) -> Result<crate::estimators::ThomasFit> {
    match name {
        "k" => fit_thomas_contrast(pattern, Statistic::K, &ContrastConfig::k_default()),
        "pcf" => fit_thomas_contrast(pattern, Statistic::Pcf, &ContrastConfig::pcf_default()),
        "palm" => fit_palm_thomas(pattern, None),
        other => Err(Error::InvalidArgument(format!("unknown Thomas estimator `{other}`"))),
    }
}

pub(super) fn thomas_pipeline(pattern: &PointPattern, opts: &PipelineOptions) -> Result<PipelineResult> {
    let selected = opts.selected(Family::Thomas)?;
    let mut bank = EstimatorBank::<PointPattern>::new(Family::Thomas.parameters());
    for name in &selected {
        let n = name.to_string();
        bank.push(name, &["kappa", "sigma2", "mu"], move |p| {
            let f = thomas_estimate(p, &n)?;
            Ok(vec![f.kappa, f.sigma2, f.mu])
        })?;
    }
    let window = *pattern.window();
    let simulate = move |theta: &[f64], rng: &mut SimRng| {
        let spec = Thomas {
            kappa: theta[0],
            mu: theta[2],
            sigma: theta[1].sqrt(),
        };
        simulate_thomas(&spec, &window, rng)
    };
    point_pipeline(Family::Thomas, pattern, &bank, &simulate, opts, &selected)
}

/// What the Boolean estimators see: the measured set and its window.
type BooleanObservation = (SetMeasurements, Window);

pub(super) fn boolean_pipeline(set: &GermGrainSet, opts: &PipelineOptions) -> Result<PipelineResult> {
    let selected = opts.selected(Family::Boolean)?;
    let mut bank = EstimatorBank::<BooleanObservation>::new(Family::Boolean.parameters());
    for name in &selected {
        match *name {
            "area-perim" => bank.push(name, &["rho", "alpha"], |(m, _)| {
                let f = boolean_fit_area_perimeter(m)?;
                Ok(vec![f.rho, f.alpha])
            })?,
            _ => bank.push(name, &["rho"], |(m, w)| Ok(vec![boolean_fit_tangent(m, w)?]))?,
        };
    }
    if !selected.contains(&"area-perim") {
        return Err(Error::InvalidArgument("the Boolean bank needs the area-perimeter estimator for alpha".into()));
    }
    let window = *set.window();
    let obs = (measure_set(set), window);
    let initial = bank
        .evaluate(&obs)
        .map_err(|(name, e)| Error::InvalidArgument(format!("estimator `{name}` failed on the data: {e}")))?;
    let rule = anchor_rule(Family::Boolean, opts, &selected);
    let mut anchor = bank.anchor(&initial, &rule)?;
    anchor[1] = anchor[1].max(1e-3);
    let simulate = move |theta: &[f64], rng: &mut SimRng| {
        let spec = BooleanModel {
            rho: theta[0],
            alpha_r: theta[1],
        };
        let g = simulate_boolean(&spec, &window, rng)?;
        Ok((measure_set(&g), window))
    };
    let run = bootstrap_run(&simulate, &anchor, &bank, &opts.bootstrap)?;
    let groups = bank.groups()?;
    finish(Family::Boolean, bank.parameters(), bank.labels(), initial, anchor, &run.matrix, &groups, opts)
}

/// True parameter vector of a parametric model, in the family's order.
pub(super) fn truth_vector(model: &ModelSpec) -> Option<Vec<f64>> {
    match model {
        ModelSpec::Poisson(_) => None,
        ModelSpec::DppGauss(d) => Some(vec![d.alpha]),
        ModelSpec::Thomas(t) => Some(thomas_truth(t).to_vec()),
        ModelSpec::Boolean(b) => Some(vec![b.rho, b.alpha_r]),
    }
}

/// `(κ, σ², μ)`.
pub fn thomas_truth(t: &Thomas) -> [f64; 3] {
    [t.kappa, t.sigma * t.sigma, t.mu]
}

/// Runs one estimator on one observation.
pub fn fit_single(family: Family, method: &str, obs: &Realization, grid: (usize, usize)) -> Result<FitRecord> {
    let wrong = || Error::InvalidArgument(format!("observation type does not match the {family:?} family"));
    let method = method.trim().to_ascii_lowercase();
    match family {
        Family::Poisson => {
            let Realization::Points(p) = obs else { return Err(wrong()) };
            let name = method.strip_prefix("kernel:").unwrap_or(&method);
            let rule = kernel_rule(name)?;
            let b = select_bandwidth(p, rule)?;
            let field = kernel_intensity(p, grid, b)?;
            Ok(FitRecord::new(&format!("kernel:{}", rule.name()), &["bandwidth", "integral"], vec![b, field.integral()]))
        }
        Family::Dpp => {
            let Realization::Points(p) = obs else { return Err(wrong()) };
            let (alpha, converged, boundary) = dpp_estimate(p, &method)?;
            let intensity = fit_loglinear_intensity(p)?;
            let mut rec = FitRecord::new(&method, &["alpha", "beta0", "beta1"], vec![alpha, intensity.beta0, intensity.beta1]);
            rec.converged = converged;
            rec.boundary_hit = boundary;
            if boundary {
                rec.warnings.push("estimate on the search boundary".into());
            }
            Ok(rec)
        }
        Family::Thomas => {
            let Realization::Points(p) = obs else { return Err(wrong()) };
            let f = thomas_estimate(p, &method)?;
            let mut rec = FitRecord::new(&method, Family::Thomas.parameters(), vec![f.kappa, f.sigma2, f.mu]);
            rec.converged = f.converged;
            rec.boundary_hit = f.boundary_hit;
            if f.boundary_hit {
                rec.warnings.push("estimate on the search boundary".into());
            }
            Ok(rec)
        }
        Family::Boolean => {
            let Realization::Grains(g) = obs else { return Err(wrong()) };
            let m = measure_set(g);
            match method.as_str() {
                "area-perim" => {
                    let f = boolean_fit_area_perimeter(&m)?;
                    let mut rec = FitRecord::new("area-perim", &["rho", "alpha"], vec![f.rho, f.alpha]);
                    if f.alpha_clamped {
                        rec.warnings.push("shape estimate clamped to 1e-3".into());
                    }
                    Ok(rec)
                }
                "tangent" => Ok(FitRecord::new("tangent", &["rho"], vec![boolean_fit_tangent(&m, g.window())?])),
                other => Err(Error::InvalidArgument(format!("unknown Boolean estimator `{other}`"))),
            }
        }
    }
}
