use spavg::averaging::{combine, GroupMode, GroupStructure};
use spavg::bootstrap::BootstrapConfig;
use spavg::harness::*;
use spavg::models::*;
use spavg::rng::StreamSeed;
use spavg::summaries::Window;

fn options(n: usize, seed: u64) -> PipelineOptions {
    PipelineOptions {
        bootstrap: BootstrapConfig {
            n_samples: n,
            seed,
            anchor: None,
        },
        ..PipelineOptions::default()
    }
}

fn observe(name: &str, window: Window, seed: u64) -> (ModelSpec, Realization) {
    let m = ModelSpec::from_name(name, &[]).unwrap();
    let obs = m.simulate(&window, &mut StreamSeed::new(seed).rng()).unwrap();
    (m, obs)
}

#[test]
fn dpp_pipeline_contract() {
    let (_, obs) = observe("dpp1", Window::unit(), 2);
    let res = average_pipeline(&obs, Family::Dpp, &options(30, 1)).unwrap();
    assert_eq!(res.initial.len(), 3);
    assert_eq!(res.labels, vec!["k:alpha", "pcf:alpha", "palm:alpha"]);
    let av = res.mode(AveragingMode::Av).unwrap();
    let w: f64 = av.weights.iter().map(|r| r[0]).sum();
    assert!((w - 1.0).abs() < 1e-9);
    assert!(av.estimated_mse[0] > 0.0 && av.estimated_mse[0].is_finite());
    let convex = res.mode(AveragingMode::Convex).unwrap();
    assert!(convex.weights.iter().all(|r| r[0] >= 0.0));
}

#[test]
fn thomas_av_plus_weight_matrix_obeys_group_sums() {
    let (_, obs) = observe("thomas", Window::unit(), 3);
    let mut opts = options(20, 5);
    opts.modes = vec![AveragingMode::Av, AveragingMode::AvPlus];
    let res = average_pipeline(&obs, Family::Thomas, &opts).unwrap();
    let plus = res.mode(AveragingMode::AvPlus).unwrap();
    assert_eq!(plus.weights.len(), 9);
    assert!(plus.weights.iter().all(|r| r.len() == 3));
    for p in 0..3 {
        for q in 0..3 {
            let s: f64 = (3 * q..3 * q + 3).map(|i| plus.weights[i][p]).sum();
            let target = if p == q { 1.0 } else { 0.0 };
            assert!((s - target).abs() < 1e-8, "column {p} group {q}: {s}");
        }
    }
    let av = res.mode(AveragingMode::Av).unwrap();
    for p in 0..3 {
        for (i, row) in av.weights.iter().enumerate() {
            if i / 3 != p {
                assert!(row[p].abs() < 1e-12);
            }
        }
    }
    assert_eq!(res.anchor.len(), 3);
    // pcf anchor
    assert_eq!(res.anchor[0], res.initial[1]);
}

#[test]
fn boolean_alpha_weights_act_on_rho_difference() {
    let (_, obs) = observe("boolean", Window::unit(), 4);
    let res = average_pipeline(&obs, Family::Boolean, &options(40, 2)).unwrap();
    assert_eq!(res.labels, vec!["area-perim:rho", "tangent:rho", "area-perim:alpha"]);
    let plus = res.mode(AveragingMode::AvPlus).unwrap();
    // alpha column: (mu, -mu, 1)
    let col: Vec<f64> = plus.weights.iter().map(|r| r[1]).collect();
    assert!((col[0] + col[1]).abs() < 1e-10);
    assert!((col[2] - 1.0).abs() < 1e-10);
    let mu = col[0];
    let by_hand = res.initial[2] + mu * (res.initial[0] - res.initial[1]);
    assert!((plus.estimates[1] - by_hand).abs() < 1e-10 * by_hand.abs());
    // Hand matrix product against combine().
    let sigma = spavg::MseMatrix::new(res.labels.clone(), spavg::Matrix::from_rows(&res.mse_matrix).unwrap()).unwrap();
    let groups = GroupStructure::new(vec![2, 1]).unwrap();
    let sol = spavg::averaging::group_weights(&sigma, &groups, GroupMode::Full).unwrap();
    let c = combine(&res.initial, &sol).unwrap();
    for p in 0..2 {
        let hand: f64 = (0..3).map(|m| plus.weights[m][p] * res.initial[m]).sum();
        assert!((c[p] - hand).abs() < 1e-9 * hand.abs());
    }
    // Masked AV leaves alpha untouched.
    let av = res.mode(AveragingMode::Av).unwrap();
    assert_eq!(av.estimates[1], res.initial[2]);
}

#[test]
fn poisson_pipeline_clamps_combined_fields() {
    let (_, obs) = observe("poisson3", Window::unit(), 6);
    let mut opts = options(10, 3);
    opts.grid = (32, 32);
    let res = average_pipeline(&obs, Family::Poisson, &opts).unwrap();
    let fields = res.fields.as_ref().unwrap();
    assert_eq!(fields.initial.len(), 3);
    assert_eq!(fields.combined.len(), 3);
    for f in &fields.combined {
        assert!(f.values().iter().all(|&v| v >= 0.0));
        assert_eq!((f.nx(), f.ny()), (32, 32));
    }
    let w: f64 = res.modes[0].weights.iter().map(|r| r[0]).sum();
    assert!((w - 1.0).abs() < 1e-9);
    assert_eq!(res.mse_matrix.len(), 3);
}

#[test]
fn estimator_subset_and_anchor_fallback() {
    let (_, obs) = observe("dpp1", Window::unit(), 8);
    let mut opts = options(20, 4);
    opts.estimators = Some(vec!["k".into(), "pcf".into()]);
    let res = average_pipeline(&obs, Family::Dpp, &opts).unwrap();
    assert_eq!(res.initial.len(), 2);
    assert!((res.anchor[0] - 0.5 * (res.initial[0] + res.initial[1])).abs() < 1e-15);
    opts.estimators = Some(vec!["tangent".into()]);
    assert!(average_pipeline(&obs, Family::Dpp, &opts).is_err());
}

#[test]
fn mismatched_observation_is_rejected() {
    let (_, obs) = observe("boolean", Window::unit(), 1);
    assert!(average_pipeline(&obs, Family::Thomas, &options(10, 0)).is_err());
}

#[test]
fn single_replication_has_no_standard_error() {
    let cfg = ExperimentConfig::parse("model = boolean\nreplications = 1\nboot_n = 10\nseed = 2\n").unwrap();
    let t = run_replication_study(&cfg).unwrap();
    assert!(t.rows.iter().all(|r| r.se.is_none() && r.mse >= 0.0));
    assert!(t.to_csv().lines().nth(1).unwrap().ends_with(','));
}

#[test]
fn study_rows_and_reproducibility_across_thread_counts() {
    let text = "model = boolean\nreplications = 12\nboot_n = 15\nseed = 9\n";
    let mut cfg = ExperimentConfig::parse(text).unwrap();
    cfg.threads = Some(1);
    let a = run_replication_study(&cfg).unwrap();
    cfg.threads = Some(3);
    let b = run_replication_study(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    let names: Vec<(&str, &str)> = a.rows.iter().map(|r| (r.name.as_str(), r.parameter.as_str())).collect();
    assert_eq!(
        names,
        vec![
            ("area-perim", "rho"),
            ("tangent", "rho"),
            ("AV", "rho"),
            ("AV+", "rho"),
            ("convex", "rho"),
            ("area-perim", "alpha"),
            ("AV", "alpha"),
            ("AV+", "alpha"),
            ("convex", "alpha"),
        ]
    );
    assert!(a.rows.iter().all(|r| r.se.is_some() && r.mse >= 0.0));
}

#[test]
fn fit_single_records() {
    let (_, obs) = observe("thomas", Window::unit(), 12);
    let rec = fit_single(Family::Thomas, "pcf", &obs, (128, 128)).unwrap();
    assert_eq!(rec.parameters, vec!["kappa", "sigma2", "mu"]);
    assert!(rec.values.iter().all(|v| *v > 0.0));
    let rec = fit_single(Family::Poisson, "kernel:ppl", &obs, (16, 16)).unwrap();
    assert_eq!(rec.estimator, "kernel:ppl");
    assert!(fit_single(Family::Thomas, "tangent", &obs, (16, 16)).is_err());
}
