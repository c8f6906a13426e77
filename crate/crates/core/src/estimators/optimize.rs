//! Derivative-free minimisers used by the contrast and Palm fits.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Golden-section search on `[lo, hi]` after a coarse scan of `scan` points
/// that brackets the best grid value, so mild multimodality is tolerated.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, scan: usize, tol: f64) -> Minimum {
    let scan = scan.max(3);
    let grid: Vec<f64> = (0..scan)
        .map(|k| lo + (hi - lo) * k as f64 / (scan - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut evaluations = scan;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (k, &v)| if v < values[b] || values[b].is_nan() { k } else { b });
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(scan - 1)];
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    evaluations += 2;
    let mut iterations = 0;
    while (b - a).abs() > tol * (1.0 + c.abs() + d.abs()) && iterations < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
        iterations += 1;
    }
    let (mut x, mut value) = if fc < fd { (c, fc) } else { (d, fd) };
    // The interior search cannot reach the endpoints themselves.
    if values[best] < value {
        x = grid[best];
        value = values[best];
    }
    Minimum {
        x: vec![x],
        value,
        evaluations,
        converged: iterations < 200,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Stop when the simplex values differ by less than this.
    pub ftol: f64,
    /// and the simplex diameter is below this.
    pub xtol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 2000,
            ftol: 1e-11,
            xtol: 1e-7,
        }
    }
}

/// Nelder–Mead simplex search with the standard coefficients.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let mut evaluations = n + 1;
    let mut converged = false;
    while evaluations < opts.max_evaluations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&k| simplex[k].clone()).collect();
        values = order.iter().map(|&k| values[k]).collect();
        let spread = (values[n] - values[0]).abs();
        let diameter = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.ftol * (1.0 + values[0].abs()) && diameter <= opts.xtol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr);
        evaluations += 1;
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            evaluations += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            evaluations += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for k in 1..=n {
                    simplex[k] = simplex[0]
                        .iter()
                        .zip(&simplex[k])
                        .map(|(b, x)| b + 0.5 * (x - b))
                        .collect();
                    values[k] = eval(&simplex[k]);
                }
                evaluations += n;
            }
        }
    }
    let best = (0..=n).fold(0, |b, k| if values[k] < values[b] { k } else { b });
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evaluations,
        converged,
    }
}

/// Projects `x` onto the box.
pub fn clamp_box(x: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter().zip(bounds).map(|(&v, &(lo, hi))| v.clamp(lo, hi)).collect()
}
