//! Area, boundary length and lower tangent points of a union of discs, and
//! the estimators of the disc model built on them.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::GermGrainSet;
use crate::summaries::Window;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetMeasurements {
    /// Covered fraction of the window.
    pub p_hat: f64,
    /// Exposed boundary length inside the window per unit area.
    pub la_hat: f64,
    pub tangent_count: usize,
}

/// Default number of scanlines for the area computation.
pub const AREA_ROWS: usize = 1024;

pub fn measure_set(set: &GermGrainSet) -> SetMeasurements {
    measure_set_with(set, AREA_ROWS)
}

/// The area is integrated over `rows` horizontal scanlines, each carrying the
/// exact length of its intersection with the union. Perimeter and tangent
/// points are exact.
pub fn measure_set_with(set: &GermGrainSet, rows: usize) -> SetMeasurements {
    let w = set.window();
    SetMeasurements {
        p_hat: covered_area(set, rows.max(1)) / w.area(),
        la_hat: exposed_length(set) / w.area(),
        tangent_count: tangent_count(set),
    }
}

fn covered_area(set: &GermGrainSet, rows: usize) -> f64 {
    let w = set.window();
    let dy = w.height() / rows as f64;
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| (set.germs()[a][1] - set.radii()[a]).total_cmp(&(set.germs()[b][1] - set.radii()[b])));
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut total = 0.0;
    for j in 0..rows {
        let y = w.y0 + (j as f64 + 0.5) * dy;
        intervals.clear();
        for &k in &order {
            let [cx, cy] = set.germs()[k];
            let r = set.radii()[k];
            if cy - r > y {
                break;
            }
            let h2 = r * r - (y - cy) * (y - cy);
            if h2 <= 0.0 {
                continue;
            }
            let h = h2.sqrt();
            let (a, b) = ((cx - h).max(w.x0), (cx + h).min(w.x1));
            if b > a {
                intervals.push((a, b));
            }
        }
        total += union_length(&mut intervals) * dy;
    }
    total
}

fn union_length(intervals: &mut [(f64, f64)]) -> f64 {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for &(a, b) in intervals.iter() {
        match current {
            Some((ca, cb)) if a <= cb => current = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                current = Some((a, b));
            }
            None => current = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = current {
        total += cb - ca;
    }
    total
}

/// Arc centred on direction `centre` with half-width `half`, as pieces of `[0, 2π)`.
fn push_arc(arcs: &mut Vec<(f64, f64)>, centre: f64, half: f64) {
    let lo = (centre - half).rem_euclid(TAU);
    let hi = lo + 2.0 * half;
    if hi <= TAU {
        arcs.push((lo, hi));
    } else {
        arcs.push((lo, TAU));
        arcs.push((0.0, hi - TAU));
    }
}

/// Boundary of each disc minus the arcs covered by other discs or lying
/// outside the window.
fn exposed_length(set: &GermGrainSet) -> f64 {
    let w = set.window();
    let germs = set.germs();
    let radii = set.radii();
    let mut arcs = Vec::new();
    let mut total = 0.0;
    'disc: for i in 0..set.len() {
        let [cx, cy] = germs[i];
        let r = radii[i];
        arcs.clear();
        // Half-planes outside the window: direction and signed distance.
        let sides = [
            (PI, cx - w.x0),
            (0.0, w.x1 - cx),
            (-0.5 * PI, cy - w.y0),
            (0.5 * PI, w.y1 - cy),
        ];
        for (dir, dist) in sides {
            let s = dist / r;
            if s <= -1.0 {
                continue 'disc;
            }
            if s < 1.0 {
                push_arc(&mut arcs, dir, s.acos());
            }
        }
        for j in 0..set.len() {
            if j == i {
                continue;
            }
            let (dx, dy) = (germs[j][0] - cx, germs[j][1] - cy);
            let rj = radii[j];
            let d = dx.hypot(dy);
            if d >= r + rj {
                continue;
            }
            if d + r <= rj {
                // Circle i lies inside disc j; identical discs keep the lower index.
                if d + rj <= r && j > i {
                    continue;
                }
                continue 'disc;
            }
            if d + rj <= r {
                continue;
            }
            let c = ((r * r + d * d - rj * rj) / (2.0 * r * d)).clamp(-1.0, 1.0);
            push_arc(&mut arcs, dy.atan2(dx), c.acos());
        }
        total += r * (TAU - union_length(&mut arcs)).max(0.0);
    }
    total
}

/// Discs whose lowest point lies in the window and is not strictly inside
/// another disc.
fn tangent_count(set: &GermGrainSet) -> usize {
    let w = set.window();
    let germs = set.germs();
    let radii = set.radii();
    (0..set.len())
        .filter(|&i| {
            let (px, py) = (germs[i][0], germs[i][1] - radii[i]);
            w.contains(px, py)
                && (0..set.len()).all(|j| {
                    j == i || {
                        let (dx, dy) = (px - germs[j][0], py - germs[j][1]);
                        dx * dx + dy * dy >= radii[j] * radii[j]
                    }
                })
        })
        .count()
}

/// Area fractions at or above this are treated as a fully covered window.
pub const SATURATION: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaPerimeterFit {
    pub rho: f64,
    pub alpha: f64,
    /// The raw shape estimate was not positive and was replaced by 1e-3.
    pub alpha_clamped: bool,
}

/// Inverts `(p, L_A)` for `(ρ, α)` using `ρE[R] = L_A/(2π(1−p))` and
/// `ρπE[R²] = −log(1−p)`.
pub fn boolean_fit_area_perimeter(m: &SetMeasurements) -> Result<AreaPerimeterFit> {
    if m.p_hat >= SATURATION {
        return Err(Error::Saturated { p_hat: m.p_hat });
    }
    if !(m.p_hat > 0.0 && m.la_hat > 0.0) {
        return Err(Error::InvalidArgument("area-perimeter fit needs a nonempty set".into()));
    }
    let c1 = m.la_hat / (TAU * (1.0 - m.p_hat));
    let c2 = -(-m.p_hat).ln_1p();
    let raw = 0.2 * PI * c1 / c2 - 2.0;
    let alpha_clamped = raw <= 0.0;
    if alpha_clamped {
        log::debug!("shape estimate {raw} is not positive; using 1e-3");
    }
    let alpha = if alpha_clamped { 1e-3 } else { raw };
    Ok(AreaPerimeterFit {
        rho: c1 * (1.0 + alpha) / crate::models::MAX_RADIUS,
        alpha,
        alpha_clamped,
    })
}

/// `ρ̂₂ = N_tangent / ((1 − p̂)|W|)`.
pub fn boolean_fit_tangent(m: &SetMeasurements, window: &Window) -> Result<f64> {
    if m.p_hat >= SATURATION {
        return Err(Error::Saturated { p_hat: m.p_hat });
    }
    Ok(m.tangent_count as f64 / ((1.0 - m.p_hat) * window.area()))
}
