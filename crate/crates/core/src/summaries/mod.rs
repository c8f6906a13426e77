//! Observation types and nonparametric spatial summaries.

mod bandwidth;
mod intensity;
mod second_order;

pub use bandwidth::{bandwidth_candidates, diggle_criterion, ppl_score, select_bandwidth, BandwidthRule};
pub use intensity::{kernel_intensity, IntensityField};
pub use second_order::{
    close_pairs, pcf_estimate, ripley_k, squared_intensity, stoyan_bandwidth, translation_weight, Pair,
};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned observation rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "degenerate window [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        Self::square(1.0)
    }

    /// `[0, side]²`.
    pub fn square(side: f64) -> Self {
        Self {
            x0: 0.0,
            x1: side,
            y0: 0.0,
            y1: side,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn min_side(&self) -> f64 {
        self.width().min(self.height())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn dilate(&self, d: f64) -> Self {
        Self {
            x0: self.x0 - d,
            x1: self.x1 + d,
            y0: self.y0 - d,
            y1: self.y1 + d,
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x0: self.x0 + dx,
            x1: self.x1 + dx,
            y0: self.y0 + dy,
            y1: self.y1 + dy,
        }
    }

    /// `|W ∩ (W + (dx, dy))|`.
    pub fn translated_overlap(&self, dx: f64, dy: f64) -> f64 {
        (self.width() - dx.abs()).max(0.0) * (self.height() - dy.abs()).max(0.0)
    }

    /// Parses `x0,x1,y0,y1`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad window coordinate `{t}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(Error::Parse(format!("window needs 4 coordinates, got {}", v.len())));
        }
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_spec_string(&self) -> String {
        format!("{},{},{},{}", self.x0, self.x1, self.y0, self.y1)
    }
}

/// Finite planar point set observed in a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<[f64; 2]>,
    window: Window,
}

impl PointPattern {
    pub fn new(points: Vec<[f64; 2]>, window: Window) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !window.contains(p[0], p[1])) {
            return Err(Error::InvalidArgument(format!(
                "point ({}, {}) lies outside the window",
                p[0], p[1]
            )));
        }
        Ok(Self { points, window })
    }

    pub fn empty(window: Window) -> Self {
        Self {
            points: Vec::new(),
            window,
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `n / |W|`.
    pub fn intensity(&self) -> f64 {
        self.len() as f64 / self.window.area()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            points: self.points.iter().map(|p| [p[0] + dx, p[1] + dy]).collect(),
            window: self.window.translate(dx, dy),
        }
    }

    /// Points of `self` followed by those of `other` (same window).
    pub fn union(&self, other: &PointPattern) -> Result<Self> {
        if self.window != other.window {
            return Err(Error::InvalidArgument("patterns have different windows".into()));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Ok(Self {
            points,
            window: self.window,
        })
    }

    /// CSV with a `# window: x0,x1,y0,y1` comment line and an `x,y` header.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# window: {}\nx,y\n", self.window.to_spec_string());
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p[0], p[1]);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (window, rows) = parse_table(text, 2)?;
        Self::new(rows.into_iter().map(|r| [r[0], r[1]]).collect(), window)
    }
}

/// Reads the shared `# window:` CSV layout used by patterns and germ-grain sets.
pub(crate) fn parse_table(text: &str, columns: usize) -> Result<(Window, Vec<Vec<f64>>)> {
    let mut window = None;
    let mut rows = Vec::new();
    let mut header_seen = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(spec) = rest.trim().strip_prefix("window:") {
                window = Some(Window::parse(spec)?);
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            if line.starts_with('x') {
                continue;
            }
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad value `{t}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != columns {
            return Err(Error::Parse(format!(
                "expected {columns} columns, found {}",
                vals.len()
            )));
        }
        rows.push(vals);
    }
    let window = window.ok_or_else(|| Error::Parse("missing `# window:` line".into()))?;
    Ok((window, rows))
}

/// Tabulated curve `r ↦ value` on a strictly increasing distance grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryFunction {
    r: Vec<f64>,
    values: Vec<f64>,
}

impl SummaryFunction {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_rgrid(&r)?;
        if r.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: r.len(),
                found: values.len(),
            });
        }
        Ok(Self { r, values })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

pub(crate) fn check_rgrid(r: &[f64]) -> Result<()> {
    if r.is_empty() {
        return Err(Error::InvalidArgument("empty distance grid".into()));
    }
    if !(r[0] >= 0.0) || r.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "distance grid must be nonnegative and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `n` equally spaced distances from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_geometry() {
        let w = Window::new(0.0, 2.0, 0.0, 3.0).unwrap();
        assert_eq!(w.area(), 6.0);
        assert_eq!(w.min_side(), 2.0);
        assert_eq!(w.translated_overlap(0.5, -1.0), 1.5 * 2.0);
        assert!(Window::new(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn pattern_csv_round_trip() {
        let w = Window::new(0.0, 2.0, -1.0, 1.0).unwrap();
        let p = PointPattern::new(vec![[0.1, 0.2], [1.9, -0.75]], w).unwrap();
        let text = p.to_csv();
        assert!(text.starts_with("# window: 0,2,-1,1\nx,y\n"));
        assert_eq!(PointPattern::from_csv(&text).unwrap(), p);
    }

    #[test]
    fn points_outside_window_rejected() {
        assert!(PointPattern::new(vec![[1.5, 0.5]], Window::unit()).is_err());
    }

    #[test]
    fn rgrid_validation() {
        assert!(SummaryFunction::new(vec![0.0, 0.1], vec![1.0, 2.0]).is_ok());
        assert!(SummaryFunction::new(vec![0.1, 0.1], vec![1.0, 2.0]).is_err());
        assert!(SummaryFunction::new(vec![-0.1, 0.1], vec![1.0, 2.0]).is_err());
    }
}
