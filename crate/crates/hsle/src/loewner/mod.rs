//! Discrete Loewner chains built from vertical-slit maps.
//!
//! A [`DrivingPath`] holds the driving values on a capacity-time grid. Step k
//! (from t_{k−1} to t_k) uses the constant driving value W_k, so the chain is
//! g_t = g_k ∘ … ∘ g_1 with g_j the slit map of [`SlitStep`] `(W_j, δt_j)`.

mod io;
mod slit;
mod trace;
mod zipper;

pub use io::{read_curve_csv, read_driving_csv, write_curve_csv, write_driving_csv};
pub use slit::{reflected_step, HullMapState, RealImage, SlitStep, NEAR_REAL};
pub use trace::{forward_trace, forward_trace_strided, mobius_reverse, trace_vertices};
pub use zipper::{conformal_transport, extract_driving, extract_driving_coarse, extract_driving_until, resample_arclength, transport_real};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Strictly increasing capacity times starting at 0 (a(K_t) = 2t).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::Domain("time grid must start at 0".into()));
        }
        for pair in times.windows(2) {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return Err(Error::Domain(format!(
                    "time grid not strictly increasing at {} -> {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { times })
    }

    /// n equal steps on [0, T].
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || steps == 0 {
            return Err(Error::Domain("uniform grid needs T > 0 and at least one step".into()));
        }
        let dt = horizon / steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        times[steps] = horizon;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.times[k] - self.times[k - 1]
    }
}

/// Which side of the driving value a marked point starts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// What happens to a tracked point after it first touches the driving value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contact {
    /// Keep evolving from the slit base (reflection).
    Reflect,
    /// Glue the point to the driving value from then on.
    Absorb,
}

/// The image V_t = g_t(v) of one marked boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub name: String,
    pub side: Side,
    pub values: Vec<f64>,
    /// First grid index at which the point touched the driving value.
    pub swallowed: Option<usize>,
}

/// Driving values on a grid together with tracked marked points.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    pub grid: TimeGrid,
    pub w: Vec<f64>,
    pub tracks: Vec<Track>,
}

impl DrivingPath {
    pub fn new(grid: TimeGrid, w: Vec<f64>) -> Result<Self> {
        if grid.len() != w.len() {
            return Err(Error::Domain(format!(
                "{} driving values for {} grid points",
                w.len(),
                grid.len()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite driving value".into()));
        }
        Ok(Self { grid, w, tracks: Vec::new() })
    }

    /// Driving function sampled on a uniform grid from a closure.
    pub fn from_fn(horizon: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = TimeGrid::uniform(horizon, steps)?;
        let w = grid.times().iter().map(|&t| f(t)).collect();
        Self::new(grid, w)
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    /// The slit step for grid interval k (1 ≤ k < len).
    pub fn step(&self, k: usize) -> SlitStep {
        SlitStep::new(self.w[k], self.grid.dt(k))
    }

    pub fn steps(&self) -> impl Iterator<Item = SlitStep> + '_ {
        (1..self.len()).map(move |k| self.step(k))
    }

    /// g_t for the first `upto` grid intervals.
    pub fn hull_map(&self, upto: usize) -> HullMapState {
        HullMapState::from_steps((1..=upto.min(self.len().saturating_sub(1))).map(|k| self.step(k)).collect())
    }

    pub fn track(&self, name: &str) -> Option<&Track> {
        self.tracks.iter().find(|t| t.name == name)
    }

    /// Restriction to the grid points 0..=k.
    pub fn truncate(&self, k: usize) -> Self {
        let n = (k + 1).min(self.len());
        let grid = TimeGrid { times: self.grid.times[..n].to_vec() };
        let tracks = self
            .tracks
            .iter()
            .map(|t| Track {
                name: t.name.clone(),
                side: t.side,
                values: t.values[..n].to_vec(),
                swallowed: t.swallowed.filter(|&s| s < n),
            })
            .collect();
        Self { grid, w: self.w[..n].to_vec(), tracks }
    }
}

/// Finite polyline in the closed upper half-plane starting on ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneCurve {
    pub points: Vec<Complex64>,
    pub base: f64,
}

impl HalfPlaneCurve {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        let first = *points.first().ok_or_else(|| Error::Domain("empty curve".into()))?;
        if first.im.abs() > NEAR_REAL {
            return Err(Error::Domain(format!("curve base {first} is not real")));
        }
        if let Some(p) = points.iter().find(|p| p.im < -NEAR_REAL || !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::Domain(format!("curve point {p} below the real line")));
        }
        Ok(Self { base: first.re, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tip(&self) -> Complex64 {
        *self.points.last().expect("curve is nonempty")
    }

    /// Distance from the polyline to a real interval [a, b].
    pub fn distance_to_interval(&self, a: f64, b: f64) -> f64 {
        let point_dist = |p: Complex64| {
            let dx = if p.re < a { a - p.re } else if p.re > b { p.re - b } else { 0.0 };
            dx.hypot(p.im)
        };
        let mut best = f64::INFINITY;
        for pair in self.points.windows(2) {
            let (p, q) = (pair[0], pair[1]);
            best = best.min(point_dist(p));
            // a segment that crosses ℝ inside [a, b] touches the interval
            if (p.im - q.im).abs() > 0.0 {
                let s = p.im / (p.im - q.im);
                if (0.0..=1.0).contains(&s) {
                    best = best.min(point_dist(p + (q - p) * s));
                }
            }
            // closest approach of the segment to the endpoints
            for e in [a, b] {
                let d = q - p;
                let len2 = d.norm_sqr();
                if len2 > 0.0 {
                    let s = ((Complex64::new(e, 0.0) - p) * d.conj()).re / len2;
                    if (0.0..=1.0).contains(&s) {
                        best = best.min(point_dist(p + d * s));
                    }
                }
            }
        }
        if let Some(&last) = self.points.last() {
            best = best.min(point_dist(last));
        }
        best
    }
}

/// Track real points along a driving path with exact slit steps and reflection.
pub fn evolve_points(d: &DrivingPath, pts: &[(String, f64)]) -> Result<DrivingPath> {
    evolve_points_with(d, pts, Contact::Reflect)
}

/// [`evolve_points`] with an explicit contact rule.
pub fn evolve_points_with(d: &DrivingPath, pts: &[(String, f64)], contact: Contact) -> Result<DrivingPath> {
    let mut out = d.clone();
    let w0 = d.w[0];
    for (name, v) in pts {
        if *v == w0 {
            return Err(Error::Domain(format!("point {name} = {v} sits on the base of the curve")));
        }
        let side = if *v > w0 { Side::Right } else { Side::Left };
        let mut values = Vec::with_capacity(d.len());
        values.push(*v);
        let mut swallowed = None;
        let mut cur = *v;
        for k in 1..d.len() {
            let s = d.step(k);
            if swallowed.is_some() && contact == Contact::Absorb {
                cur = s.w;
            } else {
                let (img, _, hit) = reflected_step(cur, s.w, s.dt, side == Side::Right);
                if hit && swallowed.is_none() {
                    swallowed = Some(k);
                }
                cur = if hit && contact == Contact::Absorb { s.w } else { img };
            }
            values.push(cur);
        }
        out.tracks.retain(|t| &t.name != name);
        out.tracks.push(Track { name: name.clone(), side, values, swallowed });
    }
    Ok(out)
}
