//! Euler–Maruyama integrators for SLE_κ, SLE_κ(ρ̲) and hypergeometric SLE.
//!
//! Marked points move by exact slit steps using the driving value at the end
//! of each step, so they never cross W: a point that W jumps over is put on W
//! and leaves from the base of the slit (reflection).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loewner::{reflected_step, DrivingPath, Side, TimeGrid, Track};
use crate::rng::{normal, RngSeed};
use crate::specialfn::{hsle_f, HsleFunction};

/// Smallest step relative to the base step.
pub const DT_MIN_FACTOR: f64 = 1e-9;
/// Z is kept this far from 0 and 1 inside F′/F.
pub const Z_CLAMP: f64 = 1e-12;
/// y counts as swallowed once g(y) − W drops below this multiple of y.
pub const SWALLOW_GAP: f64 = 1e-6;
/// Hard cap on the number of steps in one run.
pub const MAX_STEPS: usize = 50_000_000;

/// How the step size reacts to the distance d from W to the nearest marked point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// dt = dt_base.
    Fixed,
    /// dt = dt_base · min(1, d²). Not suited to force points that keep
    /// returning to W (Bessel dimension below 2): use `Fixed` there.
    Capped,
    /// dt = dt_base · min(d², max(1, t)), for runs to large capacity. The
    /// cap keeps steps taken with W far from every marked point as fine as
    /// those taken near one; without it the curve is resolved unevenly on
    /// its two sides.
    ScaleFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt_base: f64,
    pub rule: StepRule,
}

impl StepControl {
    pub fn new(dt_base: f64, rule: StepRule) -> Self {
        Self { dt_base, rule }
    }

    pub fn dt_min(&self) -> f64 {
        DT_MIN_FACTOR * self.dt_base
    }

    fn dt(&self, d_min: f64, t: f64) -> f64 {
        let d2 = d_min * d_min;
        let factor = match self.rule {
            StepRule::Fixed => 1.0,
            StepRule::Capped => d2.min(1.0),
            StepRule::ScaleFree => d2.min(t.max(1.0)),
        };
        (self.dt_base * factor).max(self.dt_min())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Horizon,
    ContinuationThreshold,
    /// x was swallowed before y (hSLE only).
    SwallowedX,
}

/// A boundary force point; `x = 0` with a side stands for 0⁺ or 0⁻.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcePoint {
    pub x: f64,
    pub rho: f64,
    pub side: Side,
}

impl ForcePoint {
    pub fn right(x: f64, rho: f64) -> Self {
        Self { x, rho, side: Side::Right }
    }

    pub fn left(x: f64, rho: f64) -> Self {
        Self { x, rho, side: Side::Left }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SleParams {
    pub kappa: f64,
    pub force: Vec<ForcePoint>,
    pub horizon: f64,
    pub step: StepControl,
}

impl SleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa < 8.0) {
            return Err(Error::Domain(format!("kappa = {} outside [0, 8)", self.kappa)));
        }
        if !(self.horizon > 0.0 && self.step.dt_base > 0.0) {
            return Err(Error::Domain("horizon and dt_base must be positive".into()));
        }
        for f in &self.force {
            let ok = match f.side {
                Side::Right => f.x >= 0.0,
                Side::Left => f.x <= 0.0,
            };
            if !ok || !f.rho.is_finite() {
                return Err(Error::Domain(format!("force point {f:?} on the wrong side")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsleParams {
    pub kappa: f64,
    pub rho: f64,
    pub x: f64,
    pub y: f64,
    pub horizon: f64,
    pub step: StepControl,
    /// Keep integrating after x is swallowed instead of stopping there.
    pub continue_after_tx: bool,
}

impl HsleParams {
    pub fn new(kappa: f64, rho: f64, x: f64, y: f64, horizon: f64, dt_base: f64) -> Self {
        Self {
            kappa,
            rho,
            x,
            y,
            horizon,
            step: StepControl::new(dt_base, StepRule::Capped),
            continue_after_tx: false,
        }
    }

    pub fn function(&self) -> Result<HsleFunction> {
        HsleFunction::new(self.kappa, self.rho)
    }

    pub fn validate(&self) -> Result<()> {
        self.function()?;
        if !(self.x > 0.0 && self.y > self.x) {
            return Err(Error::Domain(format!("need 0 < x < y, got ({}, {})", self.x, self.y)));
        }
        if !(self.horizon > 0.0 && self.step.dt_base > 0.0) {
            return Err(Error::Domain("horizon and dt_base must be positive".into()));
        }
        Ok(())
    }
}

/// Result of an hSLE run.
#[derive(Debug, Clone, PartialEq)]
pub struct HsleRun {
    /// Driving path with tracks "x" and "y".
    pub path: DrivingPath,
    /// Grid index at which y was swallowed.
    pub t_y: Option<usize>,
    /// Grid index at which x was swallowed strictly before y.
    pub t_x: Option<usize>,
    pub stop: StopReason,
}

impl HsleRun {
    /// Runs that went past T_x follow a law the model does not define.
    pub fn flagged(&self) -> bool {
        self.t_x.is_some()
    }
}

/// Model-specific part of an integration.
trait Dynamics {
    fn drift(&mut self, w: f64, v: &[f64]) -> Result<f64>;
    /// Distance that controls the step size.
    fn d_min(&self, w: f64, v: &[f64]) -> f64;
    /// Called after every step with the points that W touched during it.
    fn after_step(&mut self, k: usize, w: f64, v: &[f64], contact: &[bool]) -> Option<StopReason>;
}

struct RawPath {
    times: Vec<f64>,
    w: Vec<f64>,
    values: Vec<Vec<f64>>,
    swallowed: Vec<Option<usize>>,
    stop: StopReason,
}

fn integrate<D: Dynamics>(
    dyn_: &mut D,
    kappa: f64,
    horizon: f64,
    step: StepControl,
    points: &[(f64, Side)],
    seed: RngSeed,
) -> Result<RawPath> {
    let mut rng = seed.rng();
    let m = points.len();
    let mut w = 0.0;
    let mut v: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut out = RawPath {
        times: vec![0.0],
        w: vec![0.0],
        values: v.iter().map(|&x| vec![x]).collect(),
        swallowed: vec![None; m],
        stop: StopReason::Horizon,
    };
    let mut contact = vec![false; m];
    let mut t = 0.0;
    let mut k = 0;
    while t < horizon {
        k += 1;
        if k > MAX_STEPS {
            return Err(Error::Numerical(format!("more than {MAX_STEPS} steps before t = {horizon}")));
        }
        let drift = dyn_.drift(w, &v)?;
        let mut dt = step.dt(dyn_.d_min(w, &v), t).min(horizon - t);
        while drift.abs() * dt > 4.0 * (kappa * dt).sqrt() && drift.is_finite() {
            dt *= 0.5;
            if dt < step.dt_min() {
                return Err(Error::StepSizeUnderflow { t, dt, dt_min: step.dt_min() });
            }
        }
        if !drift.is_finite() {
            return Err(Error::Numerical(format!("non-finite drift at t = {t}")));
        }
        w += drift * dt + (kappa * dt).sqrt() * normal(&mut rng);
        // the last step lands exactly on the horizon
        t = if horizon - t - dt <= 1e-15 * horizon { horizon } else { t + dt };
        for i in 0..m {
            let (img, _, hit) = reflected_step(v[i], w, dt, points[i].1 == Side::Right);
            v[i] = img;
            contact[i] = hit;
            if hit && out.swallowed[i].is_none() {
                out.swallowed[i] = Some(k);
            }
        }
        out.times.push(t);
        out.w.push(w);
        for i in 0..m {
            out.values[i].push(v[i]);
        }
        if let Some(stop) = dyn_.after_step(k, w, &v, &contact) {
            out.stop = stop;
            break;
        }
    }
    Ok(out)
}

fn assemble(raw: RawPath, names: &[String], sides: &[Side]) -> Result<DrivingPath> {
    let mut d = DrivingPath::new(TimeGrid::new(raw.times)?, raw.w)?;
    for (i, values) in raw.values.into_iter().enumerate() {
        d.tracks.push(Track { name: names[i].clone(), side: sides[i], values, swallowed: raw.swallowed[i] });
    }
    Ok(d)
}

struct Plain;

impl Dynamics for Plain {
    fn drift(&mut self, _: f64, _: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
    fn d_min(&self, _: f64, _: &[f64]) -> f64 {
        f64::INFINITY
    }
    fn after_step(&mut self, _: usize, _: f64, _: &[f64], _: &[bool]) -> Option<StopReason> {
        None
    }
}

/// W_t = √κ B_t on a uniform grid of step `dt`.
pub fn simulate_sle(kappa: f64, horizon: f64, dt: f64, seed: RngSeed) -> Result<DrivingPath> {
    if !(kappa >= 0.0) || !(horizon > 0.0) || !(dt > 0.0) {
        return Err(Error::Domain("need kappa >= 0, horizon > 0, dt > 0".into()));
    }
    let raw = integrate(&mut Plain, kappa, horizon, StepControl::new(dt, StepRule::Fixed), &[], seed)?;
    assemble(raw, &[], &[])
}

/// Σ ρ_i / (W − V_i) over the given points; points sitting on W contribute nothing.
pub fn drift_sle_rho(w: f64, points: &[(f64, f64)]) -> f64 {
    points
        .iter()
        .filter(|(v, _)| *v != w)
        .map(|(v, rho)| rho / (w - v))
        .sum()
}

struct RhoDynamics {
    rho: Vec<f64>,
    sides: Vec<Side>,
}

impl Dynamics for RhoDynamics {
    fn drift(&mut self, w: f64, v: &[f64]) -> Result<f64> {
        let pts: Vec<(f64, f64)> = v.iter().copied().zip(self.rho.iter().copied()).collect();
        Ok(drift_sle_rho(w, &pts))
    }

    fn d_min(&self, w: f64, v: &[f64]) -> f64 {
        v.iter().map(|x| (x - w).abs()).fold(f64::INFINITY, f64::min)
    }

    fn after_step(&mut self, _: usize, _: f64, _: &[f64], contact: &[bool]) -> Option<StopReason> {
        for side in [Side::Left, Side::Right] {
            let total: f64 = (0..self.rho.len())
                .filter(|&i| contact[i] && self.sides[i] == side)
                .map(|i| self.rho[i])
                .sum();
            let any = (0..self.rho.len()).any(|i| contact[i] && self.sides[i] == side);
            if any && total <= -2.0 {
                return Some(StopReason::ContinuationThreshold);
            }
        }
        None
    }
}

/// SLE_κ(ρ̲) with tracks "V1", "V2", … in the order of `p.force`.
///
/// Stops at the continuation threshold: when the points W runs into on one
/// side during a step carry total weight ≤ −2.
pub fn simulate_sle_rho(p: &SleParams, seed: RngSeed) -> Result<(DrivingPath, StopReason)> {
    let names: Vec<String> = (1..=p.force.len()).map(|i| format!("V{i}")).collect();
    simulate_sle_rho_named(p, &names, seed)
}

/// Plain SLE_κ with named marked points tracked and the step size adapted to them.
pub fn simulate_sle_marked(
    kappa: f64,
    marks: &[(&str, f64)],
    horizon: f64,
    step: StepControl,
    seed: RngSeed,
) -> Result<DrivingPath> {
    let force = marks
        .iter()
        .map(|&(_, x)| if x > 0.0 { ForcePoint::right(x, 0.0) } else { ForcePoint::left(x, 0.0) })
        .collect();
    let names: Vec<String> = marks.iter().map(|m| m.0.to_string()).collect();
    let p = SleParams { kappa, force, horizon, step };
    Ok(simulate_sle_rho_named(&p, &names, seed)?.0)
}

/// [`simulate_sle_rho`] with caller-chosen track names.
pub fn simulate_sle_rho_named(p: &SleParams, names: &[String], seed: RngSeed) -> Result<(DrivingPath, StopReason)> {
    p.validate()?;
    if names.len() != p.force.len() {
        return Err(Error::Domain("one track name per force point".into()));
    }
    let sides: Vec<Side> = p.force.iter().map(|f| f.side).collect();
    // weights already sitting at the origin
    for side in [Side::Left, Side::Right] {
        let at_zero: Vec<f64> = p.force.iter().filter(|f| f.x == 0.0 && f.side == side).map(|f| f.rho).collect();
        if !at_zero.is_empty() && at_zero.iter().sum::<f64>() <= -2.0 {
            let mut d = DrivingPath::new(TimeGrid::new(vec![0.0])?, vec![0.0])?;
            for (i, f) in p.force.iter().enumerate() {
                d.tracks.push(Track { name: names[i].clone(), side: f.side, values: vec![f.x], swallowed: Some(0) });
            }
            return Ok((d, StopReason::ContinuationThreshold));
        }
    }
    let mut dyn_ = RhoDynamics { rho: p.force.iter().map(|f| f.rho).collect(), sides: sides.clone() };
    let points: Vec<(f64, Side)> = p.force.iter().map(|f| (f.x, f.side)).collect();
    let raw = integrate(&mut dyn_, p.kappa, p.horizon, p.step, &points, seed)?;
    let stop = raw.stop;
    Ok((assemble(raw, names, &sides)?, stop))
}

/// hSLE drift (ρ+2)/(W−V^x) − (ρ+2)/(W−V^y) − κ(F′/F)(Z)(1−Z)/(V^y−W),
/// Z = (V^x−W)/(V^y−W) clamped to [ε, 1−ε] inside F′/F.
pub fn drift_hsle(state: (f64, f64, f64), p: &HsleParams) -> Result<f64> {
    let f = p.function()?;
    drift_hsle_with(state, p.kappa, p.rho, &f)
}

fn drift_hsle_with(state: (f64, f64, f64), kappa: f64, rho: f64, f: &HsleFunction) -> Result<f64> {
    let (w, vx, vy) = state;
    if !(w <= vx && vx <= vy) || w == vy {
        return Err(Error::Domain(format!("need W <= V^x <= V^y with W < V^y, got {state:?}")));
    }
    let a = rho + 2.0;
    let near = if vx == w { 0.0 } else { a / (w - vx) };
    if f.is_trivial() {
        return Ok(near - a / (w - vy));
    }
    let z = ((vx - w) / (vy - w)).clamp(Z_CLAMP, 1.0 - Z_CLAMP);
    let (fv, fp) = hsle_f(f, z)?;
    Ok(near - a / (w - vy) - kappa * (fp / fv) * (1.0 - z) / (vy - w))
}

struct HsleDynamics {
    p: HsleParams,
    f: HsleFunction,
    t_y: Option<usize>,
    t_x: Option<usize>,
}

impl Dynamics for HsleDynamics {
    fn drift(&mut self, w: f64, v: &[f64]) -> Result<f64> {
        if self.t_y.is_some() {
            return Ok(0.0);
        }
        drift_hsle_with((w, v[0], v[1]), self.p.kappa, self.p.rho, &self.f)
    }

    fn d_min(&self, w: f64, v: &[f64]) -> f64 {
        if self.t_y.is_some() {
            f64::INFINITY
        } else {
            v[0] - w
        }
    }

    fn after_step(&mut self, k: usize, w: f64, v: &[f64], contact: &[bool]) -> Option<StopReason> {
        if self.t_y.is_some() {
            return None;
        }
        let gap_x = v[0] - w;
        let gap_y = v[1] - w;
        if gap_y < SWALLOW_GAP * self.p.y || contact[1] {
            self.t_y = Some(k);
            return None;
        }
        let z = gap_x / gap_y;
        let x_gone = contact[0] || gap_x < SWALLOW_GAP * self.p.x;
        // a small gap with Z bounded below means both points are closing together
        if x_gone && z < 1e-3 && self.t_x.is_none() {
            self.t_x = Some(k);
            if !self.p.continue_after_tx {
                return Some(StopReason::SwallowedX);
            }
        }
        None
    }
}

/// Hypergeometric SLE_κ(ρ) from 0 to ∞ with marked points x < y.
pub fn simulate_hsle(p: &HsleParams, seed: RngSeed) -> Result<HsleRun> {
    p.validate()?;
    let mut dyn_ = HsleDynamics { p: *p, f: p.function()?, t_y: None, t_x: None };
    let points = [(p.x, Side::Right), (p.y, Side::Right)];
    let raw = integrate(&mut dyn_, p.kappa, p.horizon, p.step, &points, seed)?;
    let stop = raw.stop;
    let path = assemble(raw, &["x".into(), "y".into()], &[Side::Right, Side::Right])?;
    Ok(HsleRun { path, t_y: dyn_.t_y, t_x: dyn_.t_x, stop })
}

/// JSON manifest written next to simulated paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    pub params: serde_json::Value,
    pub seed: RngSeed,
    pub stop_reason: StopReason,
    pub steps: usize,
    pub flagged: bool,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new<P: Serialize>(kind: &str, params: &P, seed: RngSeed, stop: StopReason, steps: usize, started: Instant) -> Result<Self> {
        Ok(Self {
            kind: kind.to_string(),
            params: serde_json::to_value(params)?,
            seed,
            stop_reason: stop,
            steps,
            flagged: false,
            wall_time_s: started.elapsed().as_secs_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(k: u64) -> RngSeed {
        RngSeed::new(2024, k)
    }

    #[test]
    fn zero_kappa_gives_zero_driving() {
        let d = simulate_sle(0.0, 1.0, 0.01, seed(0)).unwrap();
        assert!(d.w.iter().all(|&w| w == 0.0));
        assert_eq!(d.len(), 101);
        assert_eq!(d.grid.horizon(), 1.0);
    }

    #[test]
    fn sle_variance_and_independence() {
        let n = 10_000;
        let finals: Vec<f64> = (0..n).map(|k| *simulate_sle(3.0, 1.0, 0.05, seed(k)).unwrap().w.last().unwrap()).collect();
        let mean = finals.iter().sum::<f64>() / n as f64;
        let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // SE of a normal sample variance is σ²√(2/(n−1))
        assert!((var - 3.0).abs() < 3.0 * 3.0 * (2.0 / (n - 1) as f64).sqrt(), "{var}");
        let d = simulate_sle(3.0, 100.0, 0.01, seed(99)).unwrap();
        let inc: Vec<f64> = d.w.windows(2).map(|p| p[1] - p[0]).collect();
        let m = inc.len() as f64;
        let c0: f64 = inc.iter().map(|x| x * x).sum::<f64>();
        let c1: f64 = inc.windows(2).map(|p| p[0] * p[1]).sum::<f64>();
        assert!((c1 / c0).abs() < 3.0 / m.sqrt());
    }

    #[test]
    fn hsle_drift_reference_values() {
        let p4 = HsleParams::new(4.0, 0.0, 1.0, 2.0, 1.0, 1e-3);
        assert_eq!(drift_hsle((0.0, 1.0, 2.0), &p4).unwrap(), -1.0);
        let p = HsleParams::new(3.0, -2.0, 1.0, 2.0, 1.0, 1e-3);
        assert_eq!(drift_hsle((0.3, 1.0, 2.0), &p).unwrap(), 0.0);
        let p3 = HsleParams::new(3.0, 0.0, 1.0, 2.0, 1.0, 1e-3);
        let v = drift_hsle((0.0, 1.0, 2.0), &p3).unwrap();
        assert!((v + 0.819_190_533_927_856_7).abs() < 1e-13, "{v}");
        assert!(drift_hsle((1.5, 1.0, 2.0), &p3).is_err());
    }

    #[test]
    fn continuation_threshold() {
        // V − W is a Bessel process of dimension close to 1 here; it keeps
        // returning to 0, which the d²-capped rule would resolve forever
        let fixed = StepControl::new(1e-3, StepRule::Fixed);
        let step = StepControl::new(1e-3, StepRule::Capped);
        let p = SleParams { kappa: 3.0, force: vec![ForcePoint::right(0.0, -1.9)], horizon: 1.0, step: fixed };
        for k in 0..20 {
            let (_, stop) = simulate_sle_rho(&p, seed(k)).unwrap();
            assert_eq!(stop, StopReason::Horizon);
        }
        let p = SleParams { kappa: 3.0, force: vec![ForcePoint::right(0.0, -2.0)], horizon: 1.0, step };
        assert_eq!(simulate_sle_rho(&p, seed(0)).unwrap().1, StopReason::ContinuationThreshold);
        // a point of weight −3 at x = 1 is reached in finite time
        let p = SleParams { kappa: 3.0, force: vec![ForcePoint::right(1.0, -3.0)], horizon: 50.0, step };
        let hits = (0..20).filter(|&k| simulate_sle_rho(&p, seed(k)).unwrap().1 == StopReason::ContinuationThreshold).count();
        assert!(hits >= 15, "{hits}");
    }

    #[test]
    fn ordering_is_preserved() {
        let p = HsleParams::new(3.0, 0.0, 1.0, 2.0, 2.0, 1e-3);
        for k in 0..10 {
            let run = simulate_hsle(&p, seed(k)).unwrap();
            let d = &run.path;
            let (x, y) = (&d.tracks[0].values, &d.tracks[1].values);
            for i in 0..d.len() {
                assert!(d.w[i] <= x[i] && x[i] <= y[i]);
                let z = (x[i] - d.w[i]) / (y[i] - d.w[i]);
                assert!((0.0..=1.0).contains(&z));
            }
            assert_eq!(run.stop, StopReason::Horizon);
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let p = HsleParams::new(6.0, 0.0, 1.0, 2.0, 1.0, 1e-3);
        let a = simulate_hsle(&p, seed(5)).unwrap();
        let b = simulate_hsle(&p, seed(5)).unwrap();
        assert_eq!(a, b);
    }
}
