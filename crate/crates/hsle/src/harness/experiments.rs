//! Bodies of the registered experiments.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::stats::{self, Check, Rule};
use super::{ExperimentSpec, Outcome, Table, Tolerances};
use crate::error::{Error, Result};
use crate::interfaces::{embed_interface, trace_fk_exploration, trace_spin_interface, TurnRule};
use crate::lattice::{
    beta_critical, crossing_event, edwards_sokal_marginal, enumerate_fk, enumerate_ising, p_critical, Config,
    CrossingEvent, FkBoundaryCondition, FkLabel, FkSampler, IsingSampler, LatticeQuad, SpinBoundaryCondition,
    SpinLabel, DEFAULT_STATE_CAP,
};
use crate::loewner::{
    extract_driving, extract_driving_coarse, forward_trace, forward_trace_strided, mobius_reverse, trace_vertices,
    DrivingPath, HalfPlaneCurve,
};
use crate::observables::{conditioning_weight, guard_index, zj_path, HsleMartingaleSpec};
use crate::resampler::{run_chain, sample_pairs_direct, PairState, ResampleParams, Side};
use crate::rng::RngSeed;
use crate::sde::{
    drift_hsle, drift_sle_rho, simulate_hsle, simulate_sle, simulate_sle_marked, simulate_sle_rho, ForcePoint,
    HsleParams, SleParams, StepControl, StepRule,
};
use crate::specialfn::{gauss_2f1_at_one, gauss_2f1_series_limit, HsleFunction};

pub(crate) fn dispatch(spec: &ExperimentSpec, tol: &Tolerances) -> Result<Outcome> {
    let ctx = Ctx { spec, tol };
    match spec.id.as_str() {
        "hypergeom-identities" => hypergeom_identities(&ctx),
        "loewner-analytics" => loewner_analytics(&ctx),
        "martingale-flatness" => martingale_flatness(&ctx),
        "pair-normalization" => pair_normalization(&ctx),
        "hsle-avoidance" => hsle_avoidance(&ctx),
        "degenerations" => degenerations(&ctx),
        "reversibility" => reversibility(&ctx),
        "lattice-exactness" => lattice_exactness(&ctx),
        "ising-sle3" => lattice_sle(&ctx, LatticeModel::Ising),
        "fk-sle163" => lattice_sle(&ctx, LatticeModel::Fk),
        "conditioned-law" => conditioned_law(&ctx),
        "pair-chain" => pair_chain(&ctx),
        "bc-monotonicity" => bc_monotonicity(&ctx),
        "zero-capacity" => zero_capacity(&ctx),
        "sle-variance" => sle_variance(&ctx),
        other => Err(Error::Domain(format!("unknown experiment {other:?}"))),
    }
}

struct Ctx<'a> {
    spec: &'a ExperimentSpec,
    tol: &'a Tolerances,
}

impl Ctx<'_> {
    fn params<T: DeserializeOwned + Serialize + Default>(&self) -> Result<(T, Value)> {
        let p: T = match &self.spec.params {
            Value::Null => T::default(),
            v => serde_json::from_value(v.clone())?,
        };
        let v = serde_json::to_value(&p)?;
        Ok((p, v))
    }

    fn tol(&self, name: &str) -> Result<f64> {
        self.tol.get(&self.spec.id, name)
    }

    fn ensemble(&self, default: usize) -> Result<usize> {
        match self.spec.ensemble {
            Some(0) => Err(Error::Domain("ensemble size must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(default),
        }
    }

    /// Seed of replica k in sub-ensemble `set`.
    fn seed(&self, set: u64, k: usize) -> RngSeed {
        RngSeed::new(self.spec.seed, set).replica(k as u64)
    }
}

fn outcome(checks: Vec<Check>, data: Table, params: Value, ensemble: usize) -> Outcome {
    Outcome { checks, data, params, ensemble, notes: Vec::new() }
}

/// Ordered parallel map over replica indices.
fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

/// W at time t by linear interpolation on the grid.
pub fn driving_at(d: &DrivingPath, t: f64) -> Result<f64> {
    let ts = d.times();
    if !(t >= ts[0] && t <= ts[ts.len() - 1]) {
        return Err(Error::Domain(format!("time {t} outside [{}, {}]", ts[0], ts[ts.len() - 1])));
    }
    let k = ts.partition_point(|&s| s < t);
    if k == 0 || ts[k] == t {
        return Ok(d.w[k]);
    }
    let u = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    Ok(d.w[k - 1] + u * (d.w[k] - d.w[k - 1]))
}

// ---------------------------------------------------------------- criterion 1

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct HypergeomParams {
    kappas: Vec<f64>,
    rhos: Vec<f64>,
    z_points: usize,
    z_max: f64,
    series_terms: usize,
}

impl Default for HypergeomParams {
    fn default() -> Self {
        Self {
            kappas: vec![2.0, 3.0, 4.0, 16.0 / 3.0, 6.0],
            rhos: vec![-1.5, 0.0, 1.0],
            z_points: 100,
            z_max: 0.999,
            series_terms: 1_000_000,
        }
    }
}

fn hypergeom_identities(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<HypergeomParams>()?;
    let mut data = Table::new(&["kappa", "rho", "series", "gauss", "rel_err", "max_residual"]);
    let (mut worst_gauss, mut worst_res) = (0.0f64, 0.0f64);
    for &k in &p.kappas {
        for &r in &p.rhos {
            let f = HsleFunction::new(k, r)?;
            let hp = f.params();
            let (series, gauss) = if f.is_trivial() {
                (1.0, f.at_one()?)
            } else {
                (gauss_2f1_series_limit(&hp, p.series_terms)?, gauss_2f1_at_one(&hp)?)
            };
            let rel = (series - gauss).abs() / gauss.abs();
            // residual of z(1−z)F″ + (c − (a+b+1)z)F′ − abF, relative to its largest term
            let mut res = 0.0f64;
            for i in 1..=p.z_points {
                let z = p.z_max * i as f64 / p.z_points as f64;
                let [f0, f1, f2] = f.derivs(z)?;
                let terms = [z * (1.0 - z) * f2, (hp.c - (hp.a + hp.b + 1.0) * z) * f1, -hp.a * hp.b * f0];
                let scale = terms.iter().fold(1.0f64, |m, t| m.max(t.abs()));
                res = res.max(terms.iter().sum::<f64>().abs() / scale);
            }
            worst_gauss = worst_gauss.max(rel);
            worst_res = worst_res.max(res);
            data.push(vec![k, r, series, gauss, rel, res]);
        }
    }
    let checks = vec![
        Check::new("gauss-at-one", worst_gauss, Rule::AtMost { bound: ctx.tol("series_rel")? }),
        Check::new("ode-residual", worst_res, Rule::AtMost { bound: ctx.tol("residual")? }),
    ];
    let n = data.rows.len();
    Ok(outcome(checks, data, pv, n))
}

// ---------------------------------------------------------------- criterion 2

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct LoewnerParams {
    horizon: f64,
    slit_steps: usize,
    kappa: f64,
    steps: usize,
    refinement: usize,
    oversample: usize,
}

impl Default for LoewnerParams {
    fn default() -> Self {
        Self { horizon: 1.0, slit_steps: 10_000, kappa: 3.0, steps: 1000, refinement: 4, oversample: 2 }
    }
}

/// sup |W − Ŵ| for Ŵ = extract_driving(forward_trace(d)).
fn round_trip_error(d: &DrivingPath) -> Result<f64> {
    let back = extract_driving(&forward_trace(d)?)?;
    Ok(back.w.iter().zip(&d.w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Unzips the polyline through every `oversample`-th vertex of the trace of
/// `fine` and compares the driving value recovered at each vertex with the
/// one that produced it. This is the discretization error of replacing the
/// curve between vertices by straight slits.
fn sampled_round_trip_error(fine: &DrivingPath, oversample: usize) -> Result<f64> {
    let back = extract_driving(&forward_trace_strided(fine, oversample)?)?;
    let n = back.len().min((fine.len() - 1) / oversample + 1);
    Ok((0..n).fold(0.0f64, |m, i| m.max((back.w[i] - fine.w[i * oversample]).abs())))
}

fn loewner_analytics(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<LoewnerParams>()?;
    let n = ctx.ensemble(20)?;
    let zero = DrivingPath::from_fn(p.horizon, p.slit_steps, |_| 0.0)?;
    let tip = forward_trace(&zero)?.tip();
    let tip_err = (tip - Complex64::new(0.0, 2.0 * p.horizon.sqrt())).norm();
    let errs = par_map(n, |k| {
        let seed = ctx.seed(0, k);
        let sle = |steps: usize| simulate_sle(p.kappa, p.horizon, p.horizon / steps as f64, seed);
        let exact = round_trip_error(&sle(p.steps)?)?;
        let coarse = sampled_round_trip_error(&sle(p.steps * p.oversample)?, p.oversample)?;
        let fine = sampled_round_trip_error(&sle(p.steps * p.refinement * p.oversample)?, p.oversample)?;
        Ok((coarse, fine, exact))
    })?;
    let mut data = Table::new(&["replica", "error", "error_refined", "error_exact"]);
    for (k, (a, b, c)) in errs.iter().enumerate() {
        data.push(vec![k as f64, *a, *b, *c]);
    }
    let worst = errs.iter().fold(0.0f64, |m, e| m.max(e.0));
    let worst_exact = errs.iter().fold(0.0f64, |m, e| m.max(e.2));
    let mean_c = errs.iter().map(|e| e.0).sum::<f64>() / n as f64;
    let mean_f = errs.iter().map(|e| e.1).sum::<f64>() / n as f64;
    let band = ctx.tol("halving_band")?;
    let checks = vec![
        Check::new("slit-tip", tip_err, Rule::AtMost { bound: ctx.tol("tip")? }),
        Check::new("round-trip", worst, Rule::AtMost { bound: ctx.tol("round_trip")? }),
        Check::new("round-trip-exact", worst_exact, Rule::AtMost { bound: ctx.tol("round_trip")? }),
        Check::new("refinement-ratio", mean_c / mean_f, Rule::Between { lo: 2.0 * (1.0 - band), hi: 2.0 * (1.0 + band) }),
    ];
    Ok(outcome(checks, data, pv, n))
}

// ---------------------------------------------------------------- criterion 3

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct FlatnessParams {
    cases: Vec<(f64, f64)>,
    x: f64,
    y: f64,
    horizon: f64,
    dt_base: f64,
    guard: f64,
}

impl Default for FlatnessParams {
    fn default() -> Self {
        Self {
            cases: vec![(3.0, 0.0), (3.0, -1.5), (2.0, 1.0), (16.0 / 3.0, 0.0)],
            x: 1.0,
            y: 2.0,
            horizon: 1.0,
            dt_base: 1e-3,
            guard: 100.0,
        }
    }
}

fn martingale_flatness(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<FlatnessParams>()?;
    let n = ctx.ensemble(10_000)?;
    let k_se = ctx.tol("k_se")?;
    let mut data = Table::new(&["case", "replica", "m_stop"]);
    let mut checks = Vec::new();
    for (ci, &(kappa, rho)) in p.cases.iter().enumerate() {
        let spec = HsleMartingaleSpec::new(kappa, rho, p.x, p.y)?;
        let m0 = spec.m0()?;
        let vals = par_map(n, |k| {
            let d = simulate_sle_marked(
                kappa,
                &[("x", p.x), ("y", p.y)],
                p.horizon,
                StepControl::new(p.dt_base, StepRule::Capped),
                ctx.seed(ci as u64, k),
            )?;
            let zj = zj_path(&d)?;
            match zj[guard_index(&zj, p.guard)] {
                Some((z, j)) => spec.value(z.clamp(0.0, 1.0), j),
                None => Ok(0.0),
            }
        })?;
        for (k, v) in vals.iter().enumerate() {
            data.push(vec![ci as f64, k as f64, *v]);
        }
        let (m, se) = stats::mean_se(&vals);
        checks.push(Check::new(format!("kappa={kappa:.4},rho={rho}"), m, Rule::WithinSe { target: m0, k: k_se }).with_se(se));
    }
    Ok(outcome(checks, data, pv, n))
}

// ---------------------------------------------------------------- criterion 4

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct NormalizationParams {
    kappa: f64,
    rho: f64,
    x: f64,
    y: f64,
    horizon: f64,
    half_horizon: f64,
    dt_base: f64,
}

impl Default for NormalizationParams {
    fn default() -> Self {
        Self { kappa: 3.0, rho: 0.0, x: 1.0, y: 2.0, horizon: 40.0, half_horizon: 20.0, dt_base: 1e-3 }
    }
}

fn pair_normalization(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<NormalizationParams>()?;
    let n = ctx.ensemble(10_000)?;
    let spec = HsleMartingaleSpec::new(p.kappa, p.rho, p.x, p.y)?;
    let b = spec.b();
    let target = spec.poisson_mean()?;
    let rows = par_map(n, |k| {
        let d = simulate_sle_marked(
            p.kappa,
            &[("x", p.x), ("y", p.y)],
            p.horizon,
            StepControl::new(p.dt_base, StepRule::ScaleFree),
            ctx.seed(0, k),
        )?;
        let zj = zj_path(&d)?;
        let at = |t: f64| {
            let i = d.times().partition_point(|&s| s < t).min(d.len() - 1);
            zj[i].map_or(0.0, |(_, j)| j.powf(b))
        };
        Ok((at(p.half_horizon), at(p.horizon)))
    })?;
    let mut data = Table::new(&["replica", "jb_half", "jb"]);
    for (k, r) in rows.iter().enumerate() {
        data.push(vec![k as f64, r.0, r.1]);
    }
    let full: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let half: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (m, se) = stats::mean_se(&full);
    let (mh, _) = stats::mean_se(&half);
    let checks = vec![
        Check::new("mean-jb", m, Rule::WithinSe { target, k: ctx.tol("k_se")? }).with_se(se),
        Check::new("horizon-change", (m - mh).abs() / m, Rule::AtMost { bound: ctx.tol("horizon_change")? }),
    ];
    Ok(outcome(checks, data, pv, n))
}

// ---------------------------------------------------------------- criterion 5

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct AvoidanceParams {
    kappa: f64,
    rhos: Vec<f64>,
    contrast_rho: f64,
    x: f64,
    y: f64,
    horizon: f64,
    dt_base: f64,
    resolution: f64,
    trace_points: usize,
}

impl Default for AvoidanceParams {
    fn default() -> Self {
        Self {
            kappa: 3.0,
            rhos: vec![0.0, -1.4],
            contrast_rho: -3.0,
            x: 1.0,
            y: 2.0,
            horizon: 20.0,
            dt_base: 3e-3,
            resolution: 1e-2,
            trace_points: 400,
        }
    }
}

fn hsle_avoidance(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<AvoidanceParams>()?;
    let n = ctx.ensemble(1000)?;
    let mut data = Table::new(&["rho", "replica", "hit", "distance", "swallowed_x"]);
    let mut checks = Vec::new();
    let rhos: Vec<f64> = p.rhos.iter().copied().chain([p.contrast_rho]).collect();
    for (ri, &rho) in rhos.iter().enumerate() {
        let mut hp = HsleParams::new(p.kappa, rho, p.x, p.y, p.horizon, p.dt_base);
        hp.step = StepControl::new(p.dt_base, StepRule::ScaleFree);
        let rows = par_map(n, |k| {
            let run = simulate_hsle(&hp, ctx.seed(ri as u64, k))?;
            let stride = (run.path.len() / p.trace_points).max(1);
            let c = forward_trace_strided(&run.path, stride)?;
            let dist = c.distance_to_interval(p.x, p.y);
            Ok((run.t_x.is_some() || dist < p.resolution, dist, run.t_x.is_some()))
        })?;
        let hits = rows.iter().filter(|r| r.0).count();
        for (k, r) in rows.iter().enumerate() {
            data.push(vec![rho, k as f64, r.0 as u8 as f64, r.1, r.2 as u8 as f64]);
        }
        let frac = hits as f64 / n as f64;
        let (lo, hi) = stats::wilson(hits, n, 1.96);
        let se = (hi - lo) / (2.0 * 1.96);
        let rule = if ri < p.rhos.len() {
            Rule::AtMost { bound: ctx.tol("max_hit")? }
        } else {
            Rule::AtLeast { bound: ctx.tol("min_hit_contrast")? }
        };
        checks.push(Check::new(format!("hit-fraction,rho={rho}"), frac, rule).with_se(se));
    }
    Ok(outcome(checks, data, pv, n))
}

// ---------------------------------------------------------------- criterion 6

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct DegenerationParams {
    kappa: f64,
    rho: f64,
    x: f64,
    far_y: f64,
    horizon: f64,
    dt_base: f64,
}

impl Default for DegenerationParams {
    fn default() -> Self {
        Self { kappa: 3.0, rho: 0.0, x: 1.0, far_y: 1e4, horizon: 1.0, dt_base: 1e-3 }
    }
}

/// States (W, V^x, V^y) with W < V^x < V^y on a small grid.
fn drift_states() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &w in &[-1.0, 0.0, 0.7] {
        for &gx in &[1e-3, 0.1, 1.0] {
            for &gy in &[1e-3, 0.5, 10.0] {
                out.push((w, w + gx, w + gx + gy));
            }
        }
    }
    out
}

fn degenerations(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<DegenerationParams>()?;
    let n = ctx.ensemble(20)?;
    let states = drift_states();
    let mut data = Table::new(&["replica", "sup_diff"]);
    // ρ = −2: F ≡ 1 and both pole terms vanish
    let mut rho_minus2 = 0.0f64;
    for &kappa in &[2.0, 3.0, 16.0 / 3.0, 6.0] {
        let hp = HsleParams::new(kappa, -2.0, 1.0, 2.0, 1.0, 1e-3);
        for &s in &states {
            rho_minus2 = rho_minus2.max(drift_hsle(s, &hp)?.abs());
        }
    }
    // κ = 4: F ≡ 1, leaving SLE₄(ρ+2, −ρ−2)
    let mut kappa4 = 0.0f64;
    for &rho in &[-1.5, 0.0, 1.0, 3.0] {
        let hp = HsleParams::new(4.0, rho, 1.0, 2.0, 1.0, 1e-3);
        for &(w, vx, vy) in &states {
            let a = drift_hsle((w, vx, vy), &hp)?;
            let b = drift_sle_rho(w, &[(vx, rho + 2.0), (vy, -rho - 2.0)]);
            kappa4 = kappa4.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    // y → ∞: hSLE_κ(ρ) against SLE_κ(ρ+2) driven by the same noise
    let mut hp = HsleParams::new(p.kappa, p.rho, p.x, p.far_y, p.horizon, p.dt_base);
    hp.step = StepControl::new(p.dt_base, StepRule::Capped);
    let sp = SleParams {
        kappa: p.kappa,
        force: vec![ForcePoint::right(p.x, p.rho + 2.0)],
        horizon: p.horizon,
        step: StepControl::new(p.dt_base, StepRule::Capped),
    };
    let diffs = par_map(n, |k| {
        let seed = ctx.seed(0, k);
        let h = simulate_hsle(&hp, seed)?.path;
        let (s, _) = simulate_sle_rho(&sp, seed)?;
        // step k of both runs uses the k-th normal draw; the step sizes agree
        // up to the O(1/y) difference of the drifts
        Ok(h.w.iter().zip(&s.w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    })?;
    for (k, d) in diffs.iter().enumerate() {
        data.push(vec![k as f64, *d]);
    }
    let coupled = diffs.iter().fold(0.0f64, |m, d| m.max(*d));
    let checks = vec![
        Check::new("rho=-2-drift", rho_minus2, Rule::AtMost { bound: 0.0 }),
        Check::new("kappa=4-drift", kappa4, Rule::AtMost { bound: ctx.tol("kappa4")? }),
        Check::new("far-y-coupling", coupled, Rule::AtMost { bound: ctx.tol("coupling")? }),
    ];
    Ok(outcome(checks, data, pv, n))
}

// ---------------------------------------------------------------- criterion 7

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct ReversibilityParams {
    kappa: f64,
    rho: f64,
    x: f64,
    y: f64,
    horizon: f64,
    dt_base: f64,
    stride: usize,
}

impl Default for ReversibilityParams {
    fn default() -> Self {
        Self { kappa: 3.0, rho: 0.0, x: 1.0, y: 2.0, horizon: 20.0, dt_base: 3e-3, stride: 32 }
    }
}

/// Argument of the first point where the polyline leaves the disc of radius r.
pub fn first_exit_angle(c: &HalfPlaneCurve, r: f64) -> Option<f64> {
    c.points.windows(2).find_map(|s| {
        let (a, b) = (s[0], s[1]);
        if a.norm() < r && b.norm() >= r {
            // |a + u(b − a)| = r
            let d = b - a;
            let (qa, qb, qc) = (d.norm_sqr(), 2.0 * (a.conj() * d).re, a.norm_sqr() - r * r);
            let u = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
            Some((a + d * u.clamp(0.0, 1.0)).arg())
        } else {
            None
        }
    })
}

/// Trace at a coarse stride, then fill in every vertex on the coarse segments
/// that come near the circle |z| = r. Crossings of the circle are then exact
/// at the cost of roughly a `stride`-th of the full trace.
pub fn circle_resolved_trace(d: &DrivingPath, r: f64, stride: usize) -> Result<HalfPlaneCurve> {
    let coarse = forward_trace_strided(d, stride)?;
    let n = d.len() - 1;
    let index = |i: usize| if i == 0 { 0 } else { (i * stride.max(1)).min(n) };
    let mut points = vec![coarse.points[0]];
    for (i, s) in coarse.points.windows(2).enumerate() {
        let (a, b) = (s[0], s[1]);
        let band = 3.0 * (b - a).norm() + 1e-2;
        let near = |z: Complex64| (z.norm() - r).abs() < band;
        let (lo, hi) = (index(i), index(i + 1));
        if hi > lo + 1 && (near(a) || near(b) || (a.norm() < r) != (b.norm() < r)) {
            points.extend(trace_vertices(d, lo + 1..hi)?);
        }
        points.push(b);
    }
    HalfPlaneCurve::new(points)
}

fn reversibility(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<ReversibilityParams>()?;
    let n = ctx.ensemble(2000)?;
    let mut hp = HsleParams::new(p.kappa, p.rho, p.x, p.y, p.horizon, p.dt_base);
    // an adaptive rule refines only near x and resolves the two sides of the
    // curve differently, which shows up as a gap between the two exit laws
    hp.step = StepControl::new(p.dt_base, StepRule::Fixed);
    // ψ(z) = xy/z̄ fixes this circle pointwise
    let r = (p.x * p.y).sqrt();
    // a hull inside the disc of radius r has capacity at most r², so the
    // forward curve leaves it before 1.05 r²; the reversed one needs the
    // last exit of the forward curve, which comes well before capacity 20
    let mut prefix = hp;
    prefix.horizon = 1.05 * r * r;
    let angles = |set: u64, reverse: bool| {
        par_map(n, |k| {
            let run = simulate_hsle(if reverse { &hp } else { &prefix }, ctx.seed(set, k))?;
            let mut c = circle_resolved_trace(&run.path, r, p.stride)?;
            if reverse {
                c = mobius_reverse(&c, p.x, p.y)?;
            }
            first_exit_angle(&c, r).ok_or_else(|| Error::Numerical(format!("replica {k} never leaves the disc")))
        })
    };
    let fwd = angles(0, false)?;
    let rev = angles(1, true)?;
    let mut data = Table::new(&["replica", "forward_angle", "reversed_angle"]);
    for k in 0..n {
        data.push(vec![k as f64, fwd[k], rev[k]]);
    }
    let ks = stats::ks_two_sample(&fwd, &rev)?;
    let checks =
        vec![Check::new("exit-angle-ks", ks.statistic, Rule::PAbove { alpha: ctx.tol("alpha")? })
            .with_test(ks.statistic, ks.p_value)];
    Ok(outcome(checks, data, pv, n))
}

// ---------------------------------------------------------------- criterion 8

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct ExactnessParams {
    ising_sweeps: usize,
    fk_sweeps: usize,
}

impl Default for ExactnessParams {
    fn default() -> Self {
        Self { ising_sweeps: 4_000_000, fk_sweeps: 1_000_000 }
    }
}

fn lattice_exactness(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<ExactnessParams>()?;
    let beta = beta_critical();
    let pc = p_critical(2.0);
    // 3×3 free sites inside a frozen ring
    let q5 = LatticeQuad::rectangle(5, 5)?;
    let sbc = SpinBoundaryCondition::alternating(SpinLabel::Plus, SpinLabel::Minus);
    let q23 = LatticeQuad::rectangle(2, 3)?;
    let fbc = FkBoundaryCondition::new(vec![FkLabel::Free, FkLabel::Wired, FkLabel::Free, FkLabel::Wired]);
    let jobs: Vec<Result<f64>> = (0..2usize)
        .into_par_iter()
        .map(|job| {
            if job == 0 {
                let exact = enumerate_ising(&q5, &sbc, beta, DEFAULT_STATE_CAP)?;
                let mut s = IsingSampler::new(&q5, &sbc, beta, ctx.seed(0, 0))?;
                let mut counts = vec![0u64; exact.probs().len()];
                for _ in 0..p.ising_sweeps {
                    s.heat_bath_sweep();
                    counts[exact.index_of_spins(&s.config())] += 1;
                }
                Ok(exact.tv_distance(&counts))
            } else {
                let exact = enumerate_fk(&q23, &fbc, pc, 2.0, DEFAULT_STATE_CAP)?;
                let mut s = FkSampler::new(&q23, &fbc, pc, 2.0, ctx.seed(1, 0))?;
                let mut counts = vec![0u64; exact.probs().len()];
                for _ in 0..p.fk_sweeps {
                    s.heat_bath_sweep();
                    counts[exact.index_of_bonds(&s.config())] += 1;
                }
                Ok(exact.tv_distance(&counts))
            }
        })
        .collect();
    let tv_ising = jobs[0].as_ref().map_err(clone_err)?.to_owned();
    let tv_fk = jobs[1].as_ref().map_err(clone_err)?.to_owned();
    // Edwards–Sokal: spin marginal of the joint law against Ising with ⊕ on the wired arc
    let q22 = LatticeQuad::rectangle(2, 2)?;
    let es_bc = FkBoundaryCondition::new(vec![FkLabel::Wired, FkLabel::Free, FkLabel::Free, FkLabel::Free]);
    let is_bc = SpinBoundaryCondition::new(vec![SpinLabel::Plus, SpinLabel::Free, SpinLabel::Free, SpinLabel::Free]);
    let es = edwards_sokal_marginal(&q22, &es_bc, pc, DEFAULT_STATE_CAP)?;
    let tv_es = es.tv_to(&enumerate_ising(&q22, &is_bc, beta, DEFAULT_STATE_CAP)?);
    let mut data = Table::new(&["case", "tv"]);
    data.push(vec![0.0, tv_ising]);
    data.push(vec![1.0, tv_fk]);
    data.push(vec![2.0, tv_es]);
    let checks = vec![
        Check::new("glauber-3x3", tv_ising, Rule::AtMost { bound: ctx.tol("tv_mcmc")? }),
        Check::new("fk-2x3", tv_fk, Rule::AtMost { bound: ctx.tol("tv_mcmc")? }),
        Check::new("edwards-sokal-2x2", tv_es, Rule::AtMost { bound: ctx.tol("tv_exact")? }),
    ];
    Ok(outcome(checks, data, pv, 1))
}

fn clone_err(e: &Error) -> Error {
    Error::Numerical(e.to_string())
}

// ----------------------------------------------------------- criteria 9 and 10

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LatticeModel {
    Ising,
    Fk,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct LatticeSleParams {
    size: usize,
    times: Vec<f64>,
    chains: usize,
    burn_in: usize,
    thin: usize,
    /// Zipper vertices closer than this to ℝ are skipped.
    min_height: f64,
}

impl Default for LatticeSleParams {
    fn default() -> Self {
        Self { size: 128, times: vec![0.25, 0.5, 1.0], chains: 16, burn_in: 200, thin: 10, min_height: 1e-2 }
    }
}

/// Driving values W_t − W_0 at `times` for the interface of one lattice sample.
fn interface_driving(
    q: &LatticeQuad,
    model: LatticeModel,
    ising: Option<&IsingSampler>,
    fk: Option<(&FkSampler, &FkBoundaryCondition)>,
    times: &[f64],
    min_height: f64,
) -> Result<Vec<f64>> {
    let path = match model {
        LatticeModel::Ising => trace_spin_interface(q, &ising.expect("ising sampler").config(), 0, TurnRule::Left)?,
        LatticeModel::Fk => {
            let (s, bc) = fk.expect("fk sampler");
            trace_fk_exploration(q, &s.config(), bc)?
        }
    };
    let c = embed_interface(&path, q)?;
    let horizon = times.iter().fold(0.0f64, |m, &t| m.max(t)) * 1.05;
    let d = extract_driving_coarse(&c, horizon, min_height)?;
    times.iter().map(|&t| Ok(driving_at(&d, t)? - d.w[0])).collect()
}

fn lattice_sle(ctx: &Ctx, model: LatticeModel) -> Result<Outcome> {
    let (p, pv) = ctx.params::<LatticeSleParams>()?;
    let n = ctx.ensemble(2000)?;
    let target = match model {
        LatticeModel::Ising => 3.0,
        LatticeModel::Fk => 16.0 / 3.0,
    };
    let q = LatticeQuad::dobrushin(p.size, p.size)?;
    let chains = p.chains.clamp(1, n);
    let per_chain: Vec<usize> = (0..chains).map(|c| n / chains + usize::from(c < n % chains)).collect();
    let per: Vec<Vec<Vec<f64>>> = (0..chains)
        .into_par_iter()
        .map(|c| -> Result<Vec<Vec<f64>>> {
            let seed = ctx.seed(0, c);
            let mut out = Vec::with_capacity(per_chain[c]);
            match model {
                LatticeModel::Ising => {
                    let bc = SpinBoundaryCondition::dobrushin();
                    let mut s = IsingSampler::new(&q, &bc, beta_critical(), seed)?;
                    s.run_cluster(p.burn_in);
                    for _ in 0..per_chain[c] {
                        s.run_cluster(p.thin);
                        out.push(interface_driving(&q, model, Some(&s), None, &p.times, p.min_height)?);
                    }
                }
                LatticeModel::Fk => {
                    let bc = FkBoundaryCondition::dobrushin();
                    let mut s = FkSampler::new(&q, &bc, p_critical(2.0), 2.0, seed)?;
                    for _ in 0..p.burn_in {
                        s.cluster_sweep()?;
                    }
                    for _ in 0..per_chain[c] {
                        for _ in 0..p.thin {
                            s.cluster_sweep()?;
                        }
                        out.push(interface_driving(&q, model, None, Some((&s, &bc)), &p.times, p.min_height)?);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let paths: Vec<Vec<f64>> = per.into_iter().flatten().collect();
    let mut cols = vec!["sample"];
    let names: Vec<String> = p.times.iter().map(|t| format!("w_{t}")).collect();
    cols.extend(names.iter().map(String::as_str));
    let mut data = Table::new(&cols);
    for (k, row) in paths.iter().enumerate() {
        let mut r = vec![k as f64];
        r.extend(row);
        data.push(r);
    }
    let fit = stats::variance_slope(&paths, &p.times)?;
    let mut checks =
        vec![Check::new("kappa-hat", fit.slope, Rule::RelTol { target, tol: ctx.tol("rel_tol")? }).with_se(fit.std_error)];
    let alpha = ctx.tol("alpha")?;
    for i in 0..p.times.len() {
        let inc: Vec<f64> = paths.iter().map(|w| w[i] - if i == 0 { 0.0 } else { w[i - 1] }).collect();
        let ks = stats::ks_normal(&inc)?;
        checks.push(
            Check::new(format!("normality,t={}", p.times[i]), ks.statistic, Rule::PAbove { alpha })
                .with_test(ks.statistic, ks.p_value),
        );
    }
    Ok(outcome(checks, data, pv, n))
}

// --------------------------------------------------------------- criterion 11

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct ConditionedParams {
    kappa: f64,
    point: f64,
    horizon: f64,
    dt_base: f64,
}

impl Default for ConditionedParams {
    fn default() -> Self {
        Self { kappa: 16.0 / 3.0, point: 1.0, horizon: 1.0, dt_base: 1e-3 }
    }
}

fn conditioned_law(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<ConditionedParams>()?;
    let n = ctx.ensemble(10_000)?;
    let step = StepControl::new(p.dt_base, StepRule::Capped);
    let rho = p.kappa - 4.0;
    let f = |w: f64| if w < 0.0 { 1.0 } else { 0.0 };
    // M_t = (g_t(1) − W_t)^{(κ−4)/κ}, with M_0 = 1 at the point 1
    let m0 = p.point.powf(rho / p.kappa);
    let weighted = par_map(n, |k| {
        let d = simulate_sle_marked(p.kappa, &[("one", p.point)], p.horizon, step, ctx.seed(0, k))?;
        let m = conditioning_weight(&d, p.kappa)?;
        Ok((f(d.w[d.len() - 1]) * m[m.len() - 1] / m0, m[m.len() - 1] / m0))
    })?;
    let sp = SleParams { kappa: p.kappa, force: vec![ForcePoint::right(p.point, rho)], horizon: p.horizon, step };
    let direct = par_map(n, |k| {
        let (d, _) = simulate_sle_rho(&sp, ctx.seed(1, k))?;
        Ok(f(d.w[d.len() - 1]))
    })?;
    let mut data = Table::new(&["replica", "f_weighted", "weight", "f_direct"]);
    for k in 0..n {
        data.push(vec![k as f64, weighted[k].0, weighted[k].1, direct[k]]);
    }
    let fw: Vec<f64> = weighted.iter().map(|r| r.0).collect();
    let ws: Vec<f64> = weighted.iter().map(|r| r.1).collect();
    let (mw, sew) = stats::mean_se(&fw);
    let (md, sed) = stats::mean_se(&direct);
    let (mm, sem) = stats::mean_se(&ws);
    let k_se = ctx.tol("k_se")?;
    let checks = vec![
        Check::new("weighted-minus-direct", mw - md, Rule::WithinSe { target: 0.0, k: k_se })
            .with_se(sew.hypot(sed)),
        Check::new("mean-weight", mm, Rule::WithinSe { target: 1.0, k: k_se }).with_se(sem),
    ];
    Ok(outcome(checks, data, pv, n))
}

// --------------------------------------------------------------- criterion 12

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct PairChainParams {
    size: usize,
    steps: usize,
    burn_in: usize,
    thin: usize,
    direct_burn_in: usize,
    direct_thin: usize,
    epsilon: f64,
    sweeps: usize,
}

impl Default for PairChainParams {
    fn default() -> Self {
        Self { size: 32, steps: 600, burn_in: 100, thin: 5, direct_burn_in: 200, direct_thin: 10, epsilon: 0.05, sweeps: 5 }
    }
}

fn pair_chain(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<PairChainParams>()?;
    let q = LatticeQuad::rectangle(p.size, p.size)?;
    let bc = SpinBoundaryCondition::alternating(SpinLabel::Plus, SpinLabel::Plus);
    let params = ResampleParams { epsilon: p.epsilon, sweeps: p.sweeps, ..ResampleParams::default() };
    let chains: Vec<Vec<(f64, f64)>> = [Side::Left, Side::Right]
        .into_par_iter()
        .enumerate()
        .map(|(i, side)| -> Result<Vec<(f64, f64)>> {
            let init = PairState::extreme(&q, &bc, side)?;
            let out = run_chain(&init, p.steps, p.thin, &params, ctx.seed(i as u64, 0))?;
            Ok(out
                .snapshots
                .iter()
                .filter(|(k, _)| *k > p.burn_in)
                .map(|(_, s)| {
                    let sm = s.summary();
                    (sm.width, sm.d_left)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let kept = chains[0].len() + chains[1].len();
    let n = ctx.ensemble(kept)?;
    let direct: Vec<(f64, f64)> = sample_pairs_direct(&q, &bc, &params, n, p.direct_burn_in, p.direct_thin, ctx.seed(2, 0))?
        .iter()
        .map(|s| {
            let sm = s.summary();
            (sm.width, sm.d_left)
        })
        .collect();
    let mut data = Table::new(&["source", "index", "width", "d_left"]);
    for (src, rows) in [&chains[0], &chains[1], &direct].iter().enumerate() {
        for (k, r) in rows.iter().enumerate() {
            data.push(vec![src as f64, k as f64, r.0, r.1]);
        }
    }
    let pooled = |f: fn(&(f64, f64)) -> f64| -> Vec<f64> { chains.iter().flatten().map(f).collect() };
    let alpha = ctx.tol("alpha")?;
    let mut checks = Vec::new();
    for (name, f) in [("width", (|r: &(f64, f64)| r.0) as fn(&(f64, f64)) -> f64), ("d-left", |r| r.1)] {
        let direct_v: Vec<f64> = direct.iter().map(f).collect();
        let ks = stats::ks_two_sample(&pooled(f), &direct_v)?;
        checks.push(Check::new(format!("ks-{name}"), ks.statistic, Rule::PAbove { alpha }).with_test(ks.statistic, ks.p_value));
    }
    let widths: Vec<Vec<f64>> = chains.iter().map(|c| c.iter().map(|r| r.0).collect()).collect();
    let rhat = stats::gelman_rubin(&widths)?;
    checks.push(Check::new("gelman-rubin-width", rhat, Rule::AtMost { bound: ctx.tol("rhat")? }));
    Ok(outcome(checks, data, pv, kept))
}

// --------------------------------------------------------------- criterion 13

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct MonotonicityParams {
    size: usize,
    chains: usize,
    burn_in: usize,
    thin: usize,
    batches: usize,
}

impl Default for MonotonicityParams {
    fn default() -> Self {
        Self { size: 16, chains: 8, burn_in: 100, thin: 2, batches: 40 }
    }
}

fn bc_monotonicity(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<MonotonicityParams>()?;
    let n = ctx.ensemble(8000)?;
    let q = LatticeQuad::rectangle(p.size, p.size)?;
    let event = CrossingEvent::Spin { from: 1, to: 3, spin: 1 };
    let free = SpinBoundaryCondition::new(vec![SpinLabel::Free; 4]);
    let plus = SpinBoundaryCondition::new(vec![SpinLabel::Plus, SpinLabel::Free, SpinLabel::Free, SpinLabel::Free]);
    let chains = p.chains.clamp(1, n);
    let sample = |set: u64, bc: &SpinBoundaryCondition| -> Result<Vec<f64>> {
        let per: Vec<Vec<f64>> = par_map(chains, |c| {
            let mut s = IsingSampler::new(&q, bc, beta_critical(), ctx.seed(set, c))?;
            s.run_cluster(p.burn_in);
            let m = n / chains + usize::from(c < n % chains);
            (0..m)
                .map(|_| {
                    s.run_cluster(p.thin);
                    Ok(crossing_event(&q, Config::Spin(&s.config()), &event)? as u8 as f64)
                })
                .collect()
        })?;
        Ok(per.into_iter().flatten().collect())
    };
    let a = sample(0, &free)?;
    let b = sample(1, &plus)?;
    let mut data = Table::new(&["index", "cross_free", "cross_plus"]);
    for k in 0..n {
        data.push(vec![k as f64, a[k], b[k]]);
    }
    // batches are contiguous runs of the concatenated chains
    let (ma, sa) = stats::batch_mean_se(&a, p.batches);
    let (mb, sb) = stats::batch_mean_se(&b, p.batches);
    let checks = vec![
        Check::new("plus-minus-free", mb - ma, Rule::NotBelow { target: 0.0, k: ctx.tol("k_se")? }).with_se(sa.hypot(sb)),
    ];
    let mut out = outcome(checks, data, pv, n);
    out.notes.push(format!("P(crossing | free) = {ma:.4}, P(crossing | plus on arc 0) = {mb:.4}"));
    Ok(out)
}

// ------------------------------------------------------- harness self-checks

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct ZeroParams {
    horizon: f64,
    steps: usize,
}

impl Default for ZeroParams {
    fn default() -> Self {
        Self { horizon: 1.0, steps: 1000 }
    }
}

fn zero_capacity(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<ZeroParams>()?;
    let n = ctx.ensemble(1)?;
    let d = DrivingPath::from_fn(p.horizon, p.steps, |_| 0.0)?;
    let back = extract_driving(&forward_trace(&d)?)?;
    let cap = back.grid.horizon();
    let mut data = Table::new(&["horizon", "capacity"]);
    for _ in 0..n {
        data.push(vec![p.horizon, cap]);
    }
    let checks = vec![Check::new("capacity", cap, Rule::AbsTol { target: p.horizon, tol: ctx.tol("abs_tol")? })];
    Ok(outcome(checks, data, pv, n))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct VarianceParams {
    kappa: f64,
    times: Vec<f64>,
    dt: f64,
}

impl Default for VarianceParams {
    fn default() -> Self {
        Self { kappa: 3.0, times: vec![0.25, 0.5, 0.75, 1.0], dt: 1e-3 }
    }
}

fn sle_variance(ctx: &Ctx) -> Result<Outcome> {
    let (p, pv) = ctx.params::<VarianceParams>()?;
    let n = ctx.ensemble(1000)?;
    let horizon = p.times.iter().fold(0.0f64, |m, &t| m.max(t));
    let paths = par_map(n, |k| {
        let d = simulate_sle(p.kappa, horizon, p.dt, ctx.seed(0, k))?;
        p.times.iter().map(|&t| driving_at(&d, t)).collect::<Result<Vec<f64>>>()
    })?;
    let mut cols = vec!["replica".to_string()];
    cols.extend(p.times.iter().map(|t| format!("w_{t}")));
    let mut data = Table { columns: cols, rows: Vec::new() };
    for (k, w) in paths.iter().enumerate() {
        let mut r = vec![k as f64];
        r.extend(w);
        data.push(r);
    }
    let fit = stats::variance_slope(&paths, &p.times)?;
    let checks = vec![Check::new("kappa-hat", fit.slope, Rule::RelTol { target: p.kappa, tol: ctx.tol("rel_tol")? })
        .with_se(fit.std_error)];
    Ok(outcome(checks, data, pv, n))
}
