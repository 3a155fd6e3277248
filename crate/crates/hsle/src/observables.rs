//! Martingale observables of SLE: the hSLE martingale, the SLE_κ(ρ, ν)
//! martingale, Poisson-kernel functionals, the Schwarzian derivative and the
//! weight that turns SLE_κ into SLE_κ(κ−4).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loewner::{conformal_transport, reflected_step, DrivingPath, HalfPlaneCurve, HullMapState, Side, Track};
use crate::specialfn::HsleFunction;

/// Default guard n for the stopping time T^n = inf{t : J_t ≤ 1/n or Z_t ≤ 1/n}.
pub const DEFAULT_GUARD: f64 = 100.0;

/// M_t = Z_t^a J_t^b F(Z_t) with a = (ρ+2)/κ and b = (ρ+2)(ρ+6−κ)/(4κ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsleMartingaleSpec {
    pub kappa: f64,
    pub rho: f64,
    pub x: f64,
    pub y: f64,
}

impl HsleMartingaleSpec {
    pub fn new(kappa: f64, rho: f64, x: f64, y: f64) -> Result<Self> {
        HsleFunction::new(kappa, rho)?;
        if !(x > 0.0 && y > x) {
            return Err(Error::Domain(format!("need 0 < x < y, got ({x}, {y})")));
        }
        Ok(Self { kappa, rho, x, y })
    }

    pub fn a(&self) -> f64 {
        (self.rho + 2.0) / self.kappa
    }

    pub fn b(&self) -> f64 {
        (self.rho + 2.0) * (self.rho + 6.0 - self.kappa) / (4.0 * self.kappa)
    }

    pub fn function(&self) -> HsleFunction {
        HsleFunction { kappa: self.kappa, rho: self.rho }
    }

    /// Z^a J^b F(Z).
    pub fn value(&self, z: f64, j: f64) -> Result<f64> {
        let (a, b) = (self.a(), self.b());
        let za = if a == 0.0 { 1.0 } else { z.powf(a) };
        let jb = if b == 0.0 { 1.0 } else { j.powf(b) };
        Ok(za * jb * self.function().value(z)?)
    }

    /// M₀ = (x/y)^a (y−x)^{−2b} F(x/y).
    pub fn m0(&self) -> Result<f64> {
        self.value(self.x / self.y, (self.y - self.x).powi(-2))
    }

    /// M₀/F(1), the expected value of J_∞^b under SLE_κ when M is uniformly integrable.
    pub fn poisson_mean(&self) -> Result<f64> {
        Ok(self.m0()? / self.function().at_one()?)
    }
}

/// Exponents of the restriction martingale for SLE_κ(ρ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestrictionExponents {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c: f64,
    pub b: f64,
}

impl RestrictionExponents {
    pub fn new(kappa: f64, rho: f64) -> Self {
        let b1 = (6.0 - kappa) / (2.0 * kappa);
        let b2 = rho * (rho + 4.0 - kappa) / (4.0 * kappa);
        let b3 = rho / kappa;
        let c = (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa);
        Self { b1, b2, b3, c, b: b1 + b2 + b3 }
    }
}

/// Image g_t(v) and derivative g_t′(v) of one real point along a driving path.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPath {
    pub image: Vec<f64>,
    pub derivative: Vec<f64>,
    /// First grid index at which the point touched W.
    pub swallowed: Option<usize>,
}

/// Replays the slit steps of `d` on the point `v`.
pub fn transport_path(d: &DrivingPath, v: f64) -> TransportPath {
    let right = v >= d.w[0];
    let mut image = Vec::with_capacity(d.len());
    let mut derivative = Vec::with_capacity(d.len());
    let (mut x, mut g) = (v, 1.0);
    image.push(x);
    derivative.push(g);
    let mut swallowed = None;
    for k in 1..d.len() {
        let s = d.step(k);
        let (img, dv, hit) = reflected_step(x, s.w, s.dt, right);
        if hit {
            swallowed.get_or_insert(k);
        }
        x = img;
        g *= dv;
        image.push(x);
        derivative.push(g);
    }
    TransportPath { image, derivative, swallowed }
}

fn point_track<'a>(d: &'a DrivingPath, name: &str) -> Result<&'a Track> {
    d.track(name).ok_or_else(|| Error::Domain(format!("driving path has no track {name:?}")))
}

/// (Z_t, J_t) per grid point, for tracks "x" and "y"; `None` from the first
/// contact of x on.
pub fn zj_path(d: &DrivingPath) -> Result<Vec<Option<(f64, f64)>>> {
    let tx = point_track(d, "x")?;
    let ty = point_track(d, "y")?;
    if tx.side != Side::Right || ty.side != Side::Right {
        return Err(Error::Domain("x and y must lie to the right of the base".into()));
    }
    // g(y) − g(x) and g′ are carried multiplicatively (log scale for g′):
    // once the hull closes in on ℝ beyond y the plain difference of images
    // cancels to 0 long before J does.
    let (mut x, mut y) = (tx.values[0], ty.values[0]);
    let (mut gap, mut log_dx, mut log_dy) = (y - x, 0.0f64, 0.0f64);
    let mut out = Vec::with_capacity(d.len());
    out.push(Some((x / y, gap.powi(-2))));
    for k in 1..d.len() {
        let s = d.step(k);
        let (ix, dx, hit) = reflected_step(x, s.w, s.dt, true);
        if hit {
            out.resize(d.len(), None);
            break;
        }
        let (iy, dy, _) = reflected_step(y, s.w, s.dt, true);
        gap *= (x + y - 2.0 * s.w) / ((ix - s.w) + (iy - s.w));
        log_dx += dx.ln();
        log_dy += dy.ln();
        (x, y) = (ix, iy);
        let z = (x - s.w) / (y - s.w);
        let j = (log_dx + log_dy - 2.0 * gap.ln()).exp();
        out.push(Some((z, j)));
    }
    Ok(out)
}

/// M_t of the hSLE martingale per grid point; 0 from the swallowing of x on.
pub fn mart_hsle_path(d: &DrivingPath, spec: &HsleMartingaleSpec) -> Result<Vec<f64>> {
    zj_path(d)?
        .into_iter()
        .map(|zj| match zj {
            Some((z, j)) => spec.value(z.clamp(0.0, 1.0), j),
            None => Ok(0.0),
        })
        .collect()
}

/// Grid index of T^n ∧ end: the first k with J_k ≤ 1/n or Z_k ≤ 1/n, or the
/// first contact of x.
pub fn guard_index(zj: &[Option<(f64, f64)>], n: f64) -> usize {
    zj.iter()
        .position(|v| match v {
            Some((z, j)) => *z <= 1.0 / n || *j <= 1.0 / n,
            None => true,
        })
        .unwrap_or(zj.len() - 1)
}

/// The five-factor SLE_κ(ρ, ν) martingale per grid point for tracks "x", "y";
/// 0 from the swallowing of x on.
pub fn mart_sle_rho_path(d: &DrivingPath, kappa: f64, rho: f64, nu: f64) -> Result<Vec<f64>> {
    let tx = point_track(d, "x")?;
    let ty = point_track(d, "y")?;
    let px = transport_path(d, tx.values[0]);
    let py = transport_path(d, ty.values[0]);
    let cut = px.swallowed.unwrap_or(d.len());
    let ex = rho * (rho + 4.0 - kappa) / (4.0 * kappa);
    let ey = nu * (nu + 4.0 - kappa) / (4.0 * kappa);
    let pow = |base: f64, e: f64| if e == 0.0 { 1.0 } else { base.powf(e) };
    Ok((0..d.len())
        .map(|k| {
            if k >= cut {
                return 0.0;
            }
            let w = d.w[k];
            pow(px.derivative[k], ex)
                * pow(px.image[k] - w, rho / kappa)
                * pow(py.derivative[k], ey)
                * pow(py.image[k] - w, nu / kappa)
                * pow(py.image[k] - px.image[k], rho * nu / (2.0 * kappa))
        })
        .collect())
}

/// J = g′(x)g′(y)/(g(x)−g(y))² for the map that zips the whole curve.
pub fn poisson_kernel(c: &HalfPlaneCurve, x: f64, y: f64) -> Result<f64> {
    let out = conformal_transport(c, &[x, y])?;
    for (p, r) in [x, y].iter().zip(&out) {
        if let Some(step) = r.swallowed {
            return Err(Error::Swallowed { what: format!("point {p}"), step });
        }
    }
    Ok(out[0].derivative * out[1].derivative / (out[0].image - out[1].image).powi(2))
}

/// J_∞^b from the full zipper of a curve.
pub fn poisson_kernel_weight(c: &HalfPlaneCurve, x: f64, y: f64, b: f64) -> Result<f64> {
    Ok(poisson_kernel(c, x, y)?.powf(b))
}

/// Schwarzian f‴/f′ − 3/2 (f″/f′)² from derivative values.
pub fn schwarzian(d1: f64, d2: f64, d3: f64) -> Result<f64> {
    if d1 == 0.0 || !d1.is_finite() {
        return Err(Error::Domain("Schwarzian undefined where f' = 0".into()));
    }
    let r = d2 / d1;
    Ok(d3 / d1 - 1.5 * r * r)
}

/// Schwarzian of a map given as x ↦ (f, f′, f″, f‴).
pub fn schwarzian_of<F: Fn(f64) -> [f64; 4]>(f: F, x: f64) -> Result<f64> {
    let [_, d1, d2, d3] = f(x);
    schwarzian(d1, d2, d3)
}

/// Schwarzian of a composition of slit maps at a real point outside the hull.
pub fn hull_schwarzian(h: &HullMapState, x: f64) -> Result<f64> {
    let [_, d1, d2, d3] = h.map_derivs(num_complex::Complex64::new(x, 0.0));
    schwarzian(d1.re, d2.re, d3.re)
}

/// (g_t(1) − W_t)^{(κ−4)/κ} per grid point for the track "one" (started at 1);
/// 0 from the first contact on.
pub fn conditioning_weight(d: &DrivingPath, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa > 4.0 && kappa < 8.0) {
        return Err(Error::Domain(format!("conditioning weight needs kappa in (4, 8), got {kappa}")));
    }
    let t = point_track(d, "one")?;
    let p = transport_path(d, t.values[0]);
    let e = (kappa - 4.0) / kappa;
    let cut = p.swallowed.unwrap_or(d.len());
    Ok((0..d.len()).map(|k| if k >= cut { 0.0 } else { (p.image[k] - d.w[k]).powf(e) }).collect())
}

/// One line of an ensemble summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub seed: u64,
    pub m0: f64,
    pub m_stop: f64,
    pub j_horizon: f64,
    pub flags: String,
}

/// Columns: seed, m0, m_stop, j_horizon, flags.
pub fn write_ensemble_csv<W: Write>(rows: &[EnsembleRow], out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::{evolve_points, forward_trace, SlitStep};
    use num_complex::Complex64;

    #[test]
    fn exponents_agree() {
        for k in [2.0, 3.0, 4.0, 16.0 / 3.0, 6.0] {
            for r in [-1.5, 0.0, 1.0] {
                let re = RestrictionExponents::new(k, r);
                let hs = HsleMartingaleSpec::new(k, r, 1.0, 2.0).unwrap();
                assert!((re.b - hs.b()).abs() < 1e-15, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn initial_values() {
        let s = HsleMartingaleSpec::new(3.0, 0.0, 1.0, 2.0).unwrap();
        let want = 0.5f64.powf(2.0 / 3.0) * 0.905_431_608_904_961_2;
        assert!((s.m0().unwrap() - want).abs() < 1e-14);
        let s = HsleMartingaleSpec::new(3.0, -2.0, 1.0, 3.0).unwrap();
        assert_eq!(s.m0().unwrap(), 1.0);
    }

    #[test]
    fn degenerate_martingales_are_constant() {
        let d = DrivingPath::from_fn(1.0, 200, |t| (4.0 * t).sin()).unwrap();
        let d = evolve_points(&d, &[("x".into(), 1.0), ("y".into(), 2.0)]).unwrap();
        let spec = HsleMartingaleSpec::new(3.0, -2.0, 1.0, 2.0).unwrap();
        assert!(mart_hsle_path(&d, &spec).unwrap().iter().all(|&m| m == 1.0));
        assert!(mart_sle_rho_path(&d, 3.0, 0.0, 0.0).unwrap().iter().all(|&m| m == 1.0));
        let m = mart_sle_rho_path(&d, 4.0, 2.0, -2.0).unwrap();
        let want = 1f64.powf(0.5) * 2f64.powf(-0.5) * 1f64.powf(-0.5);
        assert!((m[0] - want).abs() < 1e-15);
    }

    #[test]
    fn j_decreases_along_a_zipper() {
        let d = DrivingPath::from_fn(2.0, 500, |t| 0.8 * (6.0 * t).sin() - 0.3 * t).unwrap();
        let d = evolve_points(&d, &[("x".into(), 1.0), ("y".into(), 2.0)]).unwrap();
        let zj = zj_path(&d).unwrap();
        for pair in zj.windows(2) {
            assert!(pair[1].unwrap().1 <= pair[0].unwrap().1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn poisson_kernel_of_slit() {
        let empty = HalfPlaneCurve::new(vec![Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(poisson_kernel_weight(&empty, 1.0, 2.0, 1.0).unwrap(), 1.0);
        let c = forward_trace(&DrivingPath::from_fn(0.25, 100, |_| 0.0).unwrap()).unwrap();
        // g(u) = √(u² + 1), g′(u) = u/√(u² + 1)
        let g = |u: f64| (u * u + 1.0).sqrt();
        let want = (1.0 / g(1.0)) * (2.0 / g(2.0)) / (g(2.0) - g(1.0)).powi(2);
        assert!((poisson_kernel(&c, 1.0, 2.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn schwarzian_examples() {
        assert_eq!(schwarzian_of(|x| [x, 1.0, 0.0, 0.0], 0.3).unwrap(), 0.0);
        // Möbius (2x+1)/(x+3): derivatives 5/(x+3)², −10/(x+3)³, 30/(x+3)⁴
        let mob = |x: f64| {
            let u = x + 3.0;
            [(2.0 * x + 1.0) / u, 5.0 / (u * u), -10.0 / u.powi(3), 30.0 / u.powi(4)]
        };
        assert!(schwarzian_of(mob, 0.7).unwrap().abs() < 1e-15);
        assert!(schwarzian(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn slit_schwarzian_against_finite_differences() {
        let s = SlitStep::new(0.2, 0.3);
        let h = HullMapState::from_steps(vec![s]);
        let x = 1.7;
        let f = |u: f64| s.map_real(u).0;
        let e = 1e-2;
        // 7-point stencils, O(e⁶)
        let d1 = (-f(x - 3.0 * e) + 9.0 * f(x - 2.0 * e) - 45.0 * f(x - e) + 45.0 * f(x + e) - 9.0 * f(x + 2.0 * e)
            + f(x + 3.0 * e))
            / (60.0 * e);
        let d2 = (2.0 * f(x - 3.0 * e) - 27.0 * f(x - 2.0 * e) + 270.0 * f(x - e) - 490.0 * f(x) + 270.0 * f(x + e)
            - 27.0 * f(x + 2.0 * e)
            + 2.0 * f(x + 3.0 * e))
            / (180.0 * e * e);
        let d3 = (f(x - 3.0 * e) - 8.0 * f(x - 2.0 * e) + 13.0 * f(x - e) - 13.0 * f(x + e) + 8.0 * f(x + 2.0 * e)
            - f(x + 3.0 * e))
            / (8.0 * e * e * e);
        let fd = schwarzian(d1, d2, d3).unwrap();
        let an = hull_schwarzian(&h, x).unwrap();
        assert!(((fd - an) / an).abs() < 1e-6, "{fd} vs {an}");
    }

    #[test]
    fn conditioning_weight_starts_at_one() {
        let d = DrivingPath::from_fn(1.0, 100, |t| t).unwrap();
        let d = evolve_points(&d, &[("one".into(), 1.0)]).unwrap();
        let w = conditioning_weight(&d, 16.0 / 3.0).unwrap();
        assert_eq!(w[0], 1.0);
        assert!(conditioning_weight(&d, 3.0).is_err());
    }
}
