//! Gauss hypergeometric function on [0, 1].
//!
//! The plain power series is used away from 1. Closer to the singular point
//! the function is carried along by Taylor steps of Euler's ODE, each step
//! covering half of the remaining distance to 1.

use crate::error::{Error, Result};
use crate::specialfn::gamma::rgamma;
use crate::specialfn::gamma::gamma;

/// Relative size under which a series term counts as negligible.
pub const SERIES_TOL: f64 = 1e-16;
/// Consecutive negligible terms needed to stop.
pub const SERIES_QUIET_RUN: usize = 3;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 10_000;

/// Parameters of ₂F₁(a, b; c; z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeomParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Largest argument the caller intends to evaluate at.
    pub z_max: f64,
}

impl HypergeomParams {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, z_max: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.c.is_finite()) {
            return Err(Error::Domain("non-finite hypergeometric parameter".into()));
        }
        if self.c <= 0.0 && self.c == self.c.floor() {
            return Err(Error::Domain(format!("c = {} is a non-positive integer", self.c)));
        }
        if !(self.z_max > 0.0 && self.z_max <= 1.0) {
            return Err(Error::Domain(format!("z_max = {} outside (0, 1]", self.z_max)));
        }
        Ok(())
    }

    fn shifted(&self, k: f64) -> Self {
        Self { a: self.a + k, b: self.b + k, c: self.c + k, z_max: self.z_max }
    }
}

/// Running partial sum with the three-quiet-terms stopping rule.
struct Quiet {
    sum: f64,
    run: usize,
    floor: f64,
}

impl Quiet {
    fn new(first: f64) -> Self {
        Self { sum: first, run: 0, floor: 1.0 }
    }

    /// For sums carrying a known scale factor, so "max(1, |sum|)" is measured
    /// in unscaled units.
    fn scaled(first: f64, floor: f64) -> Self {
        Self { sum: first, run: 0, floor }
    }

    fn push(&mut self, term: f64) -> bool {
        self.sum += term;
        if term.abs() < SERIES_TOL * self.sum.abs().max(self.floor) {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= SERIES_QUIET_RUN
    }
}

/// Values of ₂F₁ and its first two derivatives from the power series.
fn series_with_derivs(p: &HypergeomParams, z: f64) -> Result<[f64; 3]> {
    let (a, b, c) = (p.a, p.b, p.c);
    // coefficient of z^n in the series
    let mut coef = 1.0;
    let mut f = Quiet::new(1.0);
    let mut d1 = Quiet::new(0.0);
    let mut d2 = Quiet::new(0.0);
    // z^(n-2), z^(n-1), z^n for the current n
    let mut zpow = [0.0, 0.0, 1.0];
    for n in 1..SERIES_MAX_TERMS {
        let m = (n - 1) as f64;
        coef *= (a + m) * (b + m) / ((c + m) * (m + 1.0));
        zpow = [zpow[1], zpow[2], zpow[2] * z];
        let nf = n as f64;
        let done0 = f.push(coef * zpow[2]);
        let done1 = d1.push(nf * coef * zpow[1]);
        let done2 = d2.push(if n >= 2 { nf * (nf - 1.0) * coef * zpow[0] } else { 0.0 });
        if done0 && done1 && done2 {
            return Ok([f.sum, d1.sum, d2.sum]);
        }
    }
    Err(Error::NonConvergent { z, terms: SERIES_MAX_TERMS })
}

/// ₂F₁(a, b; c; z) by direct summation of the power series.
///
/// Fails with `NonConvergent` when the truncation rule is not met within
/// `SERIES_MAX_TERMS` terms, which happens close to z = 1.
pub fn gauss_2f1(p: &HypergeomParams, z: f64) -> Result<f64> {
    p.validate()?;
    if !(z > -1.0 && z < 1.0) {
        return Err(Error::Domain(format!("series argument z = {z} outside (-1, 1)")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let (a, b, c) = (p.a, p.b, p.c);
    let mut coef = 1.0;
    let mut sum = Quiet::new(1.0);
    for n in 0..SERIES_MAX_TERMS {
        let m = n as f64;
        coef *= (a + m) * (b + m) / ((c + m) * (m + 1.0)) * z;
        if sum.push(coef) {
            return Ok(sum.sum);
        }
    }
    Err(Error::NonConvergent { z, terms: SERIES_MAX_TERMS })
}

/// Gauss's summation: Γ(c)Γ(c−a−b) / (Γ(c−a)Γ(c−b)).
pub fn gauss_2f1_at_one(p: &HypergeomParams) -> Result<f64> {
    p.validate()?;
    let s = p.c - p.a - p.b;
    if s <= 0.0 {
        return Err(Error::Domain(format!("c - a - b = {s} must be positive at z = 1")));
    }
    if p.a == 0.0 || p.b == 0.0 {
        return Ok(1.0);
    }
    Ok(gamma(p.c) * gamma(s) * rgamma(p.c - p.a) * rgamma(p.c - p.b))
}

/// Where the Taylor continuation hands over from the power series.
const CONTINUATION_START: f64 = 0.5;
/// Taylor steps never cover more than this fraction of the gap to 1.
const CONTINUATION_REACH: f64 = 0.5;
const TAYLOR_MAX_TERMS: usize = 2_000;

/// ₂F₁, F′ and F″ at any z in [0, 1).
///
/// Uses the power series up to 0.5 and Taylor continuation of the ODE
/// z(1−z)y″ + (c − (a+b+1)z)y′ − ab·y = 0 beyond that.
pub fn gauss_2f1_derivs(p: &HypergeomParams, z: f64) -> Result<[f64; 3]> {
    p.validate()?;
    if !(z > -1.0 && z < 1.0) {
        return Err(Error::Domain(format!("argument z = {z} outside (-1, 1)")));
    }
    if z <= CONTINUATION_START {
        return series_with_derivs(p, z);
    }
    let [mut y0, mut y1, _] = series_with_derivs(p, CONTINUATION_START)?;
    let mut z0 = CONTINUATION_START;
    loop {
        let h = (z - z0).min(CONTINUATION_REACH * (1.0 - z0));
        let vals = taylor_step(p, z0, y0, y1, h)?;
        z0 += h;
        if z0 >= z {
            return Ok(vals);
        }
        y0 = vals[0];
        y1 = vals[1];
    }
}

/// ₂F₁ at any z in [0, 1); continues analytically when the series would fail.
pub fn gauss_2f1_continued(p: &HypergeomParams, z: f64) -> Result<f64> {
    if z <= 0.9 {
        if let Ok(v) = gauss_2f1(p, z) {
            return Ok(v);
        }
    }
    Ok(gauss_2f1_derivs(p, z)?[0])
}

/// One Taylor step of the hypergeometric ODE from z0 by h, returning y, y′, y″.
fn taylor_step(p: &HypergeomParams, z0: f64, y0: f64, y1: f64, h: f64) -> Result<[f64; 3]> {
    let (a, b, c) = (p.a, p.b, p.c);
    let p0 = z0 * (1.0 - z0);
    let p1 = 1.0 - 2.0 * z0;
    let p2 = -1.0;
    let q0 = c - (a + b + 1.0) * z0;
    let q1 = -(a + b + 1.0);
    let ab = a * b;
    // scaled Taylor coefficients u_n = y^(n)(z0) h^n / n!; unscaled ones overflow near 1
    let (mut prev, mut cur) = (y0, y1 * h);
    let mut f = Quiet::new(prev + cur);
    let mut d1 = Quiet::scaled(cur, h);
    let mut d2 = Quiet::scaled(0.0, h * h);
    for n in 0..TAYLOR_MAX_TERMS {
        let nf = n as f64;
        let next = -((p1 * nf * (nf + 1.0) + q0 * (nf + 1.0)) * h * cur
            + (p2 * nf * (nf - 1.0) + q1 * nf - ab) * h * h * prev)
            / (p0 * (nf + 1.0) * (nf + 2.0));
        let k = nf + 2.0;
        let done0 = f.push(next);
        let done1 = d1.push(k * next);
        let done2 = d2.push(k * (k - 1.0) * next);
        prev = cur;
        cur = next;
        if done0 && done1 && done2 {
            return Ok([f.sum, d1.sum / h, d2.sum / (h * h)]);
        }
    }
    Err(Error::NonConvergent { z: z0 + h, terms: TAYLOR_MAX_TERMS })
}

/// Partial sum of the series at z = 1 with an integral estimate of the tail.
///
/// Requires c > a + b. The coefficients decay like n^(a+b−c−1), so after
/// `terms` terms the remainder is approximately t_N·(N/(c−a−b) − ½).
pub fn gauss_2f1_series_limit(p: &HypergeomParams, terms: usize) -> Result<f64> {
    p.validate()?;
    let s = p.c - p.a - p.b;
    if s <= 0.0 {
        return Err(Error::Domain(format!("c - a - b = {s} must be positive at z = 1")));
    }
    let mut coef = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    for n in 0..terms {
        let m = n as f64;
        coef *= (p.a + m) * (p.b + m) / ((p.c + m) * (m + 1.0));
        // Kahan summation; a million terms lose digits otherwise
        let y = coef - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let n = terms as f64;
    Ok(sum + coef * (n / s - 0.5))
}

/// First derivative of ₂F₁ via the contiguous relation F′ = (ab/c)·₂F₁(a+1, b+1; c+1).
pub fn gauss_2f1_prime_at_one(p: &HypergeomParams) -> Result<f64> {
    let ab = p.a * p.b;
    if ab == 0.0 {
        return Ok(0.0);
    }
    let s = p.c - p.a - p.b;
    if s > 1.0 {
        Ok(ab / p.c * gauss_2f1_at_one(&p.shifted(1.0))?)
    } else {
        // F′ grows like (1 − z)^(s − 1)
        Ok(f64::INFINITY * ab.signum())
    }
}
