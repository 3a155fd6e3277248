//! Conformal map from a rectangle onto the upper half-plane via Jacobi sn.
//!
//! The rectangle [0,1]×[0,aspect] is rescaled to [−K,K]×[0,K′] with
//! K′/K = 2·aspect, then sent through sn(·, k). The bottom edge lands on
//! [−1, 1], the bottom midpoint on 0 and the top midpoint on ∞.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;
const EDGE_TOL: f64 = 1e-12;

/// Elliptic modulus data of a rectangle with the given aspect ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleModulus {
    pub aspect: f64,
    /// modulus k
    pub k: f64,
    /// complementary modulus k′ = √(1−k²)
    pub kp: f64,
    /// complete elliptic integral K(k)
    pub big_k: f64,
    /// K(k′)
    pub big_kp: f64,
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, argument given as (k, k′).
fn complete_k(kp: f64) -> f64 {
    PI / (2.0 * agm(1.0, kp))
}

/// (θ₂², θ₃², θ₄²) for nome q < 1.
fn theta_squares(q: f64) -> (f64, f64, f64) {
    let mut t2 = 0.0;
    let mut t3 = 1.0;
    let mut t4 = 1.0;
    for n in 0..200 {
        let nf = n as f64;
        let half = q.powf((nf + 0.5) * (nf + 0.5));
        t2 += 2.0 * half;
        if n >= 1 {
            let full = q.powf(nf * nf);
            t3 += 2.0 * full;
            t4 += if n % 2 == 0 { 2.0 * full } else { -2.0 * full };
            if full < 1e-18 && half < 1e-18 {
                break;
            }
        }
    }
    (t2 * t2, t3 * t3, t4 * t4)
}

impl RectangleModulus {
    pub fn new(aspect: f64) -> Result<Self> {
        if !(aspect.is_finite() && aspect > 0.0) {
            return Err(Error::Domain(format!("aspect {aspect} must be positive")));
        }
        // K′/K = 2·aspect; pick whichever nome is smaller
        let ratio = 2.0 * aspect;
        let (k, kp) = if ratio >= 1.0 {
            let (t2, t3, t4) = theta_squares((-PI * ratio).exp());
            (t2 / t3, t4 / t3)
        } else {
            let (t2, t3, t4) = theta_squares((-PI / ratio).exp());
            (t4 / t3, t2 / t3)
        };
        Ok(Self { aspect, k, kp, big_k: complete_k(kp), big_kp: complete_k(k) })
    }

    /// Images of the corners 0, 1, 1+i·aspect, i·aspect (counterclockwise).
    pub fn corner_images(&self) -> [f64; 4] {
        [-1.0, 1.0, 1.0 / self.k, -1.0 / self.k]
    }
}

/// Real Jacobi (sn, cn, dn) with parameter m = k² by the descending AGM.
pub fn sncndn(u: f64, m: f64) -> (f64, f64, f64) {
    if m <= 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if m >= 1.0 {
        let s = 1.0 / u.cosh();
        return (u.tanh(), s, s);
    }
    let mut a = [0.0; AGM_MAX_ITER + 1];
    let mut c = [0.0; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < AGM_MAX_ITER && c[n].abs() > AGM_TOL {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    (sn, cn, dn)
}

/// sn(x + iy, k) by the addition formula with the complementary parameter.
fn sn_complex(x: f64, y: f64, m: f64) -> Complex64 {
    let (s, c, d) = sncndn(x, m);
    let (s1, c1, d1) = sncndn(y, 1.0 - m);
    let den = c1 * c1 + m * s * s * s1 * s1;
    Complex64::new(s * d1 / den, c * d * s1 * c1 / den)
}

/// Maps a point of the rectangle [0,1]×[0,aspect] into the closed upper half-plane.
///
/// The top midpoint is sent to infinity and is returned with non-finite parts.
pub fn rect_to_halfplane(aspect: f64, z: Complex64) -> Result<Complex64> {
    let modulus = RectangleModulus::new(aspect)?;
    rect_to_halfplane_with(&modulus, z)
}

/// Same as [`rect_to_halfplane`] with the modulus computed once by the caller.
pub fn rect_to_halfplane_with(md: &RectangleModulus, z: Complex64) -> Result<Complex64> {
    let tol = EDGE_TOL * md.aspect.max(1.0);
    if !(z.re >= -tol && z.re <= 1.0 + tol && z.im >= -tol && z.im <= md.aspect + tol) {
        return Err(Error::Domain(format!("point {z} outside the rectangle")));
    }
    let x = 2.0 * md.big_k * (z.re.clamp(0.0, 1.0) - 0.5);
    let y = md.big_kp * (z.im.clamp(0.0, md.aspect) / md.aspect);
    let m = md.k * md.k;
    let w = if y <= 0.5 * md.big_kp {
        sn_complex(x, y, m)
    } else {
        // sn(u) = 1/(k·sn(u − iK′)) keeps the argument away from the pole
        let v = sn_complex(x, y - md.big_kp, m);
        if v.norm() == 0.0 {
            return Ok(Complex64::new(f64::INFINITY, f64::INFINITY));
        }
        (v * md.k).inv()
    };
    // sides of the rectangle land on ℝ up to rounding
    Ok(Complex64::new(w.re, w.im.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agm_sn_matches_closed_forms() {
        let (s, c, d) = sncndn(0.7, 0.0);
        assert!((s - 0.7f64.sin()).abs() < 1e-15 && (c - 0.7f64.cos()).abs() < 1e-15);
        assert_eq!(d, 1.0);
        // sn(K) = 1
        let m = 0.3;
        let kk = complete_k((1.0f64 - m).sqrt());
        let (s, c, _) = sncndn(kk, m);
        assert!((s - 1.0).abs() < 1e-14 && c.abs() < 1e-7);
        // sn² + cn² = 1, dn² + m sn² = 1
        let (s, c, d) = sncndn(0.37, 0.81);
        assert!((s * s + c * c - 1.0).abs() < 1e-15);
        assert!((d * d + 0.81 * s * s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modulus_of_square() {
        // K′/K = 2 has a classical closed form k = (√2 − 1)²
        let md = RectangleModulus::new(1.0).unwrap();
        let expect = (2f64.sqrt() - 1.0).powi(2);
        assert!((md.k - expect).abs() < 1e-14, "{}", md.k);
        assert!((md.big_kp / md.big_k - 2.0).abs() < 1e-13);
        let wide = RectangleModulus::new(0.2).unwrap();
        assert!((wide.big_kp / wide.big_k - 0.4).abs() < 1e-12);
    }

    #[test]
    fn symmetry_of_square() {
        let c = rect_to_halfplane(1.0, Complex64::new(0.5, 0.5)).unwrap();
        assert!(c.re.abs() < 1e-14 && c.im > 0.0);
        let b = rect_to_halfplane(1.0, Complex64::new(0.5, 0.0)).unwrap();
        assert!(b.norm() < 1e-15);
        let l = rect_to_halfplane(1.0, Complex64::new(0.3, 0.4)).unwrap();
        let r = rect_to_halfplane(1.0, Complex64::new(0.7, 0.4)).unwrap();
        assert!((l.re + r.re).abs() < 1e-12 && (l.im - r.im).abs() < 1e-12);
    }

    #[test]
    fn corners_and_edges() {
        let md = RectangleModulus::new(1.5).unwrap();
        let corners = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.5),
            Complex64::new(0.0, 1.5),
        ];
        for (z, want) in corners.iter().zip(md.corner_images()) {
            let w = rect_to_halfplane_with(&md, *z).unwrap();
            assert!((w.re - want).abs() < 1e-9 * want.abs().max(1.0), "{z} -> {w}");
            assert!(w.im < 1e-9);
        }
        let top = rect_to_halfplane_with(&md, Complex64::new(0.5, 1.5)).unwrap();
        assert!(!top.re.is_finite());
        assert!(rect_to_halfplane_with(&md, Complex64::new(1.2, 0.3)).is_err());
    }
}
