//! Driving function → curve, and the reversal involution.

use num_complex::Complex64;

use super::{DrivingPath, HalfPlaneCurve, SlitStep, NEAR_REAL};
use crate::error::{Error, Result};

/// Curve traced by a driving path: one vertex per grid point, the first being
/// the base W_0.
///
/// The tip after step k is f_1 ∘ … ∘ f_{k−1} applied to the tip of slit k, where
/// f_j is the inverse of the j-th slit map. Cost is quadratic in the number of steps.
pub fn forward_trace(d: &DrivingPath) -> Result<HalfPlaneCurve> {
    forward_trace_strided(d, 1)
}

/// Like [`forward_trace`] but only computes every `stride`-th tip (plus the last).
pub fn forward_trace_strided(d: &DrivingPath, stride: usize) -> Result<HalfPlaneCurve> {
    if d.len() < 2 {
        return Err(Error::Domain("driving path needs at least two grid points".into()));
    }
    let stride = stride.max(1);
    let n = d.len() - 1;
    let mut points = vec![Complex64::new(d.w[0], 0.0)];
    points.extend(trace_vertices(d, (1..=n).filter(|k| k % stride == 0 || *k == n))?);
    HalfPlaneCurve::new(points)
}

/// Vertices with the given grid indices (1 ≤ k < len) of the traced curve.
pub fn trace_vertices(d: &DrivingPath, indices: impl IntoIterator<Item = usize>) -> Result<Vec<Complex64>> {
    let steps: Vec<SlitStep> = d.steps().collect();
    indices
        .into_iter()
        .map(|k| {
            if k == 0 || k > steps.len() {
                return Err(Error::Domain(format!("vertex {k} outside 1..={}", steps.len())));
            }
            let mut z = steps[k - 1].tip();
            for s in steps[..k - 1].iter().rev() {
                z = s.inverse(z);
            }
            if !(z.re.is_finite() && z.im.is_finite()) || z.im < -NEAR_REAL {
                return Err(Error::Numerical(format!("trace left the half-plane at step {k}")));
            }
            Ok(z)
        })
        .collect()
}

/// Applies ψ(z) = xy / z̄, which swaps 0 and ∞ and x and y, then reverses the
/// order of the vertices and starts the result at 0.
///
/// The truncated end of the input (its tip) becomes the first interior vertex.
pub fn mobius_reverse(c: &HalfPlaneCurve, x: f64, y: f64) -> Result<HalfPlaneCurve> {
    if !(x > 0.0 && y > x) {
        return Err(Error::Domain(format!("need 0 < x < y, got ({x}, {y})")));
    }
    if c.base.abs() > NEAR_REAL {
        return Err(Error::Domain(format!("curve must start at 0, starts at {}", c.base)));
    }
    let k = x * y;
    let mut out = Vec::with_capacity(c.len());
    out.push(Complex64::new(0.0, 0.0));
    for &p in c.points[1..].iter().rev() {
        if p.norm() < NEAR_REAL {
            return Err(Error::Domain(format!("curve vertex {p} maps to infinity")));
        }
        out.push(k / p.conj());
    }
    HalfPlaneCurve::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_driving_traces_vertical_slit() {
        let d = DrivingPath::from_fn(1.0, 10_000, |_| 0.0).unwrap();
        let c = forward_trace(&d).unwrap();
        assert_eq!(c.len(), d.len());
        assert!((c.tip() - Complex64::new(0.0, 2.0)).norm() < 1e-3);
        for p in &c.points {
            assert!(p.re.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_driving_translates() {
        let d0 = DrivingPath::from_fn(0.5, 200, |_| 0.0).unwrap();
        let d1 = DrivingPath::from_fn(0.5, 200, |_| 1.7).unwrap();
        let c0 = forward_trace(&d0).unwrap();
        let c1 = forward_trace(&d1).unwrap();
        for (a, b) in c0.points.iter().zip(&c1.points) {
            assert!((b - a - 1.7).norm() < 1e-12);
        }
    }

    #[test]
    fn strided_trace_agrees_with_full() {
        let d = DrivingPath::from_fn(1.0, 300, |t| (5.0 * t).sin()).unwrap();
        let full = forward_trace(&d).unwrap();
        let part = forward_trace_strided(&d, 7).unwrap();
        assert_eq!(part.points[1], full.points[7]);
        assert_eq!(part.tip(), full.tip());
    }

    #[test]
    fn reversal_is_an_involution() {
        let d = DrivingPath::from_fn(1.0, 200, |t| (3.0 * t).cos() - 1.0).unwrap();
        let c = forward_trace(&d).unwrap();
        let back = mobius_reverse(&mobius_reverse(&c, 1.0, 2.0).unwrap(), 1.0, 2.0).unwrap();
        for (a, b) in c.points.iter().zip(&back.points) {
            assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
        }
        let slit = forward_trace(&DrivingPath::from_fn(1.0, 50, |_| 0.0).unwrap()).unwrap();
        for p in &mobius_reverse(&slit, 1.0, 2.0).unwrap().points {
            assert!(p.re.abs() < 1e-12);
        }
    }
}
