//! Curve → driving function by successive slit maps, and transport of
//! boundary points through the resulting conformal map.

use num_complex::Complex64;

use super::{reflected_step, DrivingPath, HalfPlaneCurve, RealImage, SlitStep, TimeGrid};
use crate::error::{Error, Result};

/// Driving function of a polyline, one slit step per vertex.
///
/// Each step uses the slit map that sends the current image of the next vertex
/// to ℝ, so W_k is the real part of that image and δt_k a quarter of the square
/// of its imaginary part. Exactly inverts [`super::forward_trace`].
pub fn extract_driving(c: &HalfPlaneCurve) -> Result<DrivingPath> {
    extract_driving_until(c, f64::INFINITY)
}

/// Same as [`extract_driving`], stopping after the first step whose
/// capacity reaches `horizon`. Vertices beyond that step are never mapped,
/// so the cost is quadratic in the length of the prefix only.
///
/// A vertex whose step would not advance the capacity in floating point (a
/// vertex deep inside a fjord of the earlier curve) is skipped.
pub fn extract_driving_until(c: &HalfPlaneCurve, horizon: f64) -> Result<DrivingPath> {
    zip_prefix(c, horizon, 0.0)
}

/// Coarse zipper for lattice curves: as [`extract_driving_until`], but a
/// vertex whose current image lies below height `min_height` is not unzipped.
/// Long crawls along the boundary then cost nothing; every skipped vertex
/// stays within `min_height` of ℝ in the picture where it is skipped, which
/// bounds the perturbation of the driving function.
pub fn extract_driving_coarse(c: &HalfPlaneCurve, horizon: f64, min_height: f64) -> Result<DrivingPath> {
    zip_prefix(c, horizon, min_height)
}

fn zip_prefix(c: &HalfPlaneCurve, horizon: f64, min_height: f64) -> Result<DrivingPath> {
    let n = c.len();
    let mut steps: Vec<SlitStep> = Vec::new();
    let mut times = vec![0.0];
    let mut w = vec![c.base];
    let mut t = 0.0;
    for k in 1..n {
        if t >= horizon {
            break;
        }
        let p = steps.iter().fold(c.points[k], |z, s| s.map(z));
        if min_height > 0.0 && p.re.is_finite() && p.im < min_height && p.im > -min_height {
            continue;
        }
        if !(p.im > 0.0) || !p.re.is_finite() {
            return Err(Error::Numerical(format!(
                "vertex {k} has image {p} on or below the real line"
            )));
        }
        let step = SlitStep::new(p.re, 0.25 * p.im * p.im);
        if t + step.dt == t {
            continue;
        }
        t += step.dt;
        times.push(t);
        w.push(step.w);
        steps.push(step);
    }
    DrivingPath::new(TimeGrid::new(times)?, w)
}

/// Image g(x) and derivative g′(x) of real points under the map of a driving path.
pub fn transport_real(d: &DrivingPath, pts: &[f64]) -> Vec<RealImage> {
    let w0 = d.w[0];
    pts.iter()
        .map(|&x| {
            let right = x >= w0;
            let mut image = x;
            let mut derivative = 1.0;
            let mut swallowed = None;
            for k in 1..d.len() {
                let s = d.step(k);
                let (img, dv, contact) = reflected_step(image, s.w, s.dt, right);
                if contact {
                    swallowed.get_or_insert(k);
                }
                image = img;
                derivative *= dv;
            }
            RealImage { image, derivative, swallowed }
        })
        .collect()
}

/// Zips the curve, then transports the real points through the full map.
pub fn conformal_transport(c: &HalfPlaneCurve, pts: &[f64]) -> Result<Vec<RealImage>> {
    if let Some(p) = pts.iter().find(|&&p| p == c.base) {
        return Err(Error::Domain(format!("point {p} is the base of the curve")));
    }
    if c.len() < 2 {
        return Ok(pts.iter().map(|&x| RealImage { image: x, derivative: 1.0, swallowed: None }).collect());
    }
    let d = extract_driving(c)?;
    Ok(transport_real(&d, pts))
}

/// Resamples a polyline to `n` vertices equally spaced in arclength.
pub fn resample_arclength(c: &HalfPlaneCurve, n: usize) -> Result<HalfPlaneCurve> {
    if n < 2 || c.len() < 2 {
        return Err(Error::Domain("resampling needs at least two vertices".into()));
    }
    let mut cum = vec![0.0];
    for pair in c.points.windows(2) {
        cum.push(cum.last().unwrap() + (pair[1] - pair[0]).norm());
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let s = total * i as f64 / (n - 1) as f64;
        while j + 2 < cum.len() && cum[j + 1] < s {
            j += 1;
        }
        let seg = cum[j + 1] - cum[j];
        let u = if seg > 0.0 { ((s - cum[j]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        out.push(c.points[j] + (c.points[j + 1] - c.points[j]) * u);
    }
    out[0] = Complex64::new(c.base, 0.0);
    HalfPlaneCurve::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::forward_trace;

    #[test]
    fn vertical_segment_has_zero_driving() {
        let n = 1000;
        let pts = (0..=n).map(|k| Complex64::new(0.0, 2.0 * k as f64 / n as f64)).collect();
        let d = extract_driving(&HalfPlaneCurve::new(pts).unwrap()).unwrap();
        assert!(d.w.iter().all(|w| w.abs() < 1e-12));
        assert!((d.grid.horizon() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zipper_inverts_trace() {
        let d = DrivingPath::from_fn(1.0, 400, |t| (7.0 * t).sin() - t).unwrap();
        let c = forward_trace(&d).unwrap();
        let back = extract_driving(&c).unwrap();
        for k in 0..d.len() {
            assert!((back.w[k] - d.w[k]).abs() < 1e-9, "k = {k}");
            assert!((back.times()[k] - d.times()[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn slit_transport_closed_form() {
        let h = 1.5;
        let pts = (0..=200).map(|k| Complex64::new(0.0, h * k as f64 / 200.0)).collect();
        let c = HalfPlaneCurve::new(pts).unwrap();
        let t = h * h / 4.0;
        let out = conformal_transport(&c, &[1.0, -2.0]).unwrap();
        assert!((out[0].image - (1.0 + 4.0 * t).sqrt()).abs() < 1e-12);
        assert!((out[0].derivative - 1.0 / (1.0 + 4.0 * t).sqrt()).abs() < 1e-12);
        assert!((out[1].image + (4.0 + 4.0 * t).sqrt()).abs() < 1e-12);
        assert!(conformal_transport(&c, &[0.0]).is_err());
    }

    #[test]
    fn empty_curve_transport_is_identity() {
        let c = HalfPlaneCurve::new(vec![Complex64::new(0.0, 0.0)]).unwrap();
        let out = conformal_transport(&c, &[0.5]).unwrap();
        assert_eq!((out[0].image, out[0].derivative), (0.5, 1.0));
    }

    #[test]
    fn arclength_resampling() {
        let c = HalfPlaneCurve::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 1.0),
        ])
        .unwrap();
        let r = resample_arclength(&c, 5).unwrap();
        assert!((r.points[2] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((r.points[3] - Complex64::new(0.5, 1.0)).norm() < 1e-15);
    }
}
