//! Embedding of interfaces of rectangular quads into (ℍ, 0, ∞).

use num_complex::Complex64;

use super::{InterfacePath, LatticeKind};
use crate::error::{Error, Result};
use crate::lattice::LatticeQuad;
use crate::loewner::HalfPlaneCurve;
use crate::specialfn::{rect_to_halfplane_with, RectangleModulus};

/// Position of a path vertex in the rectangle [0,1]×[0,aspect], and the aspect.
///
/// Spin interfaces live in the union of cells [0,W]×[0,H]; FK exploration
/// paths live in the ghost-framed box whose frame vertices sit on the sides.
pub fn lattice_to_rectangle(kind: LatticeKind, q: &LatticeQuad, x: f64, y: f64) -> (Complex64, f64) {
    let (w, h) = (q.width() as f64, q.height() as f64);
    match kind {
        LatticeKind::Primal => (Complex64::new(x / w, y / w), h / w),
        LatticeKind::Medial => {
            let s = w + 1.0;
            (Complex64::new((0.5 * x + 1.0) / s, (0.5 * y + 1.0) / s), (h + 1.0) / s)
        }
    }
}

/// Maps the path into ℍ by the conformal map of the rectangle, followed by
/// the Möbius map φ(z) = (b − a)(z − a)/(b − z) sending the start image a to 0
/// and the end image b to ∞. When b is already ∞, φ is the translation
/// z ↦ z − a, which is the b → ∞ limit of the same formula; this fixes the
/// scale. Between its end points the path is sampled at the midpoints of its
/// edges: a path may pass a vertex twice, but never an edge, so the sampled
/// polyline is simple (and for FK paths it stays off the sides of the
/// rectangle). Samples whose image is not finite (the end point) are dropped.
pub fn embed_interface(path: &InterfacePath, q: &LatticeQuad) -> Result<HalfPlaneCurve> {
    if !q.is_rectangle() {
        return Err(Error::Domain("embedding is implemented for rectangles only".into()));
    }
    if path.len() < 2 {
        return Err(Error::Domain("path has fewer than two vertices".into()));
    }
    let v = &path.vertices;
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(v.len() + 1);
    samples.push((v[0].0 as f64, v[0].1 as f64));
    samples.extend(v.windows(2).map(|p| (0.5 * (p[0].0 + p[1].0) as f64, 0.5 * (p[0].1 + p[1].1) as f64)));
    let last = v[v.len() - 1];
    samples.push((last.0 as f64, last.1 as f64));
    let aspect = lattice_to_rectangle(path.kind, q, 0.0, 0.0).1;
    let md = RectangleModulus::new(aspect)?;
    let images: Vec<Complex64> = samples
        .iter()
        .map(|&(x, y)| rect_to_halfplane_with(&md, lattice_to_rectangle(path.kind, q, x, y).0))
        .collect::<Result<_>>()?;
    let a = images[0].re;
    let end = images[images.len() - 1];
    let phi = |z: Complex64| -> Complex64 {
        if end.re.is_finite() && end.im.is_finite() {
            let b = end.re;
            (z - a) * (b - a) / (b - z)
        } else {
            z - a
        }
    };
    let mut points = vec![Complex64::new(0.0, 0.0)];
    points.extend(
        images[1..]
            .iter()
            .map(|&z| phi(z))
            .filter(|z| z.re.is_finite() && z.im.is_finite())
            .map(|z| Complex64::new(z.re, z.im.max(0.0))),
    );
    HalfPlaneCurve::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interfaces::{trace_spin_interface, TurnRule};
    use crate::lattice::{sample_ising_cluster, beta_critical, SpinBoundaryCondition, SpinConfig};
    use crate::loewner::extract_driving;
    use crate::rng::RngSeed;

    fn vertical_path(q: &LatticeQuad, x: i64) -> InterfacePath {
        InterfacePath {
            kind: LatticeKind::Primal,
            vertices: (0..=q.height() as i64).map(|y| (x, y)).collect(),
            turns: vec![0; q.height() + 1],
            rule: TurnRule::Left,
            left: -1,
            start_mark: 0,
            end_mark: Some(1),
        }
    }

    #[test]
    fn vertical_midline_is_the_imaginary_axis() {
        let q = LatticeQuad::dobrushin(16, 16).unwrap();
        let c = embed_interface(&vertical_path(&q, 8), &q).unwrap();
        assert_eq!(c.len(), 17);
        for z in &c.points {
            // symmetric under z ↦ −z̄ means on the imaginary axis
            assert!(z.re.abs() < 1e-6, "{z}");
        }
        assert!(c.points.windows(2).all(|p| p[1].im > p[0].im));
    }

    #[test]
    fn boundary_path_stays_near_the_real_line() {
        let q = LatticeQuad::dobrushin(16, 16).unwrap();
        let path = InterfacePath {
            vertices: (0..=8).map(|x| (x, 0)).collect(),
            turns: vec![0; 9],
            ..vertical_path(&q, 0)
        };
        let c = embed_interface(&path, &q).unwrap();
        assert!(c.points.iter().all(|z| z.im.abs() < 1e-3));
    }

    #[test]
    fn reflection_equivariance_and_driving_extraction() {
        let q = LatticeQuad::dobrushin(64, 64).unwrap();
        let bc = SpinBoundaryCondition::dobrushin();
        let cfg = sample_ising_cluster(&q, &bc, beta_critical(), 60, RngSeed::new(8, 3)).unwrap();
        let p = trace_spin_interface(&q, &cfg, 0, TurnRule::Left).unwrap();
        let mirror: SpinConfig = cfg.reflect_horizontal().flipped();
        assert!(mirror.agrees_with(&q, &bc).unwrap());
        let pm = trace_spin_interface(&q, &mirror, 0, TurnRule::Right).unwrap();
        let (c, cm) = (embed_interface(&p, &q).unwrap(), embed_interface(&pm, &q).unwrap());
        assert_eq!(c.len(), cm.len());
        for (z, zm) in c.points.iter().zip(&cm.points) {
            assert!((z.conj() + zm).norm() < 1e-6 * (1.0 + z.norm()), "{z} vs {zm}");
        }
        let d = extract_driving(&c).unwrap();
        assert!(d.grid.horizon() > 0.0);
        let back = crate::loewner::forward_trace(&d).unwrap();
        let err = back.points.iter().zip(&c.points).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 5e-2, "round trip {err}");
    }
}
