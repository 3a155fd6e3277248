//! Discrete extremal distance as the reciprocal effective conductance.
//!
//! Cells are nodes, neighbouring cells are joined by unit conductances, and a
//! wall of a boundary arc is held at its arc's potential through the half
//! cell between the wall and the cell centre (conductance 2). With this
//! normalization an a×b block of cells between its sides of length a has
//! extremal distance exactly b/a.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lattice::{LatticeQuad, Wall};

pub const CG_TOL: f64 = 1e-10;
pub const CG_MAX_ITER: usize = 100_000;
/// Residual above which the solve is reported as failed.
const FAIL_RESIDUAL: f64 = 1e-8;
const WALL_CONDUCTANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadMetrics {
    pub value: f64,
    pub conductance: f64,
    /// Relative residual ‖b − Aφ‖/‖b‖ of the Kirchhoff system.
    pub residual: f64,
    pub iterations: usize,
}

/// Extremal distance between two sets of walls of the quad.
pub fn discrete_extremal_distance(q: &LatticeQuad, arc1: &[Wall], arc2: &[Wall]) -> Result<QuadMetrics> {
    extremal_distance_in(q, None, &[], arc1, arc2)
}

/// Extremal distance in the sub-network of `domain` sites (all sites when
/// `None`) with the edges in `cut` removed. Sites not connected to `arc2`
/// are dropped.
pub fn extremal_distance_in(
    q: &LatticeQuad,
    domain: Option<&[bool]>,
    cut: &[usize],
    arc1: &[Wall],
    arc2: &[Wall],
) -> Result<QuadMetrics> {
    if arc1.is_empty() || arc2.is_empty() {
        return Err(Error::Domain("extremal distance needs two nonempty arcs".into()));
    }
    if arc1.iter().any(|w| arc2.contains(w)) {
        return Err(Error::Domain("arcs share a wall".into()));
    }
    let allowed = |s: usize| q.is_inside(s) && domain.is_none_or(|d| d[s]);
    if let Some(w) = arc1.iter().chain(arc2).find(|w| !allowed(w.site)) {
        return Err(Error::Domain(format!("wall of site {} lies outside the domain", w.site)));
    }
    let mut is_cut = vec![false; q.edge_count()];
    for &e in cut {
        is_cut[e] = true;
    }
    // component of arc2
    let mut index = vec![usize::MAX; q.slots()];
    let mut nodes = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for w in arc2 {
        if index[w.site] == usize::MAX {
            index[w.site] = nodes.len();
            nodes.push(w.site);
            queue.push_back(w.site);
        }
    }
    let mut links: Vec<(usize, usize)> = Vec::new();
    while let Some(s) = queue.pop_front() {
        for (e, t) in q.incident(s) {
            if is_cut[e] || !allowed(t) {
                continue;
            }
            if index[t] == usize::MAX {
                index[t] = nodes.len();
                nodes.push(t);
                queue.push_back(t);
            }
            if index[s] < index[t] {
                links.push((index[s], index[t]));
            }
        }
    }
    if arc1.iter().all(|w| index[w.site] == usize::MAX) {
        return Err(Error::Domain("the arcs are not connected in the domain".into()));
    }
    let n = nodes.len();
    let mut diag = vec![0.0; n];
    let mut b = vec![0.0; n];
    for &(i, j) in &links {
        diag[i] += 1.0;
        diag[j] += 1.0;
    }
    for w in arc1 {
        if index[w.site] != usize::MAX {
            diag[index[w.site]] += WALL_CONDUCTANCE;
        }
    }
    for w in arc2 {
        diag[index[w.site]] += WALL_CONDUCTANCE;
        b[index[w.site]] += WALL_CONDUCTANCE;
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for (o, (d, xi)) in out.iter_mut().zip(diag.iter().zip(x)) {
            *o = d * xi;
        }
        for &(i, j) in &links {
            out[i] -= x[j];
            out[j] -= x[i];
        }
    };
    let (phi, iterations) = conjugate_gradient(&apply, &diag, &b)?;
    let mut ax = vec![0.0; n];
    apply(&phi, &mut ax);
    let residual = norm(&ax.iter().zip(&b).map(|(a, c)| c - a).collect::<Vec<_>>()) / norm(&b);
    if residual > FAIL_RESIDUAL {
        return Err(Error::SolverFailure { residual, iterations });
    }
    let conductance: f64 = arc2.iter().map(|w| WALL_CONDUCTANCE * (1.0 - phi[index[w.site]])).sum();
    Ok(QuadMetrics { value: 1.0 / conductance, conductance, residual, iterations })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG from x = 0, stopping at relative residual CG_TOL.
fn conjugate_gradient(apply: &dyn Fn(&[f64], &mut [f64]), diag: &[f64], b: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=CG_MAX_ITER {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rel = norm(&r) / bnorm;
        if rel < CG_TOL {
            return Ok((x, it));
        }
        for k in 0..n {
            z[k] = r[k] / diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    let residual = norm(&r) / bnorm;
    if residual > FAIL_RESIDUAL {
        return Err(Error::SolverFailure { residual, iterations: CG_MAX_ITER });
    }
    Ok((x, CG_MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn ladder_is_series_resistance() {
        for n in [2usize, 7, 30] {
            let q = LatticeQuad::from_mask(n, 1, vec![true; n], &[(0, 0), (n - 1, 0)]).unwrap();
            let m = discrete_extremal_distance(
                &q,
                &[Wall { site: 0, outward: (-1, 0) }],
                &[Wall { site: n - 1, outward: (1, 0) }],
            )
            .unwrap();
            assert!((m.value - n as f64).abs() < 1e-8, "n = {n}: {}", m.value);
            assert!(m.residual < CG_TOL);
        }
    }

    #[test]
    fn rectangles_and_reciprocity() {
        let q = LatticeQuad::rectangle(8, 8).unwrap();
        let m = discrete_extremal_distance(&q, &q.arc_walls(0), &q.arc_walls(2)).unwrap();
        assert!((m.value - 1.0).abs() < 1e-8);
        for (w, h) in [(32, 32), (40, 24)] {
            let q = LatticeQuad::rectangle(w, h).unwrap();
            let a = discrete_extremal_distance(&q, &q.arc_walls(0), &q.arc_walls(2)).unwrap();
            let b = discrete_extremal_distance(&q, &q.arc_walls(1), &q.arc_walls(3)).unwrap();
            assert!((a.value - h as f64 / w as f64).abs() < 1e-8);
            assert!((a.value * b.value - 1.0).abs() < 0.02);
        }
    }

    fn l_shape(n: usize) -> LatticeQuad {
        let k = n / 2;
        let mask: Vec<bool> = (0..n * n).map(|s| !(s % n >= k && s / n >= k)).collect();
        // marks at four of the six corners: (0,0), (n−1,0), (k−1,n−1), (0,n−1)
        LatticeQuad::from_mask(n, n, mask, &[(0, 0), (n - 1, 0), (k - 1, n - 1), (0, n - 1)]).unwrap()
    }

    #[test]
    fn l_shape_matches_dense_kirchhoff_solve() {
        let q = l_shape(10);
        let (a1, a2) = (q.arc_walls(0), q.arc_walls(2));
        let m = discrete_extremal_distance(&q, &a1, &a2).unwrap();
        let sites: Vec<usize> = q.sites().collect();
        assert!(sites.len() <= 100);
        let idx = |s: usize| sites.iter().position(|&t| t == s).unwrap();
        let n = sites.len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for &s in &sites {
            let (i, j) = q.coords(s);
            for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (x, y) = (i as i64 + di, j as i64 + dj);
                if q.contains(x, y) {
                    a[(idx(s), idx(q.site(x as usize, y as usize)))] -= 1.0;
                    a[(idx(s), idx(s))] += 1.0;
                }
            }
        }
        for w in &a1 {
            a[(idx(w.site), idx(w.site))] += 2.0;
        }
        for w in &a2 {
            a[(idx(w.site), idx(w.site))] += 2.0;
            rhs[idx(w.site)] += 2.0;
        }
        let phi = a.lu().solve(&rhs).unwrap();
        let current: f64 = a2.iter().map(|w| 2.0 * (1.0 - phi[idx(w.site)])).sum();
        assert!((m.value - 1.0 / current).abs() < 1e-8 * m.value, "{} vs {}", m.value, 1.0 / current);
    }

    #[test]
    fn l_shape_reciprocity() {
        let q = l_shape(64);
        let a = discrete_extremal_distance(&q, &q.arc_walls(0), &q.arc_walls(2)).unwrap();
        let b = discrete_extremal_distance(&q, &q.arc_walls(1), &q.arc_walls(3)).unwrap();
        assert!((a.value * b.value - 1.0).abs() < 0.02, "{} · {}", a.value, b.value);
    }

    #[test]
    fn cut_disconnects() {
        let q = LatticeQuad::rectangle(4, 4).unwrap();
        let cut: Vec<usize> = (0..4).map(|i| q.edge_above(q.site(i, 1)).unwrap()).collect();
        assert!(matches!(
            extremal_distance_in(&q, None, &cut, &q.arc_walls(0), &q.arc_walls(2)),
            Err(Error::Domain(_))
        ));
        // a partial cut lengthens the distance
        let open = discrete_extremal_distance(&q, &q.arc_walls(0), &q.arc_walls(2)).unwrap();
        let part = extremal_distance_in(&q, None, &cut[..3], &q.arc_walls(0), &q.arc_walls(2)).unwrap();
        assert!(part.value > open.value);
    }
}
