//! FK exploration path and loops on the medial lattice.
//!
//! The quad is surrounded by a ghost frame of primal vertices at i ∈ {−1, W}
//! and j ∈ {−1, H}. A frame vertex inherits the label of the nearest real
//! site: edges whose frame endpoints are all wired are open (this realizes
//! the wiring), the others are closed, so the free side carries open dual
//! edges along the boundary. The two frame edges with endpoints of different
//! labels are where the exploration path starts and ends.

use std::collections::HashSet;

use super::{turn_sign, InterfacePath, LatticeKind, TurnRule};
use crate::error::{Error, Result};
use crate::lattice::{BondConfig, FkBoundaryCondition, FkLabel, LatticeQuad};

type P = (i64, i64);

/// The medial lattice of a rectangle with its ghost frame.
pub struct MedialLattice<'a> {
    q: &'a LatticeQuad,
    cfg: &'a BondConfig,
    bc: &'a FkBoundaryCondition,
    w: i64,
    h: i64,
}

impl<'a> MedialLattice<'a> {
    pub fn new(q: &'a LatticeQuad, cfg: &'a BondConfig, bc: &'a FkBoundaryCondition) -> Result<Self> {
        if !q.is_rectangle() {
            return Err(Error::Domain("exploration paths are implemented on rectangles".into()));
        }
        bc.validate(q)?;
        if cfg.open.len() != q.edge_count() {
            return Err(Error::Domain("bond configuration size does not match the quad".into()));
        }
        Ok(Self { q, cfg, bc, w: q.width() as i64, h: q.height() as i64 })
    }

    fn real(&self, v: P) -> bool {
        (0..self.w).contains(&v.0) && (0..self.h).contains(&v.1)
    }

    fn wired(&self, v: P) -> bool {
        let s = self.q.site(v.0.clamp(0, self.w - 1) as usize, v.1.clamp(0, self.h - 1) as usize);
        self.q.arc_of(s).is_some_and(|a| self.bc.labels[a] == FkLabel::Wired)
    }

    pub fn contains(&self, m: P) -> bool {
        (-2..=2 * self.w).contains(&m.0) && (-2..=2 * self.h).contains(&m.1) && (m.0 + m.1).rem_euclid(2) == 1
    }

    /// Primal endpoints of the edge whose midpoint is m.
    fn endpoints(m: P) -> (P, P) {
        if m.0.rem_euclid(2) == 1 {
            (((m.0 - 1) / 2, m.1.div_euclid(2)), ((m.0 + 1).div_euclid(2), m.1.div_euclid(2)))
        } else {
            ((m.0.div_euclid(2), (m.1 - 1).div_euclid(2)), (m.0.div_euclid(2), (m.1 + 1).div_euclid(2)))
        }
    }

    fn on_frame(&self, m: P) -> bool {
        let (u, v) = Self::endpoints(m);
        !self.real(u) && !self.real(v)
    }

    pub fn is_open(&self, m: P) -> bool {
        let (u, v) = Self::endpoints(m);
        match (self.real(u), self.real(v)) {
            (true, true) => {
                let e = self.q.edge_between(self.q.site(u.0 as usize, u.1 as usize), self.q.site(v.0 as usize, v.1 as usize));
                self.cfg.open[e.expect("adjacent sites")]
            }
            (true, false) => self.wired(v),
            (false, true) => self.wired(u),
            (false, false) => self.wired(u) && self.wired(v),
        }
    }

    /// Outgoing heading at m for incoming heading d: reflect off the open
    /// primal edge or the open dual edge through m.
    pub fn next_heading(&self, m: P, d: P) -> P {
        let horizontal = m.0.rem_euclid(2) == 1;
        if horizontal == self.is_open(m) {
            (d.0, -d.1)
        } else {
            (-d.0, d.1)
        }
    }

    /// Frame edges with endpoints of different labels, as (midpoint,
    /// inward normal, unit step toward the wired endpoint).
    fn junctions(&self) -> Vec<(P, P, P)> {
        let (w, h) = (self.w, self.h);
        let mut out = Vec::new();
        let mut check = |a: P, b: P, nu: P| {
            let (wa, wb) = (self.wired(a), self.wired(b));
            if wa != wb {
                let m = (a.0 + b.0, a.1 + b.1);
                let tau = if wa { (a.0 - b.0, a.1 - b.1) } else { (b.0 - a.0, b.1 - a.1) };
                out.push((m, nu, tau));
            }
        };
        for i in -1..w {
            check((i, -1), (i + 1, -1), (0, 1));
            check((i, h), (i + 1, h), (0, -1));
        }
        for j in -1..h {
            check((-1, j), (-1, j + 1), (1, 0));
            check((w, j), (w, j + 1), (-1, 0));
        }
        out
    }

    /// Start and end of the exploration path: the path leaves the start with
    /// the wired side on its left.
    fn terminals(&self) -> Result<((P, P), P)> {
        let js = self.junctions();
        if js.len() != 2 {
            return Err(Error::Domain(format!(
                "exploration needs exactly one wired and one free arc, found {} junctions",
                js.len()
            )));
        }
        let starts: Vec<usize> = (0..2).filter(|&k| js[k].2 == (-js[k].1 .1, js[k].1 .0)).collect();
        if starts.len() != 1 {
            return Err(Error::Domain("cannot orient the exploration path".into()));
        }
        let (m, nu, tau) = js[starts[0]];
        Ok(((m, (tau.0 + nu.0, tau.1 + nu.1)), js[1 - starts[0]].0))
    }

    fn edge_key(a: P, b: P) -> (P, P) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Medial edges of the explored domain: both ends inside the frame and
    /// neither end on a closed frame edge.
    fn domain_edges(&self) -> Vec<(P, P)> {
        let mut out = Vec::new();
        for x in -2..=2 * self.w {
            for y in -2..=2 * self.h {
                let m = (x, y);
                if !self.contains(m) || (self.on_frame(m) && !self.is_open(m)) {
                    continue;
                }
                for d in [(1, 1), (1, -1)] {
                    let n = (x + d.0, y + d.1);
                    if self.contains(n) && !(self.on_frame(n) && !self.is_open(n)) {
                        out.push(Self::edge_key(m, n));
                    }
                }
            }
        }
        out
    }
}

/// Exploration path from the free-to-wired junction to the other one,
/// keeping the wired cluster on its left.
pub fn trace_fk_exploration(q: &LatticeQuad, cfg: &BondConfig, bc: &FkBoundaryCondition) -> Result<InterfacePath> {
    let ml = MedialLattice::new(q, cfg, bc)?;
    let ((m0, d0), end) = ml.terminals()?;
    let cap = 4 * (q.width() + 3) * (q.height() + 3);
    let mut vertices = vec![m0];
    let mut turns = vec![0i8];
    let (mut m, mut d) = (m0, d0);
    loop {
        m = (m.0 + d.0, m.1 + d.1);
        vertices.push(m);
        turns.push(0);
        if m == end {
            break;
        }
        if !ml.contains(m) || vertices.len() > cap {
            return Err(Error::InconsistentConfig(format!("exploration path lost at medial vertex {m:?}")));
        }
        let e = ml.next_heading(m, d);
        *turns.last_mut().unwrap() = turn_sign(d, e);
        d = e;
    }
    let start_mark = nearest_mark(q, m0);
    let end_mark = Some(nearest_mark(q, end));
    Ok(InterfacePath { kind: LatticeKind::Medial, vertices, turns, rule: TurnRule::Left, left: 1, start_mark, end_mark })
}

fn nearest_mark(q: &LatticeQuad, m: P) -> usize {
    (0..q.marks().len())
        .min_by_key(|&k| {
            let (i, j) = q.coords(q.mark_site(k));
            (2 * i as i64 - m.0).abs() + (2 * j as i64 - m.1).abs()
        })
        .unwrap_or(0)
}

/// The closed loops of the loop representation: every medial edge of the
/// explored domain not used by `path` lies on exactly one of them.
pub fn fk_loops(
    q: &LatticeQuad,
    cfg: &BondConfig,
    bc: &FkBoundaryCondition,
    path: &InterfacePath,
) -> Result<Vec<Vec<(i64, i64)>>> {
    let ml = MedialLattice::new(q, cfg, bc)?;
    let domain: HashSet<(P, P)> = ml.domain_edges().into_iter().collect();
    let mut used: HashSet<(P, P)> = HashSet::new();
    for w in path.vertices.windows(2) {
        if !used.insert(MedialLattice::edge_key(w[0], w[1])) {
            return Err(Error::InconsistentConfig("exploration path reuses a medial edge".into()));
        }
    }
    let mut keys: Vec<(P, P)> = domain.iter().cloned().collect();
    keys.sort_unstable();
    let mut loops = Vec::new();
    for key in keys {
        if used.contains(&key) {
            continue;
        }
        used.insert(key);
        let (a, b) = key;
        let mut lp = vec![a, b];
        let (mut cur, mut d) = (b, (b.0 - a.0, b.1 - a.1));
        loop {
            d = ml.next_heading(cur, d);
            let next = (cur.0 + d.0, cur.1 + d.1);
            let k = MedialLattice::edge_key(cur, next);
            if k == key {
                break;
            }
            if !domain.contains(&k) || !used.insert(k) {
                return Err(Error::InconsistentConfig(format!("loop through {cur:?} is not closed")));
            }
            lp.push(next);
            cur = next;
        }
        loops.push(lp);
    }
    Ok(loops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_fk, p_critical};
    use crate::rng::RngSeed;
    use rand::Rng;

    fn frame_side(q: &LatticeQuad, m: P) -> bool {
        let (w, h) = (q.width() as i64, q.height() as i64);
        m.0 <= 1 || m.1 <= 1 || m.0 >= 2 * w - 3 || m.1 >= 2 * h - 3
    }

    #[test]
    fn all_open_follows_the_free_arc() {
        let q = LatticeQuad::dobrushin(6, 6).unwrap();
        let bc = FkBoundaryCondition::dobrushin();
        let cfg = BondConfig::filled(&q, true);
        let p = trace_fk_exploration(&q, &cfg, &bc).unwrap();
        // the free arc is on the right (x ≥ 3): the path stays there, next to the frame
        assert!(p.vertices.iter().all(|&m| m.0 >= 4 && frame_side(&q, m)));
        assert_eq!(p.vertices[0], (5, -2));
        assert_eq!(*p.vertices.last().unwrap(), (5, 12));
    }

    #[test]
    fn all_closed_follows_the_wired_arc() {
        let q = LatticeQuad::dobrushin(6, 6).unwrap();
        let bc = FkBoundaryCondition::dobrushin();
        let cfg = BondConfig::filled(&q, false);
        let p = trace_fk_exploration(&q, &cfg, &bc).unwrap();
        assert!(p.vertices.iter().all(|&m| m.0 <= 5 && frame_side(&q, m)));
        let loops = fk_loops(&q, &cfg, &bc, &p).unwrap();
        // one small loop around each site off the wired arc, and one around
        // each wired corner face of the frame
        assert_eq!(loops.len(), 36 - q.arc(1).len() + 2);
        assert!(loops.iter().all(|l| l.len() == 5));
    }

    #[test]
    fn path_and_loops_partition_the_medial_edges() {
        let q = LatticeQuad::dobrushin(4, 4).unwrap();
        let bc = FkBoundaryCondition::dobrushin();
        let ml_edges = |cfg: &BondConfig| MedialLattice::new(&q, cfg, &bc).unwrap().domain_edges();
        let mut rng = RngSeed::new(11, 0).rng();
        for _ in 0..200 {
            let mut cfg = BondConfig::filled(&q, false);
            for o in &mut cfg.open {
                *o = rng.random::<bool>();
            }
            let p = trace_fk_exploration(&q, &cfg, &bc).unwrap();
            let loops = fk_loops(&q, &cfg, &bc, &p).unwrap();
            let mut covered: HashSet<(P, P)> = HashSet::new();
            let mut count = 0;
            for seq in std::iter::once(&p.vertices).chain(loops.iter()) {
                for w in seq.windows(2) {
                    covered.insert(MedialLattice::edge_key(w[0], w[1]));
                    count += 1;
                }
            }
            assert_eq!(covered.len(), count, "an edge is covered twice");
            let domain: HashSet<(P, P)> = ml_edges(&cfg).into_iter().collect();
            assert!(domain.is_subset(&covered));
            assert_eq!(covered.len() - domain.len(), 2, "only the end edges of the path lie outside");
        }
    }

    #[test]
    fn never_crosses_open_or_dual_open_edges() {
        let q = LatticeQuad::dobrushin(10, 8).unwrap();
        let bc = FkBoundaryCondition::dobrushin();
        let cfg = sample_fk(&q, &bc, p_critical(2.0), 2.0, 20, RngSeed::new(2, 5)).unwrap();
        let p = trace_fk_exploration(&q, &cfg, &bc).unwrap();
        let ml = MedialLattice::new(&q, &cfg, &bc).unwrap();
        for w in p.vertices.windows(3) {
            let (m, din, dout) = (w[1], (w[1].0 - w[0].0, w[1].1 - w[0].1), (w[2].0 - w[1].0, w[2].1 - w[1].1));
            // the primal edge at m runs along x when m.0 is odd; passing m
            // without crossing it keeps the side of that edge
            let horizontal = m.0.rem_euclid(2) == 1;
            let crosses_primal = if horizontal { din.1 == dout.1 } else { din.0 == dout.0 };
            assert_eq!(crosses_primal, !ml.is_open(m));
        }
        assert!(matches!(
            trace_fk_exploration(&q, &cfg, &FkBoundaryCondition::free(2)),
            Err(Error::Domain(_))
        ));
    }
}
