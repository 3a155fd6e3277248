//! Interfaces of lattice configurations, their embedding into (ℍ, 0, ∞), and
//! discrete extremal distance.
//!
//! Spin interfaces run on the corners of the cells (site (i,j) is the unit
//! cell [i,i+1]×[j,j+1]). FK exploration paths run on the medial lattice in
//! doubled coordinates: primal vertex (i,j) sits at (2i,2j) and a medial
//! vertex is an edge midpoint, so exactly one of its coordinates is odd.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{LatticeQuad, Wall};

mod embed;
mod extremal;
mod fk;
mod spin;

pub use embed::{embed_interface, lattice_to_rectangle};
pub use extremal::{discrete_extremal_distance, extremal_distance_in, QuadMetrics, CG_MAX_ITER, CG_TOL};
pub use fk::{fk_loops, trace_fk_exploration, MedialLattice};
pub use spin::trace_spin_interface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TurnRule {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    /// Corners of the spin cells.
    Primal,
    /// Edge midpoints of the FK lattice, doubled coordinates.
    Medial,
}

/// A discrete interface: consecutive vertices are lattice neighbours
/// (unit steps on the primal lattice, diagonal steps on the medial one).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfacePath {
    pub kind: LatticeKind,
    pub vertices: Vec<(i64, i64)>,
    /// Turn taken at each vertex: +1 left, −1 right, 0 straight (and at the ends).
    pub turns: Vec<i8>,
    pub rule: TurnRule,
    /// Spin (or, for FK, +1 = wired cluster) on the left of the path.
    pub left: i8,
    pub start_mark: usize,
    /// Mark at which the path ended, when it ended at one.
    pub end_mark: Option<usize>,
}

impl InterfacePath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Unit steps of the path.
    pub fn steps(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.vertices.windows(2).map(|w| (w[1].0 - w[0].0, w[1].1 - w[0].1))
    }

    /// For a primal path, the cells to the left and right of each traversed
    /// edge as (left site, right site); `None` for cells outside the quad.
    pub fn flanking_cells(&self, q: &LatticeQuad) -> Vec<(Option<usize>, Option<usize>)> {
        assert_eq!(self.kind, LatticeKind::Primal, "flanking cells are defined for spin interfaces");
        let cell = |x: i64, y: i64| q.contains(x, y).then(|| q.site(x as usize, y as usize));
        self.vertices
            .windows(2)
            .map(|w| {
                let (c, d) = (w[0], (w[1].0 - w[0].0, w[1].1 - w[0].1));
                let n = (-d.1, d.0);
                let left = ((c.0 * 2 + d.0 + n.0 - 1) / 2, (c.1 * 2 + d.1 + n.1 - 1) / 2);
                let right = ((c.0 * 2 + d.0 - n.0 - 1) / 2, (c.1 * 2 + d.1 - n.1 - 1) / 2);
                (cell(left.0, left.1), cell(right.0, right.1))
            })
            .collect()
    }

    /// Every cell a primal tracer reads: the flanking cells of each edge and
    /// the two cells ahead of each interior corner. Configurations agreeing
    /// on these cells produce the same path.
    pub fn inspected_cells(&self, q: &LatticeQuad) -> Vec<usize> {
        let cell = |x: i64, y: i64| q.contains(x, y).then(|| q.site(x as usize, y as usize));
        let mut out: Vec<usize> = Vec::new();
        for (l, r) in self.flanking_cells(q) {
            out.extend(l);
            out.extend(r);
        }
        for w in self.vertices.windows(2) {
            let (c, d) = (w[1], (w[1].0 - w[0].0, w[1].1 - w[0].1));
            let n = (-d.1, d.0);
            out.extend(cell((2 * c.0 + d.0 + n.0 - 1) / 2, (2 * c.1 + d.1 + n.1 - 1) / 2));
            out.extend(cell((2 * c.0 + d.0 - n.0 - 1) / 2, (2 * c.1 + d.1 - n.1 - 1) / 2));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Walls of the cells on one side of a primal path, facing the path.
    pub fn side_walls(&self, q: &LatticeQuad, right: bool) -> Vec<Wall> {
        let mut out: Vec<Wall> = Vec::new();
        for ((l, r), d) in self.flanking_cells(q).into_iter().zip(self.steps()) {
            let n = (-d.1 as i8, d.0 as i8);
            let wall = if right {
                r.map(|s| Wall { site: s, outward: n })
            } else {
                l.map(|s| Wall { site: s, outward: (-n.0, -n.1) })
            };
            if let Some(w) = wall {
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        out
    }

    /// Edges of the quad crossed (separated) by a primal path.
    pub fn cut_edges(&self, q: &LatticeQuad) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .flanking_cells(q)
            .into_iter()
            .filter_map(|(l, r)| q.edge_between(l?, r?))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// CSV with header `k,x,y,turn`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "x", "y", "turn"])?;
        for (k, (&(x, y), &t)) in self.vertices.iter().zip(&self.turns).enumerate() {
            w.write_record(&[k.to_string(), x.to_string(), y.to_string(), t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Turn from heading d to heading e: +1 left, −1 right, 0 straight.
pub(crate) fn turn_sign(d: (i64, i64), e: (i64, i64)) -> i8 {
    (d.0 * e.1 - d.1 * e.0).signum() as i8
}
