//! Ising and FK (random-cluster) models on finite square-lattice quads.
//!
//! Sites are indexed row-major, `s = j * width + i`. Site (i, j) is drawn as
//! the unit cell [i, i+1] × [j, j+1]; cell corners are the integer points and
//! carry spin interfaces. The boundary ring lists the boundary sites
//! counterclockwise and the marks cut it into arcs: arc k runs from mark k
//! (inclusive) to mark k+1 (exclusive).

mod crossing;
mod enumerate;
mod fk;
mod ising;
mod snapshot;

pub use crossing::{
    bond_crossing, crossing_event, disjoint_dual_crossings, dual_crossing, sample_conditioned, spin_crossing,
    ConditionedSample, Config, CrossingEvent,
};
pub use enumerate::{edwards_sokal_marginal, enumerate_fk, enumerate_ising, ProbabilityTable, DEFAULT_STATE_CAP};
pub use fk::{sample_fk, sample_fk_cluster, FkSampler};
pub use ising::{sample_ising, sample_ising_cluster, IsingSampler};
pub use snapshot::{read_snapshot, write_pbm, write_snapshot, Snapshot, SNAPSHOT_MAGIC};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// β_c = ½ log(1 + √2).
pub fn beta_critical() -> f64 {
    0.5 * (1.0 + 2f64.sqrt()).ln()
}

/// p_c(q) = √q / (1 + √q).
pub fn p_critical(q: f64) -> f64 {
    q.sqrt() / (1.0 + q.sqrt())
}

/// Bond probability of the Edwards–Sokal coupling at inverse temperature β.
pub fn bond_probability(beta: f64) -> f64 {
    -(-2.0 * beta).exp_m1()
}

const NONE: u32 = u32::MAX;

/// A simply connected set of sites with marked boundary sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeQuad {
    width: usize,
    height: usize,
    inside: Vec<bool>,
    ring: Vec<usize>,
    ring_pos: Vec<Option<usize>>,
    walls: Vec<Wall>,
    marks: Vec<usize>,
    mark_walls: Vec<usize>,
    arc_of: Vec<Option<usize>>,
    edges: Vec<(usize, usize)>,
    edge_right: Vec<u32>,
    edge_up: Vec<u32>,
}

impl LatticeQuad {
    /// Full w × h rectangle marked at its corners: x^L = (0,0), x^R = (w−1,0),
    /// y^R = (w−1,h−1), y^L = (0,h−1).
    pub fn rectangle(width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::Domain(format!("rectangle needs both sides ≥ 2, got {width}×{height}")));
        }
        let corners = [(0, 0), (width - 1, 0), (width - 1, height - 1), (0, height - 1)];
        Self::build(width, height, vec![true; width * height], &corners)
    }

    /// Rectangle with two marks: a at the bottom middle and b at the top
    /// middle. Arc 0 is the right-hand side (a → b counterclockwise), arc 1 the
    /// left-hand side. The sign changes sit at the corner x = ⌊w/2⌋ on both
    /// the bottom and the top edge.
    pub fn dobrushin(width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::Domain(format!("rectangle needs both sides ≥ 2, got {width}×{height}")));
        }
        let m = width / 2;
        Self::build(width, height, vec![true; width * height], &[(m, 0), (m - 1, height - 1)])
    }

    /// Rectangle with custom marks given as site coordinates in counterclockwise order.
    pub fn rectangle_with_marks(width: usize, height: usize, marks: &[(usize, usize)]) -> Result<Self> {
        Self::build(width, height, vec![true; width * height], marks)
    }

    /// Arbitrary simply connected mask (row-major, `width * height` entries).
    /// The mask must be 4-connected without diagonal pinches.
    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>, marks: &[(usize, usize)]) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::Domain("mask length must be width * height".into()));
        }
        Self::build(width, height, mask, marks)
    }

    fn build(width: usize, height: usize, inside: Vec<bool>, marks: &[(usize, usize)]) -> Result<Self> {
        let n = width * height;
        let sites: Vec<usize> = (0..n).filter(|&s| inside[s]).collect();
        if sites.is_empty() {
            return Err(Error::Domain("empty quad".into()));
        }
        let mut q = Self {
            width,
            height,
            inside,
            ring: Vec::new(),
            ring_pos: vec![None; n],
            walls: Vec::new(),
            marks: Vec::new(),
            mark_walls: Vec::new(),
            arc_of: vec![None; n],
            edges: Vec::new(),
            edge_right: vec![NONE; n],
            edge_up: vec![NONE; n],
        };
        q.check_connected()?;
        (q.ring, q.walls) = q.trace_ring(sites[0]);
        for (p, &s) in q.ring.iter().enumerate() {
            q.ring_pos[s].get_or_insert(p);
        }
        for s in 0..n {
            let (i, j) = q.coords(s);
            if q.contains(i as i64 + 1, j as i64) {
                q.edge_right[s] = q.edges.len() as u32;
                q.edges.push((s, s + 1));
            }
        }
        for s in 0..n {
            let (i, j) = q.coords(s);
            if q.contains(i as i64, j as i64 + 1) {
                q.edge_up[s] = q.edges.len() as u32;
                q.edges.push((s, s + width));
            }
        }
        q.set_marks(marks)?;
        Ok(q)
    }

    fn check_connected(&self) -> Result<()> {
        let start = (0..self.inside.len()).find(|&s| self.inside[s]).unwrap();
        let mut seen = vec![false; self.inside.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(s) = stack.pop() {
            count += 1;
            for t in self.neighbors(s) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        if count != self.inside.iter().filter(|&&b| b).count() {
            return Err(Error::Domain("quad mask is not connected".into()));
        }
        Ok(())
    }

    /// Counterclockwise walk along the outer boundary of the union of cells,
    /// recording the cell on the left of each boundary edge.
    fn trace_ring(&self, first: usize) -> (Vec<usize>, Vec<Wall>) {
        let (i0, j0) = self.coords(first);
        let start = ((i0 as i64, j0 as i64), (1i64, 0i64));
        let (mut c, mut d) = start;
        let mut ring = vec![first];
        let mut walls = vec![Wall { site: first, outward: (0, -1) }];
        loop {
            c = (c.0 + d.0, c.1 + d.1);
            let n = (-d.1, d.0);
            let ahead_right = self.cell_at(c, d, (-n.0, -n.1));
            let ahead_left = self.cell_at(c, d, n);
            d = if ahead_right {
                (-n.0, -n.1)
            } else if ahead_left {
                d
            } else {
                n
            };
            if (c, d) == start {
                break;
            }
            let n = (-d.1, d.0);
            let left = ((2 * c.0 + d.0 + n.0).div_euclid(2), (2 * c.1 + d.1 + n.1).div_euclid(2));
            let s = self.site(left.0 as usize, left.1 as usize);
            walls.push(Wall { site: s, outward: (d.1 as i8, -d.0 as i8) });
            if ring.last() != Some(&s) {
                ring.push(s);
            }
        }
        if ring.len() > 1 && ring.last() == ring.first() {
            ring.pop();
        }
        (ring, walls)
    }

    /// Whether the cell around c + (d + side)/2 is inside.
    fn cell_at(&self, c: (i64, i64), d: (i64, i64), side: (i64, i64)) -> bool {
        let x = (2 * c.0 + d.0 + side.0).div_euclid(2);
        let y = (2 * c.1 + d.1 + side.1).div_euclid(2);
        self.contains(x, y)
    }

    fn set_marks(&mut self, marks: &[(usize, usize)]) -> Result<()> {
        if marks.len() < 2 {
            return Err(Error::Domain("a quad needs at least two marks".into()));
        }
        let mut pos = Vec::with_capacity(marks.len());
        for &(i, j) in marks {
            if i >= self.width || j >= self.height || !self.inside[self.site(i, j)] {
                return Err(Error::Domain(format!("mark ({i},{j}) is not a site")));
            }
            let p = self.ring_pos[self.site(i, j)]
                .ok_or_else(|| Error::Domain(format!("mark ({i},{j}) is not on the boundary")))?;
            pos.push(p);
        }
        let l = self.ring.len();
        let total: usize = (0..pos.len()).map(|k| (pos[(k + 1) % pos.len()] + l - pos[k]) % l).sum();
        let distinct = (0..pos.len()).all(|k| pos[(k + 1) % pos.len()] != pos[k]);
        if !distinct || total != l {
            return Err(Error::Domain("marks must be distinct and in counterclockwise order".into()));
        }
        self.mark_walls = pos
            .iter()
            .map(|&p| {
                let s = self.ring[p];
                let mut w = self.walls.iter().position(|w| w.site == s).unwrap();
                while self.walls[(w + 1) % self.walls.len()].site == s {
                    w = (w + 1) % self.walls.len();
                }
                w
            })
            .collect();
        self.marks = pos;
        self.arc_of = vec![None; self.inside.len()];
        for a in 0..self.marks.len() {
            for s in self.arc(a) {
                self.arc_of[s].get_or_insert(a);
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of grid slots (`width * height`), including masked-out ones.
    pub fn slots(&self) -> usize {
        self.width * self.height
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.slots()).filter(|&s| self.inside[s])
    }

    pub fn site_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_rectangle(&self) -> bool {
        self.inside.iter().all(|&b| b)
    }

    pub fn site(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn coords(&self, s: usize) -> (usize, usize) {
        (s % self.width, s / self.width)
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.width
            && (j as usize) < self.height
            && self.inside[j as usize * self.width + i as usize]
    }

    pub fn is_inside(&self, s: usize) -> bool {
        self.inside[s]
    }

    /// Nearest-neighbour sites of s (right, up, left, down order).
    pub fn neighbors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(s);
        let (i, j) = (i as i64, j as i64);
        [(1, 0), (0, 1), (-1, 0), (0, -1)]
            .into_iter()
            .filter(move |&(di, dj)| self.contains(i + di, j + dj))
            .map(move |(di, dj)| ((j + dj) as usize) * self.width + (i + di) as usize)
    }

    /// Edges as site pairs: horizontal edges first, then vertical, each row-major.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_right_of(&self, s: usize) -> Option<usize> {
        (self.edge_right[s] != NONE).then_some(self.edge_right[s] as usize)
    }

    pub fn edge_above(&self, s: usize) -> Option<usize> {
        (self.edge_up[s] != NONE).then_some(self.edge_up[s] as usize)
    }

    /// Edge between two adjacent sites, if both are in the quad.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let (a, b) = (a.min(b), a.max(b));
        if b == a + 1 && self.coords(a).1 == self.coords(b).1 {
            self.edge_right_of(a)
        } else if b == a + self.width {
            self.edge_above(a)
        } else {
            None
        }
    }

    /// Edges incident to s with the site on the other end.
    pub fn incident(&self, s: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors(s).map(move |t| (self.edge_between(s, t).unwrap(), t))
    }

    /// Boundary sites in counterclockwise order.
    pub fn ring(&self) -> &[usize] {
        &self.ring
    }

    pub fn is_boundary(&self, s: usize) -> bool {
        self.ring_pos[s].is_some()
    }

    /// Ring positions of the marks.
    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    pub fn mark_site(&self, k: usize) -> usize {
        self.ring[self.marks[k]]
    }

    pub fn arc_count(&self) -> usize {
        self.marks.len()
    }

    /// Sites of arc k in ring order.
    pub fn arc(&self, k: usize) -> Vec<usize> {
        let l = self.ring.len();
        let from = self.marks[k];
        let to = self.marks[(k + 1) % self.marks.len()];
        let len = (to + l - from) % l;
        (0..len).map(|t| self.ring[(from + t) % l]).collect()
    }

    /// Boundary walls (cell sides on the outer boundary) in counterclockwise order.
    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    /// Walls of arc k. A mark at a convex corner gives the corner's earlier
    /// wall to the preceding arc, so the four arcs of a rectangle marked at its
    /// corners are exactly its four sides.
    pub fn arc_walls(&self, k: usize) -> Vec<Wall> {
        let l = self.walls.len();
        let from = self.mark_walls[k];
        let to = self.mark_walls[(k + 1) % self.marks.len()];
        let len = (to + l - from) % l;
        (0..len).map(|t| self.walls[(from + t) % l]).collect()
    }

    /// Arc containing boundary site s (first occurrence on the ring).
    pub fn arc_of(&self, s: usize) -> Option<usize> {
        self.arc_of[s]
    }
}

/// The side of cell `site` facing `outward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Wall {
    pub site: usize,
    pub outward: (i8, i8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinLabel {
    Plus,
    Minus,
    Free,
}

impl SpinLabel {
    pub fn frozen_spin(self) -> Option<i8> {
        match self {
            SpinLabel::Plus => Some(1),
            SpinLabel::Minus => Some(-1),
            SpinLabel::Free => None,
        }
    }
}

/// One label per arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinBoundaryCondition {
    pub labels: Vec<SpinLabel>,
}

impl SpinBoundaryCondition {
    pub fn new(labels: Vec<SpinLabel>) -> Self {
        Self { labels }
    }

    /// ⊕ on arc 0 (right side), ⊖ on arc 1, for [`LatticeQuad::dobrushin`].
    pub fn dobrushin() -> Self {
        Self::new(vec![SpinLabel::Plus, SpinLabel::Minus])
    }

    /// ⊖ on (x^L x^R) and (y^R y^L), ξ^R on (x^R y^R), ξ^L on (y^L x^L).
    pub fn alternating(xi_left: SpinLabel, xi_right: SpinLabel) -> Self {
        Self::new(vec![SpinLabel::Minus, xi_right, SpinLabel::Minus, xi_left])
    }

    pub fn validate(&self, q: &LatticeQuad) -> Result<()> {
        if self.labels.len() != q.arc_count() {
            return Err(Error::Domain(format!(
                "{} spin labels for a quad with {} arcs",
                self.labels.len(),
                q.arc_count()
            )));
        }
        Ok(())
    }

    /// Per-slot frozen spin (None for free sites and for slots outside the quad).
    pub fn frozen(&self, q: &LatticeQuad) -> Result<Vec<Option<i8>>> {
        self.validate(q)?;
        let mut out = vec![None; q.slots()];
        for s in q.sites() {
            if let Some(a) = q.arc_of(s) {
                out[s] = self.labels[a].frozen_spin();
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FkLabel {
    Wired,
    Free,
}

/// One label per arc plus the partition of wired arcs into blocks. All
/// boundary sites of the arcs in one block are identified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FkBoundaryCondition {
    pub labels: Vec<FkLabel>,
    pub blocks: Vec<Vec<usize>>,
}

impl FkBoundaryCondition {
    /// All wired arcs form a single block.
    pub fn new(labels: Vec<FkLabel>) -> Self {
        let wired: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] == FkLabel::Wired).collect();
        let blocks = if wired.is_empty() { Vec::new() } else { vec![wired] };
        Self { labels, blocks }
    }

    pub fn with_blocks(labels: Vec<FkLabel>, blocks: Vec<Vec<usize>>) -> Self {
        Self { labels, blocks }
    }

    pub fn free(arcs: usize) -> Self {
        Self::new(vec![FkLabel::Free; arcs])
    }

    /// Free on arc 0 (right side), wired on arc 1, for [`LatticeQuad::dobrushin`].
    pub fn dobrushin() -> Self {
        Self::new(vec![FkLabel::Free, FkLabel::Wired])
    }

    /// Free on (x^L x^R) and (y^R y^L), wired on the two sides; `joined`
    /// decides whether the two wired arcs are one block or two.
    pub fn alternating(joined: bool) -> Self {
        let labels = vec![FkLabel::Free, FkLabel::Wired, FkLabel::Free, FkLabel::Wired];
        let blocks = if joined { vec![vec![1, 3]] } else { vec![vec![1], vec![3]] };
        Self { labels, blocks }
    }

    pub fn validate(&self, q: &LatticeQuad) -> Result<()> {
        if self.labels.len() != q.arc_count() {
            return Err(Error::Domain(format!(
                "{} FK labels for a quad with {} arcs",
                self.labels.len(),
                q.arc_count()
            )));
        }
        let mut seen = vec![false; self.labels.len()];
        for b in &self.blocks {
            for &a in b {
                if a >= self.labels.len() || self.labels[a] != FkLabel::Wired || seen[a] {
                    return Err(Error::Domain(format!("wiring block {b:?} is not a set of distinct wired arcs")));
                }
                seen[a] = true;
            }
        }
        if (0..self.labels.len()).any(|a| self.labels[a] == FkLabel::Wired && !seen[a]) {
            return Err(Error::Domain("every wired arc must belong to a wiring block".into()));
        }
        Ok(())
    }

    /// Per-slot wiring block index.
    pub fn block_of(&self, q: &LatticeQuad) -> Result<Vec<Option<usize>>> {
        self.validate(q)?;
        let mut block_of_arc = vec![None; self.labels.len()];
        for (b, arcs) in self.blocks.iter().enumerate() {
            for &a in arcs {
                block_of_arc[a] = Some(b);
            }
        }
        let mut out = vec![None; q.slots()];
        for s in q.sites() {
            if let Some(a) = q.arc_of(s) {
                out[s] = block_of_arc[a];
            }
        }
        Ok(out)
    }
}

/// Spins per slot; 0 outside the quad.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinConfig {
    pub width: usize,
    pub height: usize,
    pub spins: Vec<i8>,
}

impl SpinConfig {
    pub fn filled(q: &LatticeQuad, spin: i8) -> Self {
        let spins = (0..q.slots()).map(|s| if q.is_inside(s) { spin } else { 0 }).collect();
        Self { width: q.width(), height: q.height(), spins }
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.spins[j * self.width + i]
    }

    /// Sum of spins over the given sites.
    pub fn magnetization(&self, sites: impl Iterator<Item = usize>) -> f64 {
        let (mut sum, mut n) = (0.0, 0usize);
        for s in sites {
            sum += self.spins[s] as f64;
            n += 1;
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Mirror image under i ↦ w−1−i.
    pub fn reflect_horizontal(&self) -> Self {
        let mut spins = self.spins.clone();
        for j in 0..self.height {
            for i in 0..self.width {
                spins[j * self.width + i] = self.spins[j * self.width + self.width - 1 - i];
            }
        }
        Self { width: self.width, height: self.height, spins }
    }

    pub fn flipped(&self) -> Self {
        Self { width: self.width, height: self.height, spins: self.spins.iter().map(|s| -s).collect() }
    }

    /// Whether the configuration agrees with every frozen arc of `bc`.
    pub fn agrees_with(&self, q: &LatticeQuad, bc: &SpinBoundaryCondition) -> Result<bool> {
        let frozen = bc.frozen(q)?;
        Ok(q.sites().all(|s| frozen[s].is_none_or(|f| f == self.spins[s])))
    }
}

/// Open/closed state per edge of the quad, in [`LatticeQuad::edges`] order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondConfig {
    pub width: usize,
    pub height: usize,
    pub open: Vec<bool>,
}

impl BondConfig {
    pub fn filled(q: &LatticeQuad, open: bool) -> Self {
        Self { width: q.width(), height: q.height(), open: vec![open; q.edge_count()] }
    }

    /// ω*(e*) = 1 − ω(e).
    pub fn dual_open(&self, e: usize) -> bool {
        !self.open[e]
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }
}

/// Union-find with path halving.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let g = self.parent[self.parent[x] as usize];
            self.parent[x] = g;
            x = g as usize;
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb) as u32;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_points() {
        assert!((beta_critical() - 0.440_686_793_509_771_5).abs() < 1e-15);
        assert!((bond_probability(beta_critical()) - p_critical(2.0)).abs() < 1e-15);
        assert_eq!(p_critical(1.0), 0.5);
    }

    #[test]
    fn rectangle_ring_and_arcs() {
        let q = LatticeQuad::rectangle(4, 3).unwrap();
        assert_eq!(q.ring().len(), 2 * 4 + 2 * 3 - 4);
        assert_eq!(q.ring()[0], 0);
        let coords: Vec<_> = q.ring().iter().map(|&s| q.coords(s)).collect();
        assert_eq!(&coords[..5], &[(0, 0), (1, 0), (2, 0), (3, 0), (3, 1)]);
        assert_eq!(q.arc(0).len(), 3);
        let total: usize = (0..4).map(|a| q.arc(a).len()).sum();
        assert_eq!(total, q.ring().len());
        assert_eq!(q.edge_count(), 3 * 3 + 4 * 2);
        assert!(!q.is_boundary(q.site(1, 1)));
        assert_eq!(q.walls().len(), 2 * 4 + 2 * 3);
        let sides: Vec<Vec<Wall>> = (0..4).map(|a| q.arc_walls(a)).collect();
        assert_eq!(sides.iter().map(|w| w.len()).collect::<Vec<_>>(), vec![4, 3, 4, 3]);
        assert!(sides[0].iter().all(|w| w.outward == (0, -1)));
        assert!(sides[1].iter().all(|w| w.outward == (1, 0)));
        assert!(sides[2].iter().all(|w| w.outward == (0, 1)));
        assert!(sides[3].iter().all(|w| w.outward == (-1, 0)));
    }

    #[test]
    fn dobrushin_marks_sit_at_middle() {
        let q = LatticeQuad::dobrushin(6, 4).unwrap();
        assert_eq!(q.coords(q.mark_site(0)), (3, 0));
        assert_eq!(q.coords(q.mark_site(1)), (2, 3));
        assert!(q.arc(0).iter().all(|&s| q.coords(s).0 >= 3));
        assert!(q.arc(1).iter().all(|&s| q.coords(s).0 <= 2));
    }

    #[test]
    fn l_shaped_mask_ring() {
        // 3×3 without its top-right site.
        let mut mask = vec![true; 9];
        mask[8] = false;
        let q = LatticeQuad::from_mask(3, 3, mask, &[(0, 0), (2, 0), (2, 1), (0, 2)]).unwrap();
        assert_eq!(q.ring().len(), 7);
        assert!(!q.is_boundary(4));
        assert_eq!(q.edge_count(), 10);
    }

    #[test]
    fn marks_out_of_order_are_rejected() {
        assert!(LatticeQuad::rectangle_with_marks(4, 4, &[(3, 0), (0, 0), (3, 3), (0, 3)]).is_err());
        assert!(LatticeQuad::rectangle_with_marks(4, 4, &[(1, 1), (0, 0)]).is_err());
    }

    #[test]
    fn frozen_and_blocks() {
        let q = LatticeQuad::rectangle(4, 4).unwrap();
        let bc = SpinBoundaryCondition::alternating(SpinLabel::Plus, SpinLabel::Free);
        let f = bc.frozen(&q).unwrap();
        assert_eq!(f[q.site(1, 0)], Some(-1));
        assert_eq!(f[q.site(3, 1)], None);
        assert_eq!(f[q.site(0, 2)], Some(1));
        assert_eq!(f[q.site(1, 1)], None);
        let fk = FkBoundaryCondition::alternating(false);
        let b = fk.block_of(&q).unwrap();
        assert_eq!(b[q.site(3, 1)], Some(0));
        assert_eq!(b[q.site(0, 2)], Some(1));
        assert!(FkBoundaryCondition::with_blocks(vec![FkLabel::Free; 4], vec![vec![0]]).validate(&q).is_err());
    }
}
