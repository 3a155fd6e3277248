//! Crossing events and rejection sampling on them.
//!
//! Dual vertices are the faces of the grid: face (i, j) has the sites (i, j),
//! (i+1, j), (i, j+1), (i+1, j+1) at its corners, for i ∈ [−1, w−1] and
//! j ∈ [−1, h−1]. A face with a corner outside the quad is an outer face. The
//! dual arc of a set of boundary sites is the set of outer faces whose inside
//! corners all lie in the set.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{BondConfig, LatticeQuad, SpinConfig, UnionFind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum Config<'a> {
    Spin(&'a SpinConfig),
    Bond(&'a BondConfig),
}

/// Crossing events between boundary arcs, given by arc index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingEvent {
    /// The whole event space.
    Always,
    /// A nearest-neighbour path of sites carrying `spin`.
    Spin { from: usize, to: usize, spin: i8 },
    /// A path of open edges.
    Open { from: usize, to: usize },
    /// A path of dual-open edges between the dual arcs.
    Dual { from: usize, to: usize },
    /// Two vertex-disjoint dual-open paths between the dual arcs.
    TwoDisjointDual { from: usize, to: usize },
}

/// Whether a nearest-neighbour path of `spin` sites joins `from` to `to`.
pub fn spin_crossing(q: &LatticeQuad, cfg: &SpinConfig, from: &[usize], to: &[usize], spin: i8) -> bool {
    let mut uf = UnionFind::new(q.slots());
    for &(a, b) in q.edges() {
        if cfg.spins[a] == spin && cfg.spins[b] == spin {
            uf.union(a, b);
        }
    }
    joined(&mut uf, from.iter().filter(|&&s| cfg.spins[s] == spin), to.iter().filter(|&&s| cfg.spins[s] == spin))
}

/// Whether an open path joins a site of `from` to a site of `to`.
pub fn bond_crossing(q: &LatticeQuad, cfg: &BondConfig, from: &[usize], to: &[usize]) -> bool {
    let mut uf = UnionFind::new(q.slots());
    for (e, &(a, b)) in q.edges().iter().enumerate() {
        if cfg.open[e] {
            uf.union(a, b);
        }
    }
    joined(&mut uf, from.iter(), to.iter())
}

fn joined<'a>(uf: &mut UnionFind, from: impl Iterator<Item = &'a usize>, to: impl Iterator<Item = &'a usize>) -> bool {
    let mut roots: Vec<usize> = from.map(|&s| uf.find(s)).collect();
    roots.sort_unstable();
    to.map(|&s| uf.find(s)).any(|r| roots.binary_search(&r).is_ok())
}

struct DualGraph {
    faces: usize,
    adj: Vec<Vec<usize>>,
}

fn face_index(q: &LatticeQuad, i: i64, j: i64) -> usize {
    ((j + 1) as usize) * (q.width() + 1) + (i + 1) as usize
}

fn dual_graph(q: &LatticeQuad, cfg: &BondConfig) -> DualGraph {
    let faces = (q.width() + 1) * (q.height() + 1);
    let mut adj = vec![Vec::new(); faces];
    for (e, &(a, b)) in q.edges().iter().enumerate() {
        if cfg.open[e] {
            continue;
        }
        let (i, j) = q.coords(a);
        let (i, j) = (i as i64, j as i64);
        let (f, g) = if b == a + 1 {
            (face_index(q, i, j - 1), face_index(q, i, j))
        } else {
            (face_index(q, i - 1, j), face_index(q, i, j))
        };
        adj[f].push(g);
        adj[g].push(f);
    }
    DualGraph { faces, adj }
}

/// Outer faces whose inside corners all belong to `sites`.
pub(crate) fn dual_arc(q: &LatticeQuad, sites: &[usize]) -> Vec<usize> {
    let mut member = vec![false; q.slots()];
    for &s in sites {
        member[s] = true;
    }
    let mut out = Vec::new();
    for &s in sites {
        let (i, j) = q.coords(s);
        let (i, j) = (i as i64, j as i64);
        for (fi, fj) in [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)] {
            let corners = [(fi, fj), (fi + 1, fj), (fi, fj + 1), (fi + 1, fj + 1)];
            let outer = corners.iter().any(|&(x, y)| !q.contains(x, y));
            let owned = corners
                .iter()
                .filter(|&&(x, y)| q.contains(x, y))
                .all(|&(x, y)| member[q.site(x as usize, y as usize)]);
            if outer && owned {
                out.push(face_index(q, fi, fj));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Whether a dual-open path joins the dual arcs of `from` and `to`.
pub fn dual_crossing(q: &LatticeQuad, cfg: &BondConfig, from: &[usize], to: &[usize]) -> bool {
    disjoint_dual_crossings(q, cfg, from, to, 1) >= 1
}

/// Number of vertex-disjoint dual-open paths between the dual arcs of `from`
/// and `to`, counted up to `cap` (unit-capacity max-flow on split faces).
pub fn disjoint_dual_crossings(q: &LatticeQuad, cfg: &BondConfig, from: &[usize], to: &[usize], cap: usize) -> usize {
    let g = dual_graph(q, cfg);
    let (src, dst) = (dual_arc(q, from), dual_arc(q, to));
    let mut net = FlowNet::new(2 * g.faces + 2);
    let (source, sink) = (2 * g.faces, 2 * g.faces + 1);
    for f in 0..g.faces {
        net.add(2 * f, 2 * f + 1, 1);
        for &h in &g.adj[f] {
            net.add(2 * f + 1, 2 * h, 1);
        }
    }
    for &f in &src {
        net.add(source, 2 * f, 1);
    }
    for &f in &dst {
        net.add(2 * f + 1, sink, 1);
    }
    let mut flow = 0;
    while flow < cap && net.augment(source, sink) {
        flow += 1;
    }
    flow
}

/// Residual network with unit capacities.
struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u8>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        Self { head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add(&mut self, a: usize, b: usize, c: u8) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut prev = vec![usize::MAX; self.head.len()];
        let mut queue = VecDeque::from([s]);
        prev[s] = usize::MAX - 1;
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &e in &self.head[v] {
                let w = self.to[e];
                if self.cap[e] > 0 && prev[w] == usize::MAX {
                    prev[w] = e;
                    queue.push_back(w);
                }
            }
        }
        if prev[t] == usize::MAX {
            return false;
        }
        let mut v = t;
        while v != s {
            let e = prev[v];
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            v = self.to[e ^ 1];
        }
        true
    }
}

/// Evaluates `event` on a configuration of the matching type.
pub fn crossing_event(q: &LatticeQuad, cfg: Config<'_>, event: &CrossingEvent) -> Result<bool> {
    let arc = |k: usize| -> Result<Vec<usize>> {
        if k >= q.arc_count() {
            return Err(Error::Domain(format!("arc {k} out of range")));
        }
        Ok(q.arc(k))
    };
    match (event, cfg) {
        (CrossingEvent::Always, _) => Ok(true),
        (CrossingEvent::Spin { from, to, spin }, Config::Spin(c)) => Ok(spin_crossing(q, c, &arc(*from)?, &arc(*to)?, *spin)),
        (CrossingEvent::Open { from, to }, Config::Bond(c)) => Ok(bond_crossing(q, c, &arc(*from)?, &arc(*to)?)),
        (CrossingEvent::Dual { from, to }, Config::Bond(c)) => Ok(dual_crossing(q, c, &arc(*from)?, &arc(*to)?)),
        (CrossingEvent::TwoDisjointDual { from, to }, Config::Bond(c)) => {
            Ok(disjoint_dual_crossings(q, c, &arc(*from)?, &arc(*to)?, 2) >= 2)
        }
        _ => Err(Error::Domain(format!("event {event:?} does not apply to this configuration type"))),
    }
}

/// An accepted draw with its rejection statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedSample<C> {
    pub config: C,
    pub attempts: usize,
}

impl<C> ConditionedSample<C> {
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.attempts as f64
    }
}

/// Rejection sampling: calls `draw` with the attempt number until `accept`
/// holds. Fails with the rule-of-three bound 3/budget on the acceptance rate
/// after `budget` rejections.
pub fn sample_conditioned<C>(
    budget: usize,
    mut draw: impl FnMut(usize) -> Result<C>,
    mut accept: impl FnMut(&C) -> Result<bool>,
) -> Result<ConditionedSample<C>> {
    for attempt in 0..budget {
        let c = draw(attempt)?;
        if accept(&c)? {
            return Ok(ConditionedSample { config: c, attempts: attempt + 1 });
        }
    }
    Err(Error::BudgetExhausted { budget, rate_bound: 3.0 / budget as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_fk, FkBoundaryCondition};
    use crate::rng::RngSeed;
    use rand::Rng;

    #[test]
    fn monochrome_and_checkerboard() {
        let q = LatticeQuad::rectangle(2, 6).unwrap();
        let minus = SpinConfig::filled(&q, -1);
        assert!(crossing_event(&q, Config::Spin(&minus), &CrossingEvent::Spin { from: 0, to: 2, spin: -1 }).unwrap());
        assert!(!crossing_event(&q, Config::Spin(&minus), &CrossingEvent::Spin { from: 0, to: 2, spin: 1 }).unwrap());
        let mut chk = minus.clone();
        for s in q.sites() {
            let (i, j) = q.coords(s);
            chk.spins[s] = if (i + j) % 2 == 0 { 1 } else { -1 };
        }
        for spin in [-1, 1] {
            assert!(!crossing_event(&q, Config::Spin(&chk), &CrossingEvent::Spin { from: 0, to: 2, spin }).unwrap());
        }
    }

    #[test]
    fn dual_crossings_of_extreme_configs() {
        let q = LatticeQuad::rectangle(5, 5).unwrap();
        let closed = BondConfig::filled(&q, false);
        let open = BondConfig::filled(&q, true);
        assert_eq!(disjoint_dual_crossings(&q, &closed, &q.arc(0), &q.arc(2), 10), 3);
        assert_eq!(disjoint_dual_crossings(&q, &open, &q.arc(0), &q.arc(2), 10), 0);
        assert!(bond_crossing(&q, &open, &q.arc(1), &q.arc(3)));
        assert!(!bond_crossing(&q, &closed, &q.arc(1), &q.arc(3)));
    }

    #[test]
    fn primal_and_dual_crossings_are_complementary() {
        // Exactly one of "open left–right" and "dual-open bottom–top" occurs
        // when the arcs are the full sides.
        let q = LatticeQuad::rectangle(6, 5).unwrap();
        let left: Vec<usize> = (0..5).map(|j| q.site(0, j)).collect();
        let right: Vec<usize> = (0..5).map(|j| q.site(5, j)).collect();
        let bottom: Vec<usize> = (0..6).map(|i| q.site(i, 0)).collect();
        let top: Vec<usize> = (0..6).map(|i| q.site(i, 4)).collect();
        let mut rng = RngSeed::new(8, 0).rng();
        for _ in 0..300 {
            let open: Vec<bool> = (0..q.edge_count()).map(|_| rng.random::<bool>()).collect();
            let cfg = BondConfig { width: 6, height: 5, open };
            let lr = bond_crossing(&q, &cfg, &left, &right);
            let bt = dual_crossing(&q, &cfg, &bottom, &top);
            assert_ne!(lr, bt);
        }
    }

    #[test]
    fn percolation_crossing_frequency_matches_enumeration() {
        let q = LatticeQuad::rectangle(3, 4).unwrap();
        let table = enumerate_fk(&q, &FkBoundaryCondition::free(4), 0.5, 1.0, 1 << 20).unwrap();
        let exact: f64 = (0..table.probs().len())
            .map(|i| {
                let open = (0..q.edge_count()).map(|e| i >> e & 1 == 1).collect();
                let cfg = BondConfig { width: 3, height: 4, open };
                if bond_crossing(&q, &cfg, &q.arc(3), &q.arc(1)) {
                    table.probs()[i]
                } else {
                    0.0
                }
            })
            .sum();
        let mut rng = RngSeed::new(1, 7).rng();
        let n = 20_000;
        let hits = (0..n)
            .filter(|_| {
                let open = (0..q.edge_count()).map(|_| rng.random::<f64>() < 0.5).collect();
                bond_crossing(&q, &BondConfig { width: 3, height: 4, open }, &q.arc(3), &q.arc(1))
            })
            .count();
        let est = hits as f64 / n as f64;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((est - exact).abs() < 3.0 * se, "{est} vs {exact}");
    }

    #[test]
    fn rejection_budget() {
        let r = sample_conditioned(5, Ok, |_| Ok(true)).unwrap();
        assert_eq!(r.attempts, 1);
        let e = sample_conditioned(5, Ok, |_| Ok(false)).unwrap_err();
        assert!(matches!(e, Error::BudgetExhausted { budget: 5, .. }));
    }
}
