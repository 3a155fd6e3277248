//! Random-cluster samplers: single-edge heat-bath for any q ≥ 1 and the
//! Edwards–Sokal cluster chain for q = 2.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{BondConfig, FkBoundaryCondition, LatticeQuad, UnionFind};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

#[derive(Debug, Clone)]
pub struct FkSampler {
    quad: LatticeQuad,
    p: f64,
    q: f64,
    block_of: Vec<Option<usize>>,
    block_sites: Vec<Vec<usize>>,
    open: Vec<bool>,
    rng: ChaCha8Rng,
    // Scratch space for connectivity queries.
    seen: Vec<u32>,
    epoch: u32,
}

impl FkSampler {
    /// Starts from the all-closed configuration.
    pub fn new(quad: &LatticeQuad, bc: &FkBoundaryCondition, p: f64, q: f64, seed: RngSeed) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(q >= 1.0) || !q.is_finite() {
            return Err(Error::Domain(format!("need p ∈ [0,1] and q ≥ 1, got p = {p}, q = {q}")));
        }
        let block_of = bc.block_of(quad)?;
        let mut block_sites = vec![Vec::new(); bc.blocks.len()];
        for s in quad.sites() {
            if let Some(b) = block_of[s] {
                block_sites[b].push(s);
            }
        }
        Ok(Self {
            quad: quad.clone(),
            p,
            q,
            block_of,
            block_sites,
            open: vec![false; quad.edge_count()],
            rng: seed.rng(),
            seen: vec![0; quad.slots()],
            epoch: 0,
        })
    }

    pub fn config(&self) -> BondConfig {
        BondConfig { width: self.quad.width(), height: self.quad.height(), open: self.open.clone() }
    }

    pub fn set_config(&mut self, cfg: &BondConfig) -> Result<()> {
        if cfg.open.len() != self.open.len() {
            return Err(Error::Domain("bond configuration size does not match the quad".into()));
        }
        self.open.clone_from(&cfg.open);
        Ok(())
    }

    /// Whether a and b are joined in ω without edge `skip`, with the wiring
    /// blocks identified.
    fn connected_without(&mut self, a: usize, b: usize, skip: usize) -> bool {
        if a == b {
            return true;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.seen.iter_mut().for_each(|v| *v = 0);
            self.epoch = 1;
        }
        let mut used_block = vec![false; self.block_sites.len()];
        let mut queue = VecDeque::from([a]);
        self.seen[a] = self.epoch;
        while let Some(s) = queue.pop_front() {
            if let Some(bk) = self.block_of[s] {
                if !used_block[bk] {
                    used_block[bk] = true;
                    for &t in &self.block_sites[bk] {
                        if self.seen[t] != self.epoch {
                            if t == b {
                                return true;
                            }
                            self.seen[t] = self.epoch;
                            queue.push_back(t);
                        }
                    }
                }
            }
            for (e, t) in self.quad.incident(s) {
                if e != skip && self.open[e] && self.seen[t] != self.epoch {
                    if t == b {
                        return true;
                    }
                    self.seen[t] = self.epoch;
                    queue.push_back(t);
                }
            }
        }
        false
    }

    /// P(ω_e = 1 | the other edges).
    pub fn conditional_open(&mut self, e: usize) -> f64 {
        let (a, b) = self.quad.edges()[e];
        if self.connected_without(a, b, e) {
            self.p
        } else {
            self.p / (self.p + (1.0 - self.p) * self.q)
        }
    }

    pub fn update_edge(&mut self, e: usize) {
        let pr = if self.q == 1.0 { self.p } else { self.conditional_open(e) };
        self.open[e] = self.rng.random::<f64>() < pr;
    }

    /// One heat-bath update of every edge in index order.
    pub fn heat_bath_sweep(&mut self) {
        for e in 0..self.open.len() {
            self.update_edge(e);
        }
    }

    /// Heat-bath update of `n` uniformly chosen edges.
    pub fn random_updates(&mut self, n: usize) {
        let m = self.open.len();
        for _ in 0..n {
            let e = self.rng.random_range(0..m);
            self.update_edge(e);
        }
    }

    /// One Edwards–Sokal step (q = 2 only): colour the clusters of ω with
    /// independent fair signs, then open each edge between equal spins with
    /// probability p. Returns the spins of the intermediate colouring.
    pub fn cluster_sweep(&mut self) -> Result<Vec<i8>> {
        if self.q != 2.0 {
            return Err(Error::Domain("the Edwards–Sokal chain needs q = 2".into()));
        }
        let n = self.quad.slots();
        let blocks = self.block_sites.len();
        let mut uf = UnionFind::new(n + blocks);
        for (e, &(a, b)) in self.quad.edges().iter().enumerate() {
            if self.open[e] {
                uf.union(a, b);
            }
        }
        for s in self.quad.sites() {
            if let Some(bk) = self.block_of[s] {
                uf.union(s, n + bk);
            }
        }
        let mut colour = vec![0i8; n + blocks];
        let mut spins = vec![0i8; n];
        for s in self.quad.sites() {
            let r = uf.find(s);
            if colour[r] == 0 {
                colour[r] = if self.rng.random::<bool>() { 1 } else { -1 };
            }
            spins[s] = colour[r];
        }
        for (e, &(a, b)) in self.quad.edges().iter().enumerate() {
            self.open[e] = spins[a] == spins[b] && self.rng.random::<f64>() < self.p;
        }
        Ok(spins)
    }
}

/// Heat-bath chain from the all-closed start; `sweeps` full passes over the edges.
pub fn sample_fk(
    q: &LatticeQuad,
    bc: &FkBoundaryCondition,
    p: f64,
    qcluster: f64,
    sweeps: usize,
    seed: RngSeed,
) -> Result<BondConfig> {
    let mut s = FkSampler::new(q, bc, p, qcluster, seed)?;
    for _ in 0..sweeps {
        s.heat_bath_sweep();
    }
    Ok(s.config())
}

/// Edwards–Sokal chain (q = 2) from the all-closed start.
pub fn sample_fk_cluster(
    q: &LatticeQuad,
    bc: &FkBoundaryCondition,
    p: f64,
    sweeps: usize,
    seed: RngSeed,
) -> Result<BondConfig> {
    let mut s = FkSampler::new(q, bc, p, 2.0, seed)?;
    for _ in 0..sweeps {
        s.cluster_sweep()?;
    }
    Ok(s.config())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_fk, p_critical, FkLabel};

    #[test]
    fn p_one_opens_everything() {
        let q = LatticeQuad::rectangle(4, 3).unwrap();
        let cfg = sample_fk(&q, &FkBoundaryCondition::free(4), 1.0, 2.0, 2, RngSeed::new(1, 0)).unwrap();
        assert_eq!(cfg.open_count(), q.edge_count());
        for e in 0..q.edge_count() {
            assert!(!cfg.dual_open(e));
        }
    }

    #[test]
    fn heat_bath_matches_exact_conditional() {
        let q = LatticeQuad::rectangle(3, 3).unwrap();
        let bc = FkBoundaryCondition::alternating(false);
        let (p, qc) = (p_critical(2.0), 2.0);
        let table = enumerate_fk(&q, &bc, p, qc, 1 << 12).unwrap();
        let mut s = FkSampler::new(&q, &bc, p, qc, RngSeed::new(2, 2)).unwrap();
        for _ in 0..30 {
            s.heat_bath_sweep();
            for e in 0..q.edge_count() {
                let mut cfg = s.config();
                cfg.open[e] = true;
                let on = table.probs()[table.index_of_bonds(&cfg)];
                cfg.open[e] = false;
                let off = table.probs()[table.index_of_bonds(&cfg)];
                assert!((s.conditional_open(e) - on / (on + off)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cluster_chain_matches_enumeration() {
        let q = LatticeQuad::rectangle(2, 3).unwrap();
        let bc = FkBoundaryCondition::new(vec![FkLabel::Free, FkLabel::Wired, FkLabel::Free, FkLabel::Wired]);
        let p = p_critical(2.0);
        let table = enumerate_fk(&q, &bc, p, 2.0, 1 << 12).unwrap();
        let mut s = FkSampler::new(&q, &bc, p, 2.0, RngSeed::new(4, 1)).unwrap();
        let mut counts = vec![0u64; table.probs().len()];
        for _ in 0..200_000 {
            s.cluster_sweep().unwrap();
            counts[table.index_of_bonds(&s.config())] += 1;
        }
        assert!(table.tv_distance(&counts) < 0.02);
    }
}
