//! Exact distributions of tiny instances by direct summation of the weights.

use super::{BondConfig, FkBoundaryCondition, LatticeQuad, SpinBoundaryCondition, SpinConfig, UnionFind};
use crate::error::{Error, Result};

/// Default cap on the number of enumerated states.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

/// A normalized distribution over the states of `vars` (free sites or
/// edges). Bit k of a state index is the state of `vars[k]`: spin + or open.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    vars: Vec<usize>,
    probs: Vec<f64>,
}

impl ProbabilityTable {
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of_spins(&self, cfg: &SpinConfig) -> usize {
        self.vars.iter().enumerate().fold(0, |acc, (k, &s)| acc | (((cfg.spins[s] > 0) as usize) << k))
    }

    pub fn index_of_bonds(&self, cfg: &BondConfig) -> usize {
        self.vars.iter().enumerate().fold(0, |acc, (k, &e)| acc | ((cfg.open[e] as usize) << k))
    }

    /// Total variation distance between the table and the empirical law of `counts`.
    pub fn tv_distance(&self, counts: &[u64]) -> f64 {
        let n: u64 = counts.iter().sum();
        0.5 * self.probs.iter().zip(counts).map(|(p, &c)| (p - c as f64 / n as f64).abs()).sum::<f64>()
    }

    /// Total variation distance between two tables over the same variables.
    pub fn tv_to(&self, other: &ProbabilityTable) -> f64 {
        0.5 * self.probs.iter().zip(&other.probs).map(|(p, q)| (p - q).abs()).sum::<f64>()
    }

    /// Σ_state p(state) f(state).
    pub fn expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| p * f(i)).sum()
    }

    fn normalized(vars: Vec<usize>, mut weights: Vec<f64>) -> Self {
        let z: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= z;
        }
        Self { vars, probs: weights }
    }
}

fn state_count(bits: usize, cap: usize) -> Result<usize> {
    if bits >= usize::BITS as usize || (1usize << bits) > cap {
        return Err(Error::TooLarge { bits, cap });
    }
    Ok(1 << bits)
}

/// Boltzmann weights exp(β Σ σ_u σ_v) over the free sites.
pub fn enumerate_ising(q: &LatticeQuad, bc: &SpinBoundaryCondition, beta: f64, cap: usize) -> Result<ProbabilityTable> {
    let frozen = bc.frozen(q)?;
    let vars: Vec<usize> = q.sites().filter(|&s| frozen[s].is_none()).collect();
    let states = state_count(vars.len(), cap)?;
    let mut spins: Vec<i8> = (0..q.slots()).map(|s| frozen[s].unwrap_or(0)).collect();
    let mut log_w = Vec::with_capacity(states);
    for idx in 0..states {
        for (k, &s) in vars.iter().enumerate() {
            spins[s] = if idx >> k & 1 == 1 { 1 } else { -1 };
        }
        let e: i32 = q.edges().iter().map(|&(a, b)| (spins[a] * spins[b]) as i32).sum();
        log_w.push(beta * e as f64);
    }
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ProbabilityTable::normalized(vars, log_w.into_iter().map(|l| (l - top).exp()).collect()))
}

/// Number of clusters of ω with the wiring blocks of `block_of` identified.
pub(crate) fn cluster_count(q: &LatticeQuad, open: &[bool], block_of: &[Option<usize>], blocks: usize) -> usize {
    let n = q.slots();
    let mut uf = UnionFind::new(n + blocks);
    for (e, &(a, b)) in q.edges().iter().enumerate() {
        if open[e] {
            uf.union(a, b);
        }
    }
    for s in q.sites() {
        if let Some(b) = block_of[s] {
            uf.union(s, n + b);
        }
    }
    q.sites().filter(|&s| uf.find(s) == s).count()
        + (0..blocks).filter(|&b| uf.find(n + b) == n + b).count()
}

/// Random-cluster weights p^{o(ω)} (1−p)^{c(ω)} q^{k(ω^ξ)} over all edges.
pub fn enumerate_fk(
    q: &LatticeQuad,
    bc: &FkBoundaryCondition,
    p: f64,
    qcluster: f64,
    cap: usize,
) -> Result<ProbabilityTable> {
    let block_of = bc.block_of(q)?;
    let vars: Vec<usize> = (0..q.edge_count()).collect();
    let states = state_count(vars.len(), cap)?;
    let mut open = vec![false; q.edge_count()];
    let mut weights = Vec::with_capacity(states);
    for idx in 0..states {
        for (e, o) in open.iter_mut().enumerate() {
            *o = idx >> e & 1 == 1;
        }
        let o = idx.count_ones() as i32;
        let c = vars.len() as i32 - o;
        let k = cluster_count(q, &open, &block_of, bc.blocks.len()) as i32;
        weights.push(p.powi(o) * (1.0 - p).powi(c) * qcluster.powi(k));
    }
    Ok(ProbabilityTable::normalized(vars, weights))
}

/// Spin marginal of the Edwards–Sokal coupling at bond parameter p (q = 2):
/// draw ω from the FK measure, colour each cluster uniformly, except the
/// cluster of the (single) wiring block, which is coloured +. The variables
/// are the sites outside wired arcs, so the table is comparable with
/// [`enumerate_ising`] under ⊕ on the wired arcs and free elsewhere.
pub fn edwards_sokal_marginal(q: &LatticeQuad, bc: &FkBoundaryCondition, p: f64, cap: usize) -> Result<ProbabilityTable> {
    if bc.blocks.len() > 1 {
        return Err(Error::Domain("Edwards–Sokal marginal supports at most one wiring block".into()));
    }
    let fk = enumerate_fk(q, bc, p, 2.0, cap)?;
    let block_of = bc.block_of(q)?;
    let vars: Vec<usize> = q.sites().filter(|&s| block_of[s].is_none()).collect();
    let mut out = vec![0.0; state_count(vars.len(), cap)?];
    let n = q.slots();
    let mut open = vec![false; q.edge_count()];
    for (idx, &w) in fk.probs().iter().enumerate() {
        for (e, o) in open.iter_mut().enumerate() {
            *o = idx >> e & 1 == 1;
        }
        let mut uf = UnionFind::new(n + 1);
        for (e, &(a, b)) in q.edges().iter().enumerate() {
            if open[e] {
                uf.union(a, b);
            }
        }
        for s in q.sites() {
            if block_of[s].is_some() {
                uf.union(s, n);
            }
        }
        let wired_root = uf.find(n);
        let roots: Vec<usize> = vars.iter().map(|&s| uf.find(s)).collect();
        let mut free_roots: Vec<usize> = roots.iter().cloned().filter(|&r| r != wired_root).collect();
        free_roots.sort_unstable();
        free_roots.dedup();
        let colourings = 1usize << free_roots.len();
        for col in 0..colourings {
            let mut state = 0usize;
            for (k, r) in roots.iter().enumerate() {
                let plus = *r == wired_root || col >> free_roots.binary_search(r).unwrap() & 1 == 1;
                state |= (plus as usize) << k;
            }
            out[state] += w / colourings as f64;
        }
    }
    Ok(ProbabilityTable { vars, probs: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{beta_critical, bond_probability, p_critical, FkLabel, SpinLabel};

    #[test]
    fn single_free_spin_is_logistic() {
        let q = LatticeQuad::rectangle(3, 3).unwrap();
        let bc = SpinBoundaryCondition::alternating(SpinLabel::Plus, SpinLabel::Plus);
        let beta = 0.37;
        let t = enumerate_ising(&q, &bc, beta, 16).unwrap();
        assert_eq!(t.vars(), &[4]);
        // Neighbours of the centre: (1,0) ⊖, (2,1) ⊕, (1,2) ⊖, (0,1) ⊕.
        assert!((t.probs()[1] - 0.5).abs() < 1e-15);
        let bc = SpinBoundaryCondition::new(vec![SpinLabel::Plus; 4]);
        let t = enumerate_ising(&q, &bc, beta, 16).unwrap();
        assert!((t.probs()[1] - 1.0 / (1.0 + (-8.0 * beta).exp())).abs() < 1e-15);
    }

    #[test]
    fn single_edge_fk() {
        // Fully wired 2×2: both ends of every edge are identified, Δk = 0.
        let q = LatticeQuad::rectangle(2, 2).unwrap();
        let p = 0.3;
        let t = enumerate_fk(&q, &FkBoundaryCondition::new(vec![FkLabel::Wired; 4]), p, 2.0, 16).unwrap();
        let marginal: f64 = (0..16).filter(|i| i & 1 == 1).map(|i| t.probs()[i]).sum();
        assert!((marginal - p).abs() < 1e-14);
        // Free 2×2: edge 0 is open with probability p/(p + (1−p)q) given the
        // other three edges closed (its ends then sit in different clusters).
        let t = enumerate_fk(&q, &FkBoundaryCondition::free(4), p, 2.0, 16).unwrap();
        let cond = t.probs()[1] / (t.probs()[0] + t.probs()[1]);
        assert!((cond - p / (p + (1.0 - p) * 2.0)).abs() < 1e-14);
    }

    #[test]
    fn percolation_is_product_measure() {
        let q = LatticeQuad::rectangle(2, 3).unwrap();
        let t = enumerate_fk(&q, &FkBoundaryCondition::alternating(true), 0.4, 1.0, 1 << 12).unwrap();
        for (i, &pr) in t.probs().iter().enumerate() {
            let o = i.count_ones() as i32;
            assert!((pr - 0.4f64.powi(o) * 0.6f64.powi(7 - o)).abs() < 1e-15);
        }
    }

    #[test]
    fn edwards_sokal_spin_marginal_is_ising() {
        let beta = beta_critical();
        let p = bond_probability(beta);
        assert!((p - p_critical(2.0)).abs() < 1e-15);
        let q = LatticeQuad::rectangle(2, 2).unwrap();
        let es = edwards_sokal_marginal(&q, &FkBoundaryCondition::free(4), p, 16).unwrap();
        let is = enumerate_ising(&q, &SpinBoundaryCondition::new(vec![SpinLabel::Free; 4]), beta, 16).unwrap();
        assert!(es.tv_to(&is) < 1e-12);
        let q = LatticeQuad::rectangle(3, 3).unwrap();
        let fk = FkBoundaryCondition::new(vec![FkLabel::Wired, FkLabel::Free, FkLabel::Free, FkLabel::Free]);
        let ising = SpinBoundaryCondition::new(vec![SpinLabel::Plus, SpinLabel::Free, SpinLabel::Free, SpinLabel::Free]);
        let es = edwards_sokal_marginal(&q, &fk, p, 1 << 12).unwrap();
        let is = enumerate_ising(&q, &ising, beta, 1 << 12).unwrap();
        assert_eq!(es.vars(), is.vars());
        assert!(es.tv_to(&is) < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let q = LatticeQuad::rectangle(5, 5).unwrap();
        let bc = SpinBoundaryCondition::new(vec![SpinLabel::Free; 4]);
        assert!(matches!(enumerate_ising(&q, &bc, 0.1, 1 << 20), Err(Error::TooLarge { bits: 25, .. })));
    }
}
