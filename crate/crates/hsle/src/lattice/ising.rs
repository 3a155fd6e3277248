//! Ising samplers: checkerboard heat-bath and Swendsen–Wang.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{bond_probability, LatticeQuad, SpinBoundaryCondition, SpinConfig, UnionFind};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// A Markov chain for μ^τ_{β,Ω}: owns the configuration and its RNG stream.
#[derive(Debug, Clone)]
pub struct IsingSampler {
    quad: LatticeQuad,
    beta: f64,
    frozen: Vec<Option<i8>>,
    free_sites: [Vec<usize>; 2],
    spins: Vec<i8>,
    rng: ChaCha8Rng,
    /// P(σ = + | local field h) for h = −4..=4.
    heat: [f64; 9],
}

impl IsingSampler {
    /// Start from the all-minus configuration compatible with `bc`.
    pub fn new(q: &LatticeQuad, bc: &SpinBoundaryCondition, beta: f64, seed: RngSeed) -> Result<Self> {
        let frozen = bc.frozen(q)?;
        let init: Vec<i8> = frozen.iter().map(|f| f.unwrap_or(-1)).collect();
        Self::with_frozen(q, frozen, beta, seed, &SpinConfig { width: q.width(), height: q.height(), spins: init })
    }

    /// Chain on the configurations agreeing with `init` wherever `frozen`
    /// names a spin (which must be the spin of `init` there). Used for
    /// resampling inside a subdomain with the boundary induced by the rest.
    pub fn with_frozen(
        q: &LatticeQuad,
        frozen: Vec<Option<i8>>,
        beta: f64,
        seed: RngSeed,
        init: &SpinConfig,
    ) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("β must be finite and ≥ 0, got {beta}")));
        }
        if frozen.len() != q.slots() || init.spins.len() != q.slots() {
            return Err(Error::Domain("frozen mask or initial state does not match the quad".into()));
        }
        let mut spins = vec![0i8; q.slots()];
        let mut free_sites = [Vec::new(), Vec::new()];
        for s in q.sites() {
            if frozen[s].is_some_and(|f| f != init.spins[s]) || init.spins[s].abs() != 1 {
                return Err(Error::Domain(format!("initial state disagrees with the frozen spin at site {s}")));
            }
            spins[s] = init.spins[s];
            if frozen[s].is_none() {
                let (i, j) = q.coords(s);
                free_sites[(i + j) % 2].push(s);
            }
        }
        let mut heat = [0.0; 9];
        for (k, h) in heat.iter_mut().enumerate() {
            *h = 1.0 / (1.0 + (-2.0 * beta * (k as f64 - 4.0)).exp());
        }
        Ok(Self { quad: q.clone(), beta, frozen, free_sites, spins, rng: seed.rng(), heat })
    }

    pub fn quad(&self) -> &LatticeQuad {
        &self.quad
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn config(&self) -> SpinConfig {
        SpinConfig { width: self.quad.width(), height: self.quad.height(), spins: self.spins.clone() }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Replace the state; frozen sites must agree with the boundary condition.
    pub fn set_config(&mut self, cfg: &SpinConfig) -> Result<()> {
        if cfg.spins.len() != self.spins.len() {
            return Err(Error::Domain("configuration size does not match the quad".into()));
        }
        for s in self.quad.sites() {
            if self.frozen[s].is_some_and(|f| f != cfg.spins[s]) || cfg.spins[s].abs() != 1 {
                return Err(Error::Domain(format!("configuration disagrees with the boundary at site {s}")));
            }
        }
        self.spins.clone_from(&cfg.spins);
        Ok(())
    }

    fn field(&self, s: usize) -> i32 {
        self.quad.neighbors(s).map(|t| self.spins[t] as i32).sum()
    }

    /// P(σ_s = + | all other spins), the heat-bath probability.
    pub fn conditional_plus(&self, s: usize) -> f64 {
        self.heat[(self.field(s) + 4) as usize]
    }

    /// One heat-bath sweep: all free sites of one checkerboard colour, then
    /// the other.
    pub fn heat_bath_sweep(&mut self) {
        for colour in 0..2 {
            for k in 0..self.free_sites[colour].len() {
                let s = self.free_sites[colour][k];
                let p = self.conditional_plus(s);
                self.spins[s] = if self.rng.random::<f64>() < p { 1 } else { -1 };
            }
        }
    }

    /// One Swendsen–Wang update. Bonds join equal neighbours with probability
    /// 1 − e^{−2β}; clusters containing a frozen site keep their spin, the
    /// others get a fresh uniform spin.
    pub fn cluster_sweep(&mut self) {
        let p = bond_probability(self.beta);
        let n = self.quad.slots();
        let mut uf = UnionFind::new(n);
        for &(a, b) in self.quad.edges() {
            if self.spins[a] == self.spins[b] && self.rng.random::<f64>() < p {
                uf.union(a, b);
            }
        }
        // 0: undecided, 1: keep, 2: flip.
        let mut fate = vec![0u8; n];
        for s in self.quad.sites() {
            if self.frozen[s].is_some() {
                let r = uf.find(s);
                fate[r] = 1;
            }
        }
        for s in self.quad.sites() {
            let r = uf.find(s);
            if fate[r] == 0 {
                fate[r] = if self.rng.random::<bool>() { 2 } else { 1 };
            }
            if fate[r] == 2 {
                self.spins[s] = -self.spins[s];
            }
        }
    }

    pub fn run_heat_bath(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.heat_bath_sweep();
        }
    }

    pub fn run_cluster(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.cluster_sweep();
        }
    }

    /// −Σ σ_u σ_v over the edges of the quad (β not included).
    pub fn energy(&self) -> f64 {
        -self.quad.edges().iter().map(|&(a, b)| (self.spins[a] * self.spins[b]) as f64).sum::<f64>()
    }
}

/// Heat-bath chain from the all-minus-compatible start; returns the final state.
pub fn sample_ising(
    q: &LatticeQuad,
    bc: &SpinBoundaryCondition,
    beta: f64,
    sweeps: usize,
    seed: RngSeed,
) -> Result<SpinConfig> {
    let mut s = IsingSampler::new(q, bc, beta, seed)?;
    s.run_heat_bath(sweeps);
    Ok(s.config())
}

/// Swendsen–Wang chain from the all-minus-compatible start.
pub fn sample_ising_cluster(
    q: &LatticeQuad,
    bc: &SpinBoundaryCondition,
    beta: f64,
    sweeps: usize,
    seed: RngSeed,
) -> Result<SpinConfig> {
    let mut s = IsingSampler::new(q, bc, beta, seed)?;
    s.run_cluster(sweeps);
    Ok(s.config())
}
