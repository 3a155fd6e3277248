//! Gibbs resampling of a pair of Ising interfaces under alternating boundary
//! conditions, restricted to pairs whose extremal distances stay above ε.
//!
//! Rectangle marks are the corners x^L (0), x^R (1), y^R (2), y^L (3) in
//! counterclockwise order; arc 0 is (x^L x^R), arc 1 is (x^R y^R), arc 2 is
//! (y^R y^L) and arc 3 is (y^L x^L). η^L starts at x^L with ⊕ on its left and
//! turns left at ambiguities; η^R starts at x^R with ⊖ on its left and turns
//! right.

use std::collections::{HashSet, VecDeque};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interfaces::{extremal_distance_in, trace_spin_interface, InterfacePath, TurnRule};
use crate::lattice::{
    beta_critical, sample_conditioned, IsingSampler, LatticeQuad, SpinBoundaryCondition, SpinConfig,
};
use crate::rng::RngSeed;

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const REJECTION_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleParams {
    pub epsilon: f64,
    pub beta: f64,
    /// Swendsen–Wang sweeps per resampling attempt.
    pub sweeps: usize,
    pub budget: usize,
}

impl Default for ResampleParams {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON, beta: beta_critical(), sweeps: 5, budget: REJECTION_BUDGET }
    }
}

/// Scalar summaries of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub d_left: f64,
    pub d_right: f64,
    /// Number of interior cells between the two interfaces per interior row.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub quad: LatticeQuad,
    pub bc: SpinBoundaryCondition,
    pub config: SpinConfig,
    pub left: InterfacePath,
    pub right: InterfacePath,
    pub d_left: f64,
    pub d_right: f64,
}

impl PairState {
    /// Traces both interfaces of `config` and measures the distances.
    /// Fails with `NoInterface` unless η^L runs x^L → y^L and η^R runs
    /// x^R → y^R without a common edge.
    pub fn new(q: &LatticeQuad, bc: &SpinBoundaryCondition, config: SpinConfig) -> Result<Self> {
        if q.marks().len() != 4 || bc.labels.len() != 4 {
            return Err(Error::Domain("a pair needs a quad with four marks".into()));
        }
        if !config.agrees_with(q, bc)? {
            return Err(Error::Domain("configuration disagrees with the boundary condition".into()));
        }
        let left = trace_spin_interface(q, &config, 0, TurnRule::Left)?;
        let right = trace_spin_interface(q, &config, 1, TurnRule::Right)?;
        if left.end_mark != Some(3) || right.end_mark != Some(2) {
            return Err(Error::NoInterface("no vertical ⊖ crossing".into()));
        }
        let edges = |p: &InterfacePath| -> HashSet<((i64, i64), (i64, i64))> {
            p.vertices.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect()
        };
        if !edges(&left).is_disjoint(&edges(&right)) {
            return Err(Error::NoInterface("the interfaces share an edge".into()));
        }
        let d_left =
            extremal_distance_in(q, None, &left.cut_edges(q), &left.side_walls(q, true), &q.arc_walls(1))?.value;
        let d_right =
            extremal_distance_in(q, None, &right.cut_edges(q), &right.side_walls(q, false), &q.arc_walls(3))?.value;
        Ok(Self { quad: q.clone(), bc: bc.clone(), config, left, right, d_left, d_right })
    }

    pub fn satisfies(&self, epsilon: f64) -> bool {
        self.d_left >= epsilon && self.d_right >= epsilon
    }

    pub fn summary(&self) -> PairSummary {
        let q = &self.quad;
        let right_of_left = component(q, &self.left.cut_edges(q), &q.arc(1));
        let left_of_right = component(q, &self.right.cut_edges(q), &q.arc(3));
        let between = q.sites().filter(|&s| !q.is_boundary(s) && right_of_left[s] && left_of_right[s]).count();
        let rows = q.height().saturating_sub(2).max(1);
        PairSummary { d_left: self.d_left, d_right: self.d_right, width: between as f64 / rows as f64 }
    }

    /// The pair with a single ⊖ column at x = 1 (leftmost) or x = w − 2
    /// (rightmost) and ⊕ elsewhere off the boundary arcs.
    pub fn extreme(q: &LatticeQuad, bc: &SpinBoundaryCondition, side: Side) -> Result<Self> {
        let frozen = bc.frozen(q)?;
        let col = match side {
            Side::Left => 1,
            Side::Right => q.width() - 2,
        };
        let mut cfg = SpinConfig::filled(q, 1);
        for s in q.sites() {
            cfg.spins[s] = frozen[s].unwrap_or(if q.coords(s).0 == col { -1 } else { 1 });
        }
        Self::new(q, bc, cfg)
    }
}

/// Sites reachable from `seeds` without crossing an edge of `cut`.
fn component(q: &LatticeQuad, cut: &[usize], seeds: &[usize]) -> Vec<bool> {
    let mut is_cut = vec![false; q.edge_count()];
    for &e in cut {
        is_cut[e] = true;
    }
    let mut seen = vec![false; q.slots()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for (e, t) in q.incident(s) {
            if !is_cut[e] && !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub side: Side,
    pub attempts: usize,
    pub d_left: f64,
    pub d_right: f64,
    pub width: f64,
    pub seed: String,
}

fn digest(seed: RngSeed) -> String {
    format!("{:016x}/{:x}", seed.seed, seed.stream)
}

/// One step of the ε-chain: picks a side uniformly, freezes every cell read
/// by the other interface together with everything beyond it, and resamples
/// the rest by Swendsen–Wang from the current state until the new pair is
/// in X₀^ε. Each attempt restarts from the current state.
pub fn gibbs_step(s: &PairState, params: &ResampleParams, seed: RngSeed) -> Result<(PairState, StepRecord)> {
    let mut rng = seed.derive(1).rng();
    let side = if rng.random::<bool>() { Side::Left } else { Side::Right };
    let q = &s.quad;
    let (fixed, arc) = match side {
        Side::Left => (&s.right, 3),
        Side::Right => (&s.left, 1),
    };
    let inside = component(q, &fixed.cut_edges(q), &q.arc(arc));
    let mut frozen = s.bc.frozen(q)?;
    for c in fixed.inspected_cells(q) {
        frozen[c] = Some(s.config.spins[c]);
    }
    for site in q.sites() {
        if !inside[site] {
            frozen[site] = Some(s.config.spins[site]);
        }
    }
    let mut sampler = IsingSampler::with_frozen(q, frozen, params.beta, seed, &s.config)?;
    let accepted = sample_conditioned(
        params.budget,
        |_| {
            sampler.set_config(&s.config)?;
            sampler.run_cluster(params.sweeps);
            match PairState::new(q, &s.bc, sampler.config()) {
                Ok(p) => Ok(Some(p)),
                Err(Error::NoInterface(_)) => Ok(None),
                Err(e) => Err(e),
            }
        },
        |p| Ok(p.as_ref().is_some_and(|p| p.satisfies(params.epsilon))),
    )?;
    let next = accepted.config.expect("accepted states are pairs");
    let sm = next.summary();
    let record = StepRecord {
        step: 0,
        side,
        attempts: accepted.attempts,
        d_left: sm.d_left,
        d_right: sm.d_right,
        width: sm.width,
        seed: digest(seed),
    };
    Ok((next, record))
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    /// (step, state) every `thin` steps, starting with the initial state.
    pub snapshots: Vec<(usize, PairState)>,
    pub records: Vec<StepRecord>,
}

impl ChainOutput {
    pub fn summaries(&self) -> Vec<PairSummary> {
        self.snapshots.iter().map(|(_, p)| p.summary()).collect()
    }

    pub fn mean_attempts(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.attempts as f64).sum::<f64>() / self.records.len() as f64
    }

    /// JSON lines, one record per snapshot.
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        for (step, p) in &self.snapshots {
            let sm = p.summary();
            let rec = self.records.iter().find(|r| r.step == *step);
            let line = serde_json::json!({
                "step": step,
                "side": rec.map(|r| r.side),
                "attempts": rec.map(|r| r.attempts),
                "d_left": sm.d_left,
                "d_right": sm.d_right,
                "width": sm.width,
                "seed": rec.map(|r| r.seed.clone()),
            });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Runs `steps` Gibbs steps from `init`, keeping every `thin`-th state.
pub fn run_chain(
    init: &PairState,
    steps: usize,
    thin: usize,
    params: &ResampleParams,
    seed: RngSeed,
) -> Result<ChainOutput> {
    if !init.satisfies(params.epsilon) {
        return Err(Error::Domain(format!(
            "initial pair has D = ({}, {}) below ε = {}",
            init.d_left, init.d_right, params.epsilon
        )));
    }
    let thin = thin.max(1);
    let mut state = init.clone();
    let mut snapshots = vec![(0, init.clone())];
    let mut records = Vec::with_capacity(steps);
    for k in 1..=steps {
        let (next, mut rec) = gibbs_step(&state, params, seed.replica(k as u64))?;
        rec.step = k;
        records.push(rec);
        state = next;
        if k % thin == 0 {
            snapshots.push((k, state.clone()));
        }
    }
    Ok(ChainOutput { snapshots, records })
}

/// Direct sampler of the conditioned law: a Swendsen–Wang chain for the
/// whole quad, read every `thin` sweeps after `burn_in`, keeping the states
/// in X₀^ε. Fails when `budget` consecutive readings are rejected.
pub fn sample_pairs_direct(
    q: &LatticeQuad,
    bc: &SpinBoundaryCondition,
    params: &ResampleParams,
    n: usize,
    burn_in: usize,
    thin: usize,
    seed: RngSeed,
) -> Result<Vec<PairState>> {
    let mut sampler = IsingSampler::new(q, bc, params.beta, seed)?;
    sampler.run_cluster(burn_in);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let accepted = sample_conditioned(
            params.budget,
            |_| {
                sampler.run_cluster(thin.max(1));
                match PairState::new(q, bc, sampler.config()) {
                    Ok(p) => Ok(Some(p)),
                    Err(Error::NoInterface(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            },
            |p| Ok(p.as_ref().is_some_and(|p| p.satisfies(params.epsilon))),
        )?;
        out.push(accepted.config.expect("accepted states are pairs"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SpinLabel;

    fn setup(n: usize) -> (LatticeQuad, SpinBoundaryCondition) {
        (LatticeQuad::rectangle(n, n).unwrap(), SpinBoundaryCondition::alternating(SpinLabel::Plus, SpinLabel::Plus))
    }

    #[test]
    fn extreme_pairs_are_valid() {
        let (q, bc) = setup(16);
        let l = PairState::extreme(&q, &bc, Side::Left).unwrap();
        let r = PairState::extreme(&q, &bc, Side::Right).unwrap();
        assert_eq!(l.summary().width, 1.0);
        assert_eq!(r.summary().width, 1.0);
        // two columns between the left side and η^R, plus the boundary rows
        // beneath it: a little more than 2/16
        assert!(l.d_right > 2.0 / 16.0 && l.d_right < 2.5 / 16.0, "{}", l.d_right);
        assert!((r.d_left - l.d_right).abs() < 1e-6, "{} vs {}", r.d_left, l.d_right);
        assert!(l.satisfies(DEFAULT_EPSILON) && r.satisfies(DEFAULT_EPSILON));
    }

    #[test]
    fn zero_steps_returns_the_initial_state() {
        let (q, bc) = setup(12);
        let init = PairState::extreme(&q, &bc, Side::Left).unwrap();
        let out = run_chain(&init, 0, 1, &ResampleParams::default(), RngSeed::new(1, 0)).unwrap();
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].1, init);
        assert!(out.records.is_empty());
    }

    #[test]
    fn steps_keep_the_frozen_interface_and_the_restriction() {
        let (q, bc) = setup(16);
        let init = PairState::extreme(&q, &bc, Side::Left).unwrap();
        // ε at the current D^R: the retry loop must keep D^R ≥ ε
        let params = ResampleParams { epsilon: init.d_right, ..Default::default() };
        let mut s = init;
        for k in 0..40 {
            let (next, rec) = gibbs_step(&s, &params, RngSeed::new(3, k)).unwrap();
            assert!(next.satisfies(params.epsilon));
            match rec.side {
                Side::Left => assert_eq!(next.right, s.right),
                Side::Right => assert_eq!(next.left, s.left),
            }
            assert!(rec.attempts >= 1);
            s = next;
        }
    }

    #[test]
    fn log_has_one_line_per_snapshot() {
        let (q, bc) = setup(12);
        let init = PairState::extreme(&q, &bc, Side::Right).unwrap();
        let params = ResampleParams { epsilon: 0.01, ..Default::default() };
        let out = run_chain(&init, 6, 2, &params, RngSeed::new(2, 0)).unwrap();
        let mut buf = Vec::new();
        out.write_log(&mut buf).unwrap();
        let lines: Vec<serde_json::Value> =
            String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3]["step"], 6);
        assert!(lines[0]["side"].is_null());
    }

    #[test]
    fn direct_sampler_respects_the_restriction() {
        let (q, bc) = setup(16);
        let params = ResampleParams::default();
        let pairs = sample_pairs_direct(&q, &bc, &params, 20, 20, 2, RngSeed::new(4, 0)).unwrap();
        assert!(pairs.iter().all(|p| p.satisfies(params.epsilon)));
    }
}
