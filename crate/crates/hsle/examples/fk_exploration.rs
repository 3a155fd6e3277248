//! Critical FK-Ising with wired/free boundary: the exploration path and the loops.

use hsle::interfaces::{fk_loops, trace_fk_exploration};
use hsle::lattice::{p_critical, FkBoundaryCondition, FkSampler, LatticeQuad};
use hsle::rng::RngSeed;

fn main() -> hsle::Result<()> {
    let q = LatticeQuad::dobrushin(48, 48)?;
    let bc = FkBoundaryCondition::dobrushin();
    let mut s = FkSampler::new(&q, &bc, p_critical(2.0), 2.0, RngSeed::new(7, 0))?;
    for _ in 0..200 {
        s.cluster_sweep()?;
    }
    let cfg = s.config();
    let path = trace_fk_exploration(&q, &cfg, &bc)?;
    let loops = fk_loops(&q, &cfg, &bc, &path)?;
    let longest = loops.iter().map(|l| l.len()).max().unwrap_or(0);
    println!("open edges: {}/{}", cfg.open_count(), q.edge_count());
    println!("exploration path: {} medial steps; {} loops, longest {longest}", path.len(), loops.len());
    Ok(())
}
