//! Critical Ising with Dobrushin boundary: interface, embedding and driving function.

use hsle::interfaces::{embed_interface, trace_spin_interface, TurnRule};
use hsle::lattice::{beta_critical, IsingSampler, LatticeQuad, SpinBoundaryCondition};
use hsle::loewner::extract_driving_coarse;
use hsle::rng::RngSeed;

fn main() -> hsle::Result<()> {
    let q = LatticeQuad::dobrushin(64, 64)?;
    let bc = SpinBoundaryCondition::dobrushin();
    let mut s = IsingSampler::new(&q, &bc, beta_critical(), RngSeed::new(6, 0))?;
    s.run_cluster(200);
    let path = trace_spin_interface(&q, &s.config(), 0, TurnRule::Left)?;
    let curve = embed_interface(&path, &q)?;
    let d = extract_driving_coarse(&curve, 1.0, 1e-2)?;
    println!("interface: {} steps; curve: {} vertices", path.len(), curve.len());
    println!("driving: {} points up to capacity {:.3}, W = {:.4}", d.len(), d.grid.horizon(), d.w[d.len() - 1]);
    Ok(())
}
