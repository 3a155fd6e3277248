//! Gibbs resampling of a pair of Ising interfaces under alternating boundary
//! conditions, from the two extreme starting pairs.

use hsle::lattice::{LatticeQuad, SpinBoundaryCondition, SpinLabel};
use hsle::resampler::{run_chain, PairState, ResampleParams, Side};
use hsle::rng::RngSeed;

fn main() -> hsle::Result<()> {
    let q = LatticeQuad::rectangle(24, 24)?;
    let bc = SpinBoundaryCondition::alternating(SpinLabel::Plus, SpinLabel::Plus);
    let params = ResampleParams::default();
    for side in [Side::Left, Side::Right] {
        let init = PairState::extreme(&q, &bc, side)?;
        let out = run_chain(&init, 60, 10, &params, RngSeed::new(8, 0))?;
        println!("start {side:?}: {:.2} attempts per step", out.mean_attempts());
        for (step, s) in &out.snapshots {
            let m = s.summary();
            println!("  step {step:>3}: D^L = {:.3}, D^R = {:.3}, width = {:.2}", m.d_left, m.d_right, m.width);
        }
    }
    Ok(())
}
