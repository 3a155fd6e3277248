//! The hSLE martingale M = Z^a J^b F(Z) along SLE_κ paths: its mean at a
//! bounded stopping time stays at M₀.

use hsle::observables::{guard_index, zj_path, HsleMartingaleSpec};
use hsle::rng::RngSeed;
use hsle::sde::{simulate_sle_marked, StepControl, StepRule};

fn main() -> hsle::Result<()> {
    let spec = HsleMartingaleSpec::new(3.0, 0.0, 1.0, 2.0)?;
    let n = 2000;
    let mut sum = 0.0;
    for k in 0..n {
        let d = simulate_sle_marked(
            3.0,
            &[("x", 1.0), ("y", 2.0)],
            1.0,
            StepControl::new(1e-3, StepRule::Capped),
            RngSeed::new(5, 0).replica(k),
        )?;
        let zj = zj_path(&d)?;
        if let Some((z, j)) = zj[guard_index(&zj, 100.0)] {
            sum += spec.value(z, j)?;
        }
    }
    println!("M0 = {:.5}, mean of M at the guard time = {:.5} ({n} paths)", spec.m0()?, sum / n as f64);
    println!("M0 / F(1) = {:.5}", spec.poisson_mean()?);
    Ok(())
}
