//! Hypergeometric SLE with marked points x < y, and how often it comes close
//! to [x, y].

use hsle::loewner::forward_trace_strided;
use hsle::rng::RngSeed;
use hsle::sde::{simulate_hsle, HsleParams, StepControl, StepRule};

fn main() -> hsle::Result<()> {
    for rho in [0.0, -1.4, -3.0] {
        let mut p = HsleParams::new(3.0, rho, 1.0, 2.0, 20.0, 3e-3);
        p.step = StepControl::new(3e-3, StepRule::ScaleFree);
        let (mut close, mut swallowed) = (0, 0);
        let n = 100;
        for k in 0..n {
            let run = simulate_hsle(&p, RngSeed::new(3, 0).replica(k))?;
            let stride = (run.path.len() / 400).max(1);
            let c = forward_trace_strided(&run.path, stride)?;
            swallowed += usize::from(run.t_x.is_some());
            close += usize::from(run.t_x.is_some() || c.distance_to_interval(1.0, 2.0) < 1e-2);
        }
        println!("rho = {rho:>5}: {close}/{n} within 1e-2 of [1, 2], {swallowed} swallowed x");
    }
    Ok(())
}
