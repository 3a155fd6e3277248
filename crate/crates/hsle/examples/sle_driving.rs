//! Driving functions of SLE_κ and SLE_κ(ρ), and the variance slope of W_t.

use hsle::harness::stats::variance_slope;
use hsle::rng::RngSeed;
use hsle::sde::{simulate_sle, simulate_sle_rho, ForcePoint, SleParams, StepControl, StepRule};

fn main() -> hsle::Result<()> {
    let kappa = 3.0;
    let times: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
    let paths: Vec<Vec<f64>> = (0..400)
        .map(|k| {
            let d = simulate_sle(kappa, 1.0, 1e-3, RngSeed::new(1, 0).replica(k))?;
            Ok(times.iter().map(|t| d.w[(t * 1000.0).round() as usize]).collect())
        })
        .collect::<hsle::Result<_>>()?;
    let fit = variance_slope(&paths, &times)?;
    println!("SLE_{kappa}: slope {:.3} ± {:.3}", fit.slope, fit.std_error);

    // SLE_κ(ρ) with a repelling force point at 1
    let p = SleParams {
        kappa,
        force: vec![ForcePoint::right(1.0, 2.0)],
        horizon: 1.0,
        step: StepControl::new(1e-3, StepRule::Capped),
    };
    let (d, stop) = simulate_sle_rho(&p, RngSeed::new(2, 0))?;
    let v = &d.tracks[0].values;
    println!("SLE_{kappa}(2): {} steps, stop {stop:?}, W_T = {:.4}, V_T = {:.4}", d.len(), d.w[d.len() - 1], v[v.len() - 1]);
    Ok(())
}
