//! Driving function → curve → driving function.

use hsle::loewner::{extract_driving, forward_trace, write_curve_csv};
use hsle::rng::RngSeed;
use hsle::sde::simulate_sle;

fn main() -> hsle::Result<()> {
    let d = simulate_sle(4.0, 1.0, 1e-3, RngSeed::new(4, 0))?;
    let c = forward_trace(&d)?;
    println!("trace: {} vertices, tip {:.4}", c.len(), c.tip());
    let back = extract_driving(&c)?;
    let err = back.w.iter().zip(&d.w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("unzipped: capacity {:.6}, sup |W - W'| = {err:.2e}", back.grid.horizon());
    if let Some(path) = std::env::args().nth(1) {
        write_curve_csv(&c, std::fs::File::create(&path)?)?;
        println!("curve written to {path}");
    }
    Ok(())
}
