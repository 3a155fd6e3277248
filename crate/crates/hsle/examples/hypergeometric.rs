//! F(z) = ₂F₁((2ρ+4)/κ, 1−4/κ; (2ρ+8)/κ; z) on [0, 1] and its value at 1.

use hsle::specialfn::{gauss_2f1_series_limit, HsleFunction};

fn main() -> hsle::Result<()> {
    let (kappa, rho) = (3.0, 0.0);
    let f = HsleFunction::new(kappa, rho)?;
    println!("kappa = {kappa}, rho = {rho}, (a, b, c) = {:?}", f.params());
    for z in [0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999] {
        let [v, d1, d2] = f.derivs(z)?;
        println!("z = {z:<6} F = {v:.12}  F' = {d1:.6}  F'' = {d2:.6}");
    }
    let gauss = f.at_one()?;
    let series = gauss_2f1_series_limit(&f.params(), 100_000)?;
    println!("F(1): Gauss {gauss:.12}, series {series:.12}");
    Ok(())
}
