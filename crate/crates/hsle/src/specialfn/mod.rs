//! Special functions: Gamma, Gauss ₂F₁, the hSLE function F and the
//! elliptic rectangle map.

mod elliptic;
mod gamma;
mod hypergeom;

pub use elliptic::{rect_to_halfplane, rect_to_halfplane_with, sncndn, RectangleModulus};
pub use gamma::{gamma, rgamma};
pub use hypergeom::{
    gauss_2f1, gauss_2f1_at_one, gauss_2f1_continued, gauss_2f1_derivs, gauss_2f1_prime_at_one,
    gauss_2f1_series_limit, HypergeomParams, SERIES_MAX_TERMS,
};

use crate::error::{Error, Result};

/// Above this argument F′ is taken from the representation regular at z = 1.
pub const Z_SWITCH: f64 = 0.9;

/// F(z) = ₂F₁((2ρ+4)/κ, 1−4/κ; (2ρ+8)/κ; z), the function in the hSLE drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsleFunction {
    pub kappa: f64,
    pub rho: f64,
}

impl HsleFunction {
    pub fn new(kappa: f64, rho: f64) -> Result<Self> {
        let f = Self { kappa, rho };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let (k, r) = (self.kappa, self.rho);
        if !(k > 0.0 && k < 8.0) {
            return Err(Error::Domain(format!("kappa = {k} outside (0, 8)")));
        }
        let floor = (-4.0f64).max(k / 2.0 - 6.0);
        if !(r > floor) {
            return Err(Error::Domain(format!("rho = {r} must exceed {floor}")));
        }
        Ok(())
    }

    pub fn params(&self) -> HypergeomParams {
        let k = self.kappa;
        HypergeomParams::new((2.0 * self.rho + 4.0) / k, 1.0 - 4.0 / k, (2.0 * self.rho + 8.0) / k)
    }

    /// True when F ≡ 1 (ρ = −2 or κ = 4).
    pub fn is_trivial(&self) -> bool {
        self.rho == -2.0 || self.kappa == 4.0
    }

    /// F(1) by Gauss's summation.
    pub fn at_one(&self) -> Result<f64> {
        if self.is_trivial() {
            return Ok(1.0);
        }
        gauss_2f1_at_one(&self.params())
    }

    /// F(z) alone.
    pub fn value(&self, z: f64) -> Result<f64> {
        Ok(hsle_f(self, z)?.0)
    }

    /// F′ from the term-differentiated series (continued past 0.5).
    pub fn fprime_series(&self, z: f64) -> Result<f64> {
        if self.is_trivial() {
            return Ok(0.0);
        }
        Ok(gauss_2f1_derivs(&self.params(), z)?[1])
    }

    /// F′ from ((ρ+2)/(ρ+4))(1−4/κ)(1−z)^{8/κ−2}·₂F₁(4/κ, (12+2ρ)/κ−1; (8+2ρ)/κ+1; z).
    pub fn fprime_near_one(&self, z: f64) -> Result<f64> {
        if self.is_trivial() {
            return Ok(0.0);
        }
        let (k, r) = (self.kappa, self.rho);
        let inner = HypergeomParams::new(4.0 / k, (12.0 + 2.0 * r) / k - 1.0, (8.0 + 2.0 * r) / k + 1.0);
        let pref = (r + 2.0) / (r + 4.0) * (1.0 - 4.0 / k);
        Ok(pref * (1.0 - z).powf(8.0 / k - 2.0) * gauss_2f1_continued(&inner, z)?)
    }

    /// (F, F′, F″) for the ODE residual check.
    pub fn derivs(&self, z: f64) -> Result<[f64; 3]> {
        if self.is_trivial() {
            return Ok([1.0, 0.0, 0.0]);
        }
        gauss_2f1_derivs(&self.params(), z)
    }
}

/// (F(z), F′(z)) for z in [0, 1].
///
/// F′(1) is finite for κ < 4, zero for κ = 4 and +∞ for κ > 4.
pub fn hsle_f(f: &HsleFunction, z: f64) -> Result<(f64, f64)> {
    f.validate()?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("z = {z} outside [0, 1]")));
    }
    if f.is_trivial() {
        return Ok((1.0, 0.0));
    }
    let p = f.params();
    if z == 1.0 {
        return Ok((gauss_2f1_at_one(&p)?, gauss_2f1_prime_at_one(&p)?));
    }
    if z <= Z_SWITCH {
        let [v, d, _] = gauss_2f1_derivs(&p, z)?;
        Ok((v, d))
    } else {
        Ok((gauss_2f1_continued(&p, z)?, f.fprime_near_one(z)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID_K: [f64; 5] = [2.0, 3.0, 4.0, 16.0 / 3.0, 6.0];
    const GRID_R: [f64; 3] = [-1.5, 0.0, 1.0];

    #[test]
    fn degenerate_parameters_give_constant_one() {
        for &z in &[0.0, 0.3, 0.95, 1.0] {
            for &k in &[2.0, 3.0, 6.0] {
                assert_eq!(hsle_f(&HsleFunction::new(k, -2.0).unwrap(), z).unwrap(), (1.0, 0.0));
            }
            assert_eq!(hsle_f(&HsleFunction::new(4.0, 0.7).unwrap(), z).unwrap(), (1.0, 0.0));
        }
    }

    #[test]
    fn value_at_one_matches_reference_grid() {
        // F(1) for κ ∈ {2,3,16/3,6} and ρ ∈ {−1.5, 0, 1}, precomputed at 30 digits
        let table = [
            (2.0, [0.8, 0.5, 0.4]),
            (3.0, [0.912_617_874_639_634_3, 0.760_514_895_533_028_6, 0.7]),
            (16.0 / 3.0, [1.141_261_033_469_211_8, std::f64::consts::SQRT_2, 1.538_157_758_854_934]),
            (6.0, [1.259_921_049_894_873_2, 1.766_638_750_285_45, 2.0]),
        ];
        for (k, row) in table {
            for (r, want) in GRID_R.iter().zip(row) {
                let got = HsleFunction::new(k, *r).unwrap().at_one().unwrap();
                assert!((got - want).abs() < 1e-12, "kappa={k} rho={r}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn near_one_values() {
        let f = HsleFunction::new(6.0, 0.0).unwrap();
        assert!((f.value(0.999).unwrap() - 1.667_177_987_017_985_7).abs() < 1e-11);
        assert!((f.value(0.99999).unwrap() - 1.745_100_184_497_720_4).abs() < 1e-11);
        let f = HsleFunction::new(16.0 / 3.0, 0.0).unwrap();
        assert!((f.value(0.99999).unwrap() - 1.411_982_783_759_589_5).abs() < 1e-11);
    }

    #[test]
    fn derivative_reference_values() {
        let cases = [
            (3.0, 0.0, -0.382_818_480_901_203_6),
            (6.0, 0.0, 2.087_338_551_111_274_3),
            (16.0 / 3.0, 0.0, 1.168_173_050_047_825),
            (3.0, 1.0, -0.505_191_057_787_046_1),
        ];
        for (k, r, want) in cases {
            let (_, d) = hsle_f(&HsleFunction::new(k, r).unwrap(), 0.95).unwrap();
            assert!((d - want).abs() < 1e-10, "kappa={k} rho={r}: {d}");
        }
        let f = HsleFunction::new(3.0, 0.0).unwrap();
        let (v, d) = hsle_f(&f, 0.5).unwrap();
        assert!((v - 0.905_431_608_904_961_2).abs() < 1e-14);
        assert!((d + 0.218_280_807_694_596_9).abs() < 1e-14);
    }

    #[test]
    fn derivative_branches_agree() {
        for k in GRID_K {
            for r in GRID_R {
                let f = HsleFunction::new(k, r).unwrap();
                for &z in &[0.5, 0.8, 0.9, 0.97] {
                    let a = f.fprime_series(z).unwrap();
                    let b = f.fprime_near_one(z).unwrap();
                    assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "k={k} r={r} z={z}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn derivative_at_one_by_regime() {
        let (_, d) = hsle_f(&HsleFunction::new(3.0, 0.0).unwrap(), 1.0).unwrap();
        assert!(d.is_finite() && d < 0.0);
        let (_, d) = hsle_f(&HsleFunction::new(6.0, 0.0).unwrap(), 1.0).unwrap();
        assert_eq!(d, f64::INFINITY);
    }

    #[test]
    fn parameter_domain() {
        assert!(HsleFunction::new(8.0, 0.0).is_err());
        assert!(HsleFunction::new(3.0, -4.0).is_err());
        assert!(HsleFunction::new(6.0, -3.0).is_err());
        assert!(HsleFunction::new(6.0, -2.9).is_ok());
        assert!(hsle_f(&HsleFunction::new(3.0, 0.0).unwrap(), 1.1).is_err());
    }
}
