//! The elementary vertical-slit map and compositions of it.

use num_complex::Complex64;

/// Points closer than this to ℝ are treated as boundary points.
pub const NEAR_REAL: f64 = 1e-12;

/// One step of a Loewner chain with constant driving value `w` over capacity time `dt`.
///
/// The map g(z) = w + √((z−w)² + 4dt) removes the slit [w, w + 2i√dt].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitStep {
    pub w: f64,
    pub dt: f64,
}

/// √(ζ² + s) on the branch taking ℍ into ℍ and agreeing in sign with ζ on ℝ.
fn branch_sqrt(zeta: Complex64, s: f64) -> Complex64 {
    let r = (zeta * zeta + s).sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re * zeta.re < 0.0) {
        -r
    } else {
        r
    }
}

/// Image and derivative of a real point under a composition of slit maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealImage {
    pub image: f64,
    pub derivative: f64,
    /// Index of the step at which the point first touched the driving value.
    pub swallowed: Option<usize>,
}

impl SlitStep {
    pub fn new(w: f64, dt: f64) -> Self {
        Self { w, dt }
    }

    fn c(&self) -> f64 {
        4.0 * self.dt
    }

    /// Tip of the slit, the preimage of `w`.
    pub fn tip(&self) -> Complex64 {
        Complex64::new(self.w, 2.0 * self.dt.sqrt())
    }

    /// g(z).
    pub fn map(&self, z: Complex64) -> Complex64 {
        let zeta = z - self.w;
        self.w + branch_sqrt(zeta, self.c())
    }

    /// g⁻¹(z), taking the closed half-plane onto the slit domain.
    pub fn inverse(&self, z: Complex64) -> Complex64 {
        let zeta = z - self.w;
        self.w + branch_sqrt(zeta, -self.c())
    }

    /// (g, g′, g″, g‴) at z.
    pub fn map_derivs(&self, z: Complex64) -> [Complex64; 4] {
        let zeta = z - self.w;
        let c = self.c();
        let r = branch_sqrt(zeta, c);
        let r2 = r * r;
        let r3 = r2 * r;
        [self.w + r, zeta / r, c / r3, -3.0 * c * zeta / (r3 * r2)]
    }

    /// g on the real line: returns (image, g′). A point at `w` goes to the
    /// right side of the slit base with derivative 0.
    pub fn map_real(&self, x: f64) -> (f64, f64) {
        let zeta = x - self.w;
        let r = (zeta * zeta + self.c()).sqrt();
        if zeta < 0.0 {
            (self.w - r, -zeta / r)
        } else {
            (self.w + r, zeta / r)
        }
    }
}

/// A finite composition g = g_n ∘ … ∘ g_1 of slit maps, earliest step innermost.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HullMapState {
    pub steps: Vec<SlitStep>,
    time: f64,
}

impl HullMapState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_steps(steps: Vec<SlitStep>) -> Self {
        let time = steps.iter().map(|s| s.dt).sum();
        Self { steps, time }
    }

    pub fn push(&mut self, step: SlitStep) {
        self.time += step.dt;
        self.steps.push(step);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Loewner time t = Σδt.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Half-plane capacity a(K) = 2t.
    pub fn capacity(&self) -> f64 {
        2.0 * self.time
    }

    /// g_t(z).
    pub fn map(&self, z: Complex64) -> Complex64 {
        self.steps.iter().fold(z, |acc, s| s.map(acc))
    }

    /// g_t⁻¹(z), i.e. f_1 ∘ … ∘ f_n applied to z.
    pub fn inverse(&self, z: Complex64) -> Complex64 {
        self.steps.iter().rev().fold(z, |acc, s| s.inverse(acc))
    }

    /// (g, g′, g″, g‴) by the chain rule through every step.
    pub fn map_derivs(&self, z: Complex64) -> [Complex64; 4] {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = [z, one, zero, zero];
        for s in &self.steps {
            let [h, h1, h2, h3] = s.map_derivs(acc[0]);
            let [_, d1, d2, d3] = acc;
            acc = [
                h,
                h1 * d1,
                h2 * d1 * d1 + h1 * d2,
                h3 * d1 * d1 * d1 + 3.0 * h2 * d1 * d2 + h1 * d3,
            ];
        }
        acc
    }

    /// Image and derivative of a real point; contact with the driving value
    /// pushes the point onto it (reflection) and records the step.
    pub fn map_real(&self, x: f64) -> RealImage {
        let mut image = x;
        let mut derivative = 1.0;
        let mut swallowed = None;
        let right = self.steps.first().is_none_or(|s| x >= s.w);
        for (k, s) in self.steps.iter().enumerate() {
            let (img, d, contact) = reflected_step(image, s.w, s.dt, right);
            if contact {
                swallowed.get_or_insert(k);
            }
            image = img;
            derivative *= d;
        }
        RealImage { image, derivative, swallowed }
    }
}

/// One slit step applied to a real point on the given side of the driving value.
///
/// If the driving value has jumped onto or past the point, the point is put at
/// the driving value first; it then leaves from the base of the slit on its own
/// side with derivative 0. Returns (image, derivative, contact).
pub fn reflected_step(x: f64, w: f64, dt: f64, right: bool) -> (f64, f64, bool) {
    let zeta = x - w;
    let contact = if right { zeta <= 0.0 } else { zeta >= 0.0 };
    let zeta = if contact { 0.0 } else { zeta };
    let r = (zeta * zeta + 4.0 * dt).sqrt();
    let image = if right { w + r } else { w - r };
    let derivative = if r > 0.0 { zeta.abs() / r } else { 1.0 };
    (image, derivative, contact)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn slit_map_sends_tip_to_driving_value() {
        let s = SlitStep::new(0.3, 0.25);
        assert!((s.map(s.tip()) - c(0.3, 0.0)).norm() < 1e-15);
        assert!((s.inverse(c(0.3, 0.0)) - s.tip()).norm() < 1e-15);
    }

    #[test]
    fn inverse_round_trip_in_half_plane() {
        let s = SlitStep::new(-0.4, 0.1);
        for &z in &[c(1.0, 0.01), c(-3.0, 2.0), c(-0.4, 5.0), c(0.2, 1e-9)] {
            let w = s.map(z);
            assert!(w.im >= 0.0);
            assert!((s.inverse(w) - z).norm() < 1e-12, "{z}");
        }
        // both sides of the base of the slit
        assert!(s.inverse(c(-0.5, 0.0)).im > 0.0);
        assert!(s.inverse(c(-0.3, 0.0)).im > 0.0);
    }

    #[test]
    fn real_images_keep_their_side() {
        let s = SlitStep::new(0.0, 1.0);
        assert!((s.map_real(3.0).0 - 13.0f64.sqrt()).abs() < 1e-15);
        assert!((s.map_real(-3.0).0 + 13.0f64.sqrt()).abs() < 1e-15);
        assert!((s.map(c(3.0, 0.0)).re - 13.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut h = HullMapState::new();
        h.push(SlitStep::new(0.1, 0.02));
        h.push(SlitStep::new(-0.2, 0.05));
        h.push(SlitStep::new(0.3, 0.01));
        let z = c(0.7, 0.9);
        let d = h.map_derivs(z);
        let e = 1e-4;
        let num1 = (h.map(z + e) - h.map(z - e)) / (2.0 * e);
        let num2 = (h.map(z + e) - 2.0 * h.map(z) + h.map(z - e)) / (e * e);
        assert!((d[0] - h.map(z)).norm() < 1e-15);
        assert!((d[1] - num1).norm() < 1e-7);
        assert!((d[2] - num2).norm() < 1e-5);
    }

    #[test]
    fn real_transport_with_reflection() {
        let h = HullMapState::from_steps(vec![SlitStep::new(0.0, 0.25), SlitStep::new(5.0, 0.25)]);
        let r = h.map_real(1.0);
        assert_eq!(r.swallowed, Some(1));
        assert_eq!(r.derivative, 0.0);
        assert!((r.image - 6.0).abs() < 1e-15);
        let l = h.map_real(-1.0);
        assert_eq!(l.swallowed, None);
        assert!(l.image < 0.0 && l.derivative > 0.0);
    }
}
