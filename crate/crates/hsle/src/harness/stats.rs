//! Statistics for the experiments: KS tests, Wilson intervals, the variance
//! slope fit, batch means and the two-chain diagnostic. Pass/fail decisions
//! are stored as [`Check`]s so a report can be re-evaluated from its numbers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// How a check turns its numbers into pass/fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    /// |estimate − target| ≤ k · std_error.
    WithinSe { target: f64, k: f64 },
    /// estimate ≥ target − k · std_error.
    NotBelow { target: f64, k: f64 },
    /// |estimate − target| ≤ tol.
    AbsTol { target: f64, tol: f64 },
    /// |estimate − target| ≤ tol · |target|.
    RelTol { target: f64, tol: f64 },
    /// p_value > alpha.
    PAbove { alpha: f64 },
    AtMost { bound: f64 },
    AtLeast { bound: f64 },
    Between { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    #[serde(flatten)]
    pub rule: Rule,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, estimate: f64, rule: Rule) -> Self {
        let mut c =
            Self { name: name.into(), estimate, std_error: None, statistic: None, p_value: None, rule, pass: false };
        c.pass = c.evaluate();
        c
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self.pass = self.evaluate();
        self
    }

    pub fn with_test(mut self, statistic: f64, p_value: f64) -> Self {
        self.statistic = Some(statistic);
        self.p_value = Some(p_value);
        self.pass = self.evaluate();
        self
    }

    /// Recomputes pass/fail from the recorded numbers.
    pub fn evaluate(&self) -> bool {
        let e = self.estimate;
        let se = self.std_error.unwrap_or(f64::NAN);
        let ok = match self.rule {
            Rule::WithinSe { target, k } => (e - target).abs() <= k * se,
            Rule::NotBelow { target, k } => e >= target - k * se,
            Rule::AbsTol { target, tol } => (e - target).abs() <= tol,
            Rule::RelTol { target, tol } => (e - target).abs() <= tol * target.abs(),
            Rule::PAbove { alpha } => self.p_value.is_some_and(|p| p > alpha),
            Rule::AtMost { bound } => e <= bound,
            Rule::AtLeast { bound } => e >= bound,
            Rule::Between { lo, hi } => lo <= e && e <= hi,
        };
        ok && e.is_finite()
    }

    pub fn describe(&self) -> String {
        let se = self.std_error.map(|s| format!(" ± {s:.3e}")).unwrap_or_default();
        let p = self.p_value.map(|p| format!(", p = {p:.3e}")).unwrap_or_default();
        let rule = match self.rule {
            Rule::WithinSe { target, k } => format!("within {k} SE of {target:.6}"),
            Rule::NotBelow { target, k } => format!("≥ {target:.6} − {k} SE"),
            Rule::AbsTol { target, tol } => format!("within {tol:e} of {target:.6}"),
            Rule::RelTol { target, tol } => format!("within {:.0}% of {target:.4}", 100.0 * tol),
            Rule::PAbove { alpha } => format!("p > {alpha}"),
            Rule::AtMost { bound } => format!("≤ {}", num(bound)),
            Rule::AtLeast { bound } => format!("≥ {}", num(bound)),
            Rule::Between { lo, hi } => format!("in [{lo}, {hi}]"),
        };
        format!("{}: {}{se}{p} ({rule})", self.name, num(self.estimate))
    }
}

fn num(x: f64) -> String {
    if x != 0.0 && !(1e-3..1e6).contains(&x.abs()) {
        format!("{x:.3e}")
    } else {
        format!("{x:.6}")
    }
}

/// Sample mean and its standard error.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (m, f64::NAN);
    }
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Mean and batch-means standard error for a correlated series.
pub fn batch_mean_se(x: &[f64], batches: usize) -> (f64, f64) {
    let size = x.len() / batches.max(1);
    if size == 0 || batches < 2 {
        return mean_se(x);
    }
    let means: Vec<f64> = x.chunks_exact(size).take(batches).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    (x.iter().sum::<f64>() / x.len() as f64, mean_se(&means).1)
}

/// Wilson score interval for k successes in n trials at `z` standard deviations.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Q_KS(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}, the Kolmogorov tail.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as usize % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

const KS_MIN: usize = 20;

fn sorted(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN in sample".into()));
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov test: exact statistic, asymptotic p-value
/// with the effective size n_e = n m / (n + m).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    let need = a.len().min(b.len());
    if need < KS_MIN {
        return Err(Error::TooFewSamples { need: KS_MIN, got: need });
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let p = kolmogorov_tail((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d);
    Ok(KsTest { statistic: d, p_value: p })
}

/// One-sample KS test against a continuous distribution function.
pub fn ks_one_sample(x: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsTest> {
    if x.len() < KS_MIN {
        return Err(Error::TooFewSamples { need: KS_MIN, got: x.len() });
    }
    let v = sorted(x)?;
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let p = kolmogorov_tail((n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d);
    Ok(KsTest { statistic: d, p_value: p })
}

/// KS test of normality after standardizing by the sample mean and standard
/// deviation. The fitted parameters make the plain KS p-value conservative.
pub fn ks_normal(x: &[f64]) -> Result<KsTest> {
    let (m, se) = mean_se(x);
    let sd = se * (x.len() as f64).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Domain("degenerate sample".into()));
    }
    let n = Normal::new(m, sd).map_err(|e| Error::Domain(e.to_string()))?;
    ks_one_sample(x, |v| n.cdf(v))
}

/// p-value of Pearson's χ² test that `counts` come from equal cell probabilities.
pub fn chi_square_uniform(counts: &[u64]) -> Result<f64> {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    if k < 2 || total == 0 {
        return Err(Error::TooFewSamples { need: 2, got: k });
    }
    let e = total as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let chi = ChiSquared::new((k - 1) as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(1.0 - chi.cdf(stat))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSlope {
    pub slope: f64,
    pub std_error: f64,
    /// 95% normal interval.
    pub ci: (f64, f64),
    pub variances: Vec<f64>,
}

/// Least squares of Var(W_t) against t through the origin. `paths[i][k]` is
/// W at `times[k]` on path i. The standard error accounts for the
/// covariance of the sample variances at different times (same paths).
pub fn variance_slope(paths: &[Vec<f64>], times: &[f64]) -> Result<VarianceSlope> {
    if times.len() < 3 {
        return Err(Error::TooFewSamples { need: 3, got: times.len() });
    }
    if paths.len() < 200 {
        return Err(Error::TooFewSamples { need: 200, got: paths.len() });
    }
    if paths.iter().any(|p| p.len() != times.len()) {
        return Err(Error::Domain("every path needs one value per time".into()));
    }
    let n = paths.len() as f64;
    let k = times.len();
    let means: Vec<f64> = (0..k).map(|j| paths.iter().map(|p| p[j]).sum::<f64>() / n).collect();
    let dev: Vec<Vec<f64>> = paths.iter().map(|p| (0..k).map(|j| p[j] - means[j]).collect()).collect();
    let var: Vec<f64> = (0..k).map(|j| dev.iter().map(|d| d[j] * d[j]).sum::<f64>() / (n - 1.0)).collect();
    let tt: f64 = times.iter().map(|t| t * t).sum();
    let slope = times.iter().zip(&var).map(|(t, v)| t * v).sum::<f64>() / tt;
    // Cov(s_i², s_j²) ≈ (E[d_i² d_j²] − σ_i² σ_j²)/n
    let mut var_slope = 0.0;
    for i in 0..k {
        for j in 0..k {
            let m22 = dev.iter().map(|d| d[i] * d[i] * d[j] * d[j]).sum::<f64>() / n;
            var_slope += times[i] * times[j] * (m22 - var[i] * var[j]) / n;
        }
    }
    let se = var_slope.max(0.0).sqrt() / tt;
    Ok(VarianceSlope { slope, std_error: se, ci: (slope - 1.96 * se, slope + 1.96 * se), variances: var })
}

/// Potential scale reduction factor √(V̂/W) of several chains of equal length.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Result<f64> {
    let m = chains.len();
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    if m < 2 || n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: m.min(n) });
    }
    let nf = n as f64;
    let stats: Vec<(f64, f64)> = chains
        .iter()
        .map(|c| {
            let (mean, se) = mean_se(&c[..n]);
            (mean, se * se * nf)
        })
        .collect();
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m as f64;
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m as f64;
    let b = nf * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    if w == 0.0 {
        return Ok(if b == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let v = (nf - 1.0) / nf * w + b / nf;
    Ok((v / w).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, RngSeed};
    use rand::Rng;

    #[test]
    fn identical_samples() {
        let a: Vec<f64> = (0..50).map(|k| (k as f64).sin()).collect();
        let t = ks_two_sample(&a, &a).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        assert!(matches!(ks_two_sample(&a[..10], &a), Err(Error::TooFewSamples { need: 20, got: 10 })));
    }

    #[test]
    fn shifted_uniforms_are_separated() {
        let mut r = RngSeed::new(1, 0).rng();
        let a: Vec<f64> = (0..1000).map(|_| r.random::<f64>()).collect();
        let b: Vec<f64> = (0..1000).map(|_| 0.5 + r.random::<f64>()).collect();
        let t = ks_two_sample(&a, &b).unwrap();
        assert!(t.p_value < 1e-6, "{t:?}");
        assert!((t.statistic - 0.5).abs() < 0.06);
    }

    #[test]
    fn two_sample_p_values_are_calibrated() {
        let mut r = RngSeed::new(2, 0).rng();
        let mut deciles = vec![0u64; 10];
        for _ in 0..1000 {
            let a: Vec<f64> = (0..100).map(|_| normal(&mut r)).collect();
            let b: Vec<f64> = (0..100).map(|_| normal(&mut r)).collect();
            let p = ks_two_sample(&a, &b).unwrap().p_value;
            deciles[((p * 10.0) as usize).min(9)] += 1;
        }
        // the statistic is discrete at n = 100, so only gross departures count
        assert!(chi_square_uniform(&deciles).unwrap() > 1e-4, "{deciles:?}");
    }

    #[test]
    fn normality_test() {
        let mut r = RngSeed::new(3, 0).rng();
        let g: Vec<f64> = (0..2000).map(|_| 2.0 + 3.0 * normal(&mut r)).collect();
        assert!(ks_normal(&g).unwrap().p_value > 0.01);
        let u: Vec<f64> = (0..2000).map(|_| r.random::<f64>()).collect();
        assert!(ks_normal(&u).unwrap().p_value < 1e-3);
        let exact = ks_one_sample(&u, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(exact.p_value > 0.01);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Q(1) and Q(1.36) ≈ 0.05
        assert!((kolmogorov_tail(1.0) - 0.269_999_671_677).abs() < 1e-9);
        assert!((kolmogorov_tail(1.358_1) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn wilson_interval() {
        let (lo, hi) = wilson(0, 10, 1.96);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_5).abs() < 1e-3);
        let (lo, hi) = wilson(50, 100, 1.96);
        assert!((lo - 0.403_8).abs() < 1e-3 && (hi - 0.596_2).abs() < 1e-3);
    }

    fn brownian(kappa: f64, drift: f64, times: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = RngSeed::new(seed, 0).rng();
        (0..n)
            .map(|_| {
                let (mut w, mut t0) = (0.0, 0.0);
                times
                    .iter()
                    .map(|&t| {
                        w += (kappa * (t - t0)).sqrt() * normal(&mut r);
                        t0 = t;
                        w + drift * t
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn variance_slope_of_brownian_motion() {
        let times = [0.25, 0.5, 1.0];
        let fit = variance_slope(&brownian(3.0, 0.0, &times, 4000, 5), &times).unwrap();
        assert!(fit.ci.0 < 3.0 && 3.0 < fit.ci.1, "{fit:?}");
        let drifted = variance_slope(&brownian(3.0, 0.1, &times, 4000, 5), &times).unwrap();
        assert!((drifted.slope - fit.slope).abs() < 1e-9);
        assert!(matches!(variance_slope(&brownian(3.0, 0.0, &times, 100, 5), &times), Err(Error::TooFewSamples { .. })));
        assert!(variance_slope(&brownian(3.0, 0.0, &times[..2], 400, 5), &times[..2]).is_err());
    }

    #[test]
    fn variance_slope_standard_error_is_honest() {
        let times = [0.25, 0.5, 1.0];
        let fits: Vec<VarianceSlope> =
            (0..200).map(|s| variance_slope(&brownian(3.0, 0.0, &times, 300, 100 + s), &times).unwrap()).collect();
        let (m, _) = mean_se(&fits.iter().map(|f| f.slope).collect::<Vec<_>>());
        let spread = (fits.iter().map(|f| (f.slope - m).powi(2)).sum::<f64>() / 199.0).sqrt();
        let se = fits.iter().map(|f| f.std_error).sum::<f64>() / 200.0;
        assert!((se / spread - 1.0).abs() < 0.2, "{se} vs {spread}");
    }

    #[test]
    fn gelman_rubin_separates_shifted_chains() {
        let mut r = RngSeed::new(6, 0).rng();
        let same: Vec<Vec<f64>> = (0..2).map(|_| (0..500).map(|_| normal(&mut r)).collect()).collect();
        assert!(gelman_rubin(&same).unwrap() < 1.02);
        let shifted = vec![same[0].clone(), same[1].iter().map(|x| x + 1.0).collect()];
        assert!(gelman_rubin(&shifted).unwrap() > 1.1);
    }

    #[test]
    fn checks_reevaluate() {
        let c = Check::new("x", 1.0, Rule::WithinSe { target: 1.2, k: 3.0 }).with_se(0.1);
        assert!(c.pass && c.evaluate());
        let c = Check::new("x", 1.0, Rule::WithinSe { target: 1.5, k: 3.0 }).with_se(0.1);
        assert!(!c.pass);
        let c = Check::new("p", 0.3, Rule::PAbove { alpha: 0.01 }).with_test(0.3, 0.005);
        assert!(!c.pass);
        let json = serde_json::to_string(&c).unwrap();
        let back: Check = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}
