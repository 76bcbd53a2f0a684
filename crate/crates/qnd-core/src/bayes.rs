//! Measurement statistics and photon-number inference: the conditioning
//! kernel of the homodyne measurement, its Gaussian outcome density, Poisson
//! priors, Bayesian posteriors, and a seeded forward sampler.
//!
//! The default likelihood is the Gaussian outcome density (numerically robust
//! for any probe amplitude); the exact closed-form kernel is available behind
//! [`LikelihoodMode::ExactKernel`]. Both use the asymptotic phase
//! `φ(n) = Γ_S α² + Γ_X n + ζ`. The dependence of φ — and through it of both
//! the mean and the variance — on `n` is what makes posteriors non-Gaussian,
//! so the likelihood is always evaluated per `n`, never at a mean phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{derive_seed, CounterRng};

/// |sin φ| below this makes the exact kernel singular.
pub const SINGULAR_PHASE_FLOOR: f64 = 1e-12;

/// Marginal densities below this are treated as impossible outcomes.
pub const MARGINAL_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, PartialEq)]
pub enum BayesError {
    #[error("kernel singular at this angle: |sin(phi)| = {0:e} at n = {1}")]
    SingularKernel(f64, usize),
    #[error("outcome outside model support: all likelihoods vanish at X = {0}")]
    OutcomeOutsideSupport(f64),
    #[error("{name} must be non-negative and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("empty support window [{0}, {1}]")]
    EmptySupport(usize, usize),
}

type Result<T> = std::result::Result<T, BayesError>;

/// Parameters of the probe-side measurement kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrausParams {
    /// Coherent probe amplitude α (real, ≥ 0).
    pub alpha: f64,
    /// SPM phase factor Γ_S.
    pub gamma_s: f64,
    /// XPM phase factor Γ_X.
    pub gamma_x: f64,
    /// Homodyne angle ζ (radians).
    pub zeta: f64,
}

impl KrausParams {
    /// Complex squeeze parameter κ = 1 − 2iΓ_S α².
    pub fn kappa(&self) -> Complex64 {
        Complex64::new(1.0, -2.0 * self.gamma_s * self.alpha * self.alpha)
    }

    /// Readout phase φ(n) = Γ_S α² + Γ_X n + ζ.
    pub fn phase(&self, n: f64) -> f64 {
        self.gamma_s * self.alpha * self.alpha + self.gamma_x * n + self.zeta
    }

    /// Mean outcome √2 α cos φ(n).
    pub fn outcome_mean(&self, n: f64) -> f64 {
        std::f64::consts::SQRT_2 * self.alpha * self.phase(n).cos()
    }

    /// Outcome variance `1/2 − Γ_Sα² sin 2φ + 2Γ_S²α⁴ sin²φ`; strictly
    /// positive for all real parameters.
    pub fn outcome_variance(&self, n: f64) -> f64 {
        let g = self.gamma_s * self.alpha * self.alpha;
        let phi = self.phase(n);
        let v = 0.5 - g * (2.0 * phi).sin() + 2.0 * g * g * phi.sin().powi(2);
        debug_assert!(v > 0.0, "outcome variance must be positive, got {v}");
        v
    }
}

/// Which outcome likelihood backs the posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LikelihoodMode {
    /// Gaussian outcome density; exact modulus of the kernel and robust for
    /// any probe amplitude.
    #[default]
    Gaussian,
    /// Full complex kernel, |Ω(X, n)|²; singular where sin φ(n) = 0.
    ExactKernel,
}

/// Closed-form measurement kernel Ω(X, n) in the position representation,
/// evaluated with the outcome taken in the rotated quadrature frame.
///
/// The overall complex square root uses the principal branch; observable
/// quantities depend only on |Ω|².
pub fn kraus_amplitude(x: f64, n: usize, kp: &KrausParams) -> Result<Complex64> {
    let phi = kp.phase(n as f64);
    let s = phi.sin();
    if s.abs() < SINGULAR_PHASE_FLOOR {
        return Err(BayesError::SingularKernel(s.abs(), n));
    }
    let a2 = kp.alpha * kp.alpha;
    let kappa = kp.kappa();
    let cot = phi.cos() / s;
    let denom = kappa + Complex64::new(0.0, cot);
    let prefactor =
        (Complex64::new(std::f64::consts::PI.sqrt(), 0.0) * denom * s.abs()).sqrt().inv();
    let i = Complex64::new(0.0, 1.0);
    let z = (-(1.0 + i * kappa * cot) / 2.0 * x * x
        + i * std::f64::consts::SQRT_2 * kp.alpha * kappa / s * x
        - i * a2 * kappa * cot)
        / denom;
    Ok(prefactor * z.exp())
}

/// Gaussian outcome density for signal number `n`: mean `√2 α cos φ(n)`,
/// variance `1/2 − Γ_Sα² sin 2φ + 2Γ_S²α⁴ sin²φ`. Equal to |Ω(X, n)|².
pub fn kraus_density(x: f64, n: usize, kp: &KrausParams) -> f64 {
    let mean = kp.outcome_mean(n as f64);
    let var = kp.outcome_variance(n as f64);
    let d = x - mean;
    (-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

fn likelihood(x: f64, n: usize, kp: &KrausParams, mode: LikelihoodMode) -> Result<f64> {
    match mode {
        LikelihoodMode::Gaussian => Ok(kraus_density(x, n, kp)),
        LikelihoodMode::ExactKernel => Ok(kraus_amplitude(x, n, kp)?.norm_sqr()),
    }
}

/// Probability mass function over a contiguous photon-number window, with
/// cached first two moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    support_min: usize,
    pmf: Vec<f64>,
    mean: f64,
    variance: f64,
    /// Mass that fell outside the window before renormalization.
    truncated_mass: f64,
}

impl PhotonDistribution {
    /// Normalize raw weights over `[support_min, support_min + len)`.
    /// `truncated_mass` records what the caller clipped, for reporting only.
    pub fn from_weights(support_min: usize, weights: Vec<f64>, truncated_mass: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(BayesError::EmptySupport(support_min, support_min));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(BayesError::InvalidParameter { name: "total weight", value: total });
        }
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut mean = 0.0;
        for (i, p) in pmf.iter().enumerate() {
            mean += (support_min + i) as f64 * p;
        }
        let mut variance = 0.0;
        for (i, p) in pmf.iter().enumerate() {
            let d = (support_min + i) as f64 - mean;
            variance += d * d * p;
        }
        Ok(Self { support_min, pmf, mean, variance, truncated_mass })
    }

    pub fn support_min(&self) -> usize {
        self.support_min
    }

    pub fn support_max(&self) -> usize {
        self.support_min + self.pmf.len() - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of photon number `n` (zero outside the window).
    pub fn prob(&self, n: usize) -> f64 {
        if n < self.support_min {
            return 0.0;
        }
        self.pmf.get(n - self.support_min).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    /// Standardized third central moment; 0 for a degenerate distribution.
    pub fn skewness(&self) -> f64 {
        if self.variance < 1e-30 {
            return 0.0;
        }
        let mut m3 = 0.0;
        for (i, p) in self.pmf.iter().enumerate() {
            let d = (self.support_min + i) as f64 - self.mean;
            m3 += d * d * d * p;
        }
        m3 / self.variance.powf(1.5)
    }

    /// Central credible interval `[lo, hi]` holding at least `mass`, chosen
    /// by the midpoint-CDF rule so nominal and realized coverage agree for
    /// smooth distributions.
    pub fn credible_interval(&self, mass: f64) -> (usize, usize) {
        let lo_target = (1.0 - mass) / 2.0;
        let hi_target = 1.0 - lo_target;
        let mut cdf = 0.0;
        let mut lo_idx = None;
        let mut hi_idx = 0usize;
        for (i, p) in self.pmf.iter().enumerate() {
            let mid = cdf + p / 2.0;
            cdf += p;
            if lo_idx.is_none() && mid >= lo_target {
                lo_idx = Some(i);
            }
            if mid <= hi_target {
                hi_idx = i;
            }
        }
        let lo = lo_idx.unwrap_or(self.pmf.len() - 1);
        let hi = hi_idx.max(lo);
        (self.support_min + lo, self.support_min + hi)
    }

    /// Inverse-CDF draw.
    pub fn quantile(&self, u: f64) -> usize {
        let mut cdf = 0.0;
        for (i, p) in self.pmf.iter().enumerate() {
            cdf += p;
            if u < cdf {
                return self.support_min + i;
            }
        }
        self.support_max()
    }
}

/// Default support window `[0, n̄ + 10√n̄ + 20]`.
pub fn default_support(n_bar: f64) -> (usize, usize) {
    (0, (n_bar + 10.0 * n_bar.sqrt() + 20.0).floor() as usize)
}

/// Poisson prior with mean `n_bar_s`, renormalized over the window
/// (`default_support` when none is given).
pub fn poisson_prior(n_bar_s: f64, support: Option<(usize, usize)>) -> Result<PhotonDistribution> {
    if !(n_bar_s >= 0.0) || !n_bar_s.is_finite() {
        return Err(BayesError::InvalidParameter { name: "n_bar_s", value: n_bar_s });
    }
    let (lo, hi) = support.unwrap_or_else(|| default_support(n_bar_s));
    if hi < lo {
        return Err(BayesError::EmptySupport(lo, hi));
    }
    if n_bar_s == 0.0 {
        let mut w = vec![0.0; hi - lo + 1];
        if lo == 0 {
            w[0] = 1.0;
        } else {
            return Err(BayesError::EmptySupport(lo, hi));
        }
        return PhotonDistribution::from_weights(lo, w, 0.0);
    }
    let log_nbar = n_bar_s.ln();
    let mut log_fact = 0.0;
    let mut weights = Vec::with_capacity(hi - lo + 1);
    let mut inside = 0.0;
    for n in 0..=hi {
        if n > 0 {
            log_fact += (n as f64).ln();
        }
        let p = (-n_bar_s + n as f64 * log_nbar - log_fact).exp();
        if n >= lo {
            weights.push(p);
            inside += p;
        }
    }
    let truncated = (1.0 - inside).max(0.0);
    PhotonDistribution::from_weights(lo, weights, truncated)
}

/// Bayesian update of `prior` given outcome `x`, using the Gaussian
/// likelihood. Returns the posterior and the marginal outcome density 𝒲(X).
pub fn posterior(
    x: f64,
    prior: &PhotonDistribution,
    kp: &KrausParams,
) -> Result<(PhotonDistribution, f64)> {
    posterior_with_mode(x, prior, kp, LikelihoodMode::Gaussian)
}

/// Bayesian update with an explicit likelihood mode.
pub fn posterior_with_mode(
    x: f64,
    prior: &PhotonDistribution,
    kp: &KrausParams,
    mode: LikelihoodMode,
) -> Result<(PhotonDistribution, f64)> {
    let mut weights = Vec::with_capacity(prior.pmf.len());
    let mut marginal = 0.0;
    for (i, p) in prior.pmf.iter().enumerate() {
        let n = prior.support_min + i;
        let l = likelihood(x, n, kp, mode)?;
        weights.push(l * p);
        marginal += l * p;
    }
    if marginal < MARGINAL_FLOOR {
        return Err(BayesError::OutcomeOutsideSupport(x));
    }
    let post = PhotonDistribution::from_weights(prior.support_min, weights, 0.0)?;
    Ok((post, marginal))
}

/// Exact moments of a distribution over its window.
pub fn posterior_stats(dist: &PhotonDistribution) -> (f64, f64, f64) {
    (dist.mean(), dist.variance(), dist.skewness())
}

/// One simulated measurement: a true signal number drawn from the prior and
/// a homodyne outcome drawn from the conditional Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub n_true: usize,
    pub x: f64,
    /// RNG seed that produced this record.
    pub seed: u64,
}

/// Forward-sample one record; a pure function of `(prior, kp, seed)`.
pub fn sample_record(prior: &PhotonDistribution, kp: &KrausParams, seed: u64) -> MeasurementRecord {
    let mut rng = CounterRng::new(seed);
    let n_true = prior.quantile(rng.next_f64());
    let mean = kp.outcome_mean(n_true as f64);
    let sd = kp.outcome_variance(n_true as f64).sqrt();
    let x = mean + sd * rng.next_gaussian();
    MeasurementRecord { n_true, x, seed }
}

/// Batch sampling with per-record derived substreams: record `i` of a batch
/// is `sample_record(prior, kp, derive_seed(seed, i))`, so results are
/// independent of evaluation order.
pub fn sample_records(
    prior: &PhotonDistribution,
    kp: &KrausParams,
    seed: u64,
    count: usize,
) -> Vec<MeasurementRecord> {
    (0..count)
        .map(|i| sample_record(prior, kp, derive_seed(seed, i as u64)))
        .collect()
}
