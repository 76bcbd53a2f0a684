//! Brute-force numerical ground truth in a truncated Fock space: diagonal
//! Kerr evolution, homodyne projection via oscillator position
//! wavefunctions, and conditional signal states after a probe measurement.
//!
//! Everything here scales as O(dim) per amplitude pass and is intended for
//! desk-scale validation (`α² ≤ 100`); the large-photon-number regimes are
//! served by the closed forms in [`crate::analytic`].
//!
//! Quadrature convention: `X̂_ζ = (â e^{iζ} + â† e^{−iζ})/√2`, vacuum
//! variance 1/2. The rotation is absorbed into the state, so `ζ = 0` is the
//! standard position basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::InteractionParams;

/// Accepted truncation error on the state norm.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Smallest homodyne marginal accepted before an outcome is declared
/// impossible under the model.
pub const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("truncation too small: dim = {got}, rule requires at least {required}")]
    TruncationTooSmall { required: usize, got: usize },
    #[error("state norm {norm} deviates from 1 by more than {TAIL_TOLERANCE:e}")]
    InvalidNorm { norm: f64 },
    #[error("basis index {index} outside truncation {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("zero-probability outcome: marginal density {0:e} below floor")]
    ZeroProbabilityOutcome(f64),
    #[error("empty state")]
    Empty,
}

type Result<T> = std::result::Result<T, FockError>;

/// Truncation rule `dim = ⌈α² + 10α + 20⌉`: keeps the Poisson tail below
/// [`TAIL_TOLERANCE`] for α ≤ 10.
pub fn default_truncation(alpha: f64) -> usize {
    (alpha * alpha + 10.0 * alpha + 20.0).ceil() as usize
}

/// Pure state in a truncated Fock basis `|0⟩..|dim−1⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockVector {
    amps: Vec<Complex64>,
    tail_mass: f64,
}

impl FockVector {
    /// Coherent state `|α⟩` with amplitudes `e^{−α²/2} α^m/√m!`, computed
    /// through log-factorials. `dim` must satisfy the truncation rule.
    pub fn coherent(alpha: f64, dim: usize) -> Result<Self> {
        let required = default_truncation(alpha);
        if dim < required {
            return Err(FockError::TruncationTooSmall { required, got: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        if alpha == 0.0 {
            amps[0] = Complex64::new(1.0, 0.0);
            return Ok(Self { amps, tail_mass: 0.0 });
        }
        let log_alpha = alpha.ln();
        let mut log_fact = 0.0;
        let mut norm_sqr = 0.0;
        for (m, amp) in amps.iter_mut().enumerate() {
            if m > 0 {
                log_fact += (m as f64).ln();
            }
            let c = (-0.5 * alpha * alpha + m as f64 * log_alpha - 0.5 * log_fact).exp();
            norm_sqr += c * c;
            *amp = Complex64::new(c, 0.0);
        }
        let tail_mass = (1.0 - norm_sqr).max(0.0);
        if tail_mass > TAIL_TOLERANCE {
            return Err(FockError::TruncationTooSmall { required, got: dim });
        }
        Ok(Self { amps, tail_mass })
    }

    /// Coherent state with the default truncation.
    pub fn coherent_auto(alpha: f64) -> Result<Self> {
        Self::coherent(alpha, default_truncation(alpha))
    }

    /// Number state `|n⟩`.
    pub fn basis_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(FockError::IndexOutOfRange { index: n, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[n] = Complex64::new(1.0, 0.0);
        Ok(Self { amps, tail_mass: 0.0 })
    }

    /// Wrap raw amplitudes; the norm must already be within
    /// [`TAIL_TOLERANCE`] of 1.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(FockError::Empty);
        }
        let norm_sqr: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > TAIL_TOLERANCE {
            return Err(FockError::InvalidNorm { norm: norm_sqr.sqrt() });
        }
        Ok(Self { amps, tail_mass: (1.0 - norm_sqr).max(0.0) })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Probability weight estimated to lie beyond the truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Photon-number distribution `|c_m|²`.
    pub fn number_pmf(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ⟨n̂⟩.
    pub fn mean_photon(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(m, c)| m as f64 * c.norm_sqr())
            .sum()
    }

    /// ⟨n̂²⟩.
    pub fn mean_photon_sqr(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(m, c)| (m as f64) * (m as f64) * c.norm_sqr())
            .sum()
    }

    /// Characteristic function of the photon number, ⟨e^{iλn̂}⟩.
    pub fn number_characteristic(&self, lambda: f64) -> Complex64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(m, c)| Complex64::from_polar(c.norm_sqr(), lambda * m as f64))
            .sum()
    }
}

/// Diagonal Kerr evolution: each amplitude picks up the phase
/// `Γ_S m(m−1)/2 + Γ_X n_partner m`. Moduli are untouched, so photon-number
/// statistics are conserved exactly.
///
/// `n_partner` is accepted as a real number so callers can differentiate
/// numerically with respect to the partner occupation.
pub fn kerr_phase_evolve(
    vec: &FockVector,
    gamma_s: f64,
    gamma_x: f64,
    n_partner: f64,
) -> FockVector {
    let amps = vec
        .amps
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let mf = m as f64;
            let phase = gamma_s * mf * (mf - 1.0) / 2.0 + gamma_x * n_partner * mf;
            c * Complex64::from_polar(1.0, phase)
        })
        .collect();
    FockVector { amps, tail_mass: vec.tail_mass }
}

/// Normalized oscillator eigenfunctions ψ_m(x) for m = 0..count, by upward
/// recurrence `ψ_m = x√(2/m) ψ_{m−1} − √((m−1)/m) ψ_{m−2}`.
///
/// The pair is carried in scaled form `value · 2^exp` so the recurrence
/// survives |x| far into the classically forbidden region (where ψ_0
/// underflows) and m up to 10⁴.
pub(crate) fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    // ln psi_0 = -x^2/2 - ln(pi)/4, split into mantissa in [1, 2) and a
    // binary exponent
    let log2_psi0 = (-0.5 * x * x - 0.25 * std::f64::consts::PI.ln()) / std::f64::consts::LN_2;
    let mut exp = log2_psi0.floor() as i64;
    let mut prev = (log2_psi0 - exp as f64).exp2();
    out[0] = apply_exp(prev, exp);
    if count == 1 {
        return out;
    }
    let mut curr = std::f64::consts::SQRT_2 * x * prev;
    out[1] = apply_exp(curr, exp);
    for (m, slot) in out.iter_mut().enumerate().skip(2) {
        let mf = m as f64;
        let next = x * (2.0 / mf).sqrt() * curr - ((mf - 1.0) / mf).sqrt() * prev;
        prev = curr;
        curr = next;
        let mag = curr.abs().max(prev.abs());
        if mag != 0.0 && mag < 1e-128 {
            prev *= SCALE_UP;
            curr *= SCALE_UP;
            exp -= SCALE_LOG2;
        } else if mag > 1e128 {
            prev *= SCALE_DOWN;
            curr *= SCALE_DOWN;
            exp += SCALE_LOG2;
        }
        *slot = apply_exp(curr, exp);
    }
    out
}

const SCALE_LOG2: i64 = 512;
const SCALE_UP: f64 = 1.3407807929942597e154; // 2^512
const SCALE_DOWN: f64 = 7.458340731200207e-155; // 2^-512

fn apply_exp(value: f64, exp: i64) -> f64 {
    if value == 0.0 || exp < -2100 {
        return 0.0;
    }
    if (-1020..=1020).contains(&exp) {
        value * 2f64.powi(exp as i32)
    } else if exp < 0 {
        // split to reach the subnormal range without premature underflow
        let half = exp / 2;
        value * 2f64.powi(half as i32) * 2f64.powi((exp - half) as i32)
    } else {
        f64::INFINITY // unreachable for |psi| <= 1; defensive only
    }
}

/// Projection ⟨m|X, ζ⟩ of a Fock state onto the rotated-quadrature
/// eigenstate: `e^{−imζ} ψ_m(X)`.
pub fn quadrature_overlap(x: f64, m: usize, zeta: f64) -> Complex64 {
    let psi = hermite_functions(x, m + 1)[m];
    Complex64::from_polar(psi, -zeta * m as f64)
}

/// Homodyne outcome density `|⟨X, ζ|ψ⟩|² = |Σ_m c_m e^{imζ} ψ_m(X)|²`.
pub fn homodyne_density(vec: &FockVector, x: f64, zeta: f64) -> f64 {
    let psis = hermite_functions(x, vec.dim());
    projection_amplitude(&vec.amps, &psis, zeta).norm_sqr()
}

fn projection_amplitude(amps: &[Complex64], psis: &[f64], zeta: f64) -> Complex64 {
    amps.iter()
        .zip(psis)
        .enumerate()
        .map(|(m, (c, &psi))| c * Complex64::from_polar(psi, zeta * m as f64))
        .sum()
}

/// First two quadrature moments by ladder-operator contractions (no grid):
/// `⟨X⟩ = √2 Re[e^{iζ}⟨â⟩]`, `⟨X²⟩ = Re[e^{2iζ}⟨â²⟩] + ⟨n̂⟩ + 1/2`.
pub fn oracle_moments(vec: &FockVector, zeta: f64) -> (f64, f64) {
    let a = &vec.amps;
    let mut a_mean = Complex64::new(0.0, 0.0);
    let mut a2_mean = Complex64::new(0.0, 0.0);
    let mut n_mean = 0.0;
    for m in 0..a.len() {
        let mf = m as f64;
        n_mean += mf * a[m].norm_sqr();
        if m + 1 < a.len() {
            a_mean += a[m].conj() * a[m + 1] * (mf + 1.0).sqrt();
        }
        if m + 2 < a.len() {
            a2_mean += a[m].conj() * a[m + 2] * ((mf + 1.0) * (mf + 2.0)).sqrt();
        }
    }
    let mean_x = std::f64::consts::SQRT_2 * (Complex64::from_polar(1.0, zeta) * a_mean).re;
    let mean_x2 = (Complex64::from_polar(1.0, 2.0 * zeta) * a2_mean).re + n_mean + 0.5;
    (mean_x, mean_x2)
}

/// Entangled probe–signal state after the Kerr interaction, decomposed over
/// the signal Fock basis: one evolved probe branch per signal number `n`,
/// with the signal amplitudes carrying their own self-phase factors.
#[derive(Debug, Clone)]
pub struct JointState {
    signal_amps: Vec<Complex64>,
    branches: Vec<FockVector>,
}

impl JointState {
    /// Evolve `coherent(α) ⊗ signal` under the two-mode Kerr Hamiltonian.
    pub fn new(signal: &FockVector, alpha: f64, params: &InteractionParams) -> Result<Self> {
        let probe = FockVector::coherent_auto(alpha)?;
        let gs = params.gamma_s;
        let gx = params.gamma_x;
        let signal_amps = signal
            .amps
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let nf = n as f64;
                c * Complex64::from_polar(1.0, gs * nf * (nf - 1.0) / 2.0)
            })
            .collect();
        let branches = (0..signal.dim())
            .map(|n| kerr_phase_evolve(&probe, gs, gx, n as f64))
            .collect();
        Ok(Self { signal_amps, branches })
    }

    pub fn signal_dim(&self) -> usize {
        self.signal_amps.len()
    }

    pub fn branch(&self, n: usize) -> &FockVector {
        &self.branches[n]
    }

    /// Total norm Σ_n |c_n|² ‖branch_n‖².
    pub fn norm_sqr(&self) -> f64 {
        self.signal_amps
            .iter()
            .zip(&self.branches)
            .map(|(c, b)| c.norm_sqr() * b.norm_sqr())
            .sum()
    }

    /// Marginal homodyne density of the probe, W(X) = Σ_n |c_n|² W_n(X).
    pub fn marginal_density(&self, zeta: f64, x: f64) -> f64 {
        let dim_p = self.branches.first().map_or(0, FockVector::dim);
        let psis = hermite_functions(x, dim_p);
        self.signal_amps
            .iter()
            .zip(&self.branches)
            .map(|(c, b)| c.norm_sqr() * projection_amplitude(&b.amps, &psis, zeta).norm_sqr())
            .sum()
    }

    /// Conditional signal state and marginal density for a probe homodyne
    /// outcome `x` at angle `zeta`.
    pub fn condition_on(&self, zeta: f64, x: f64) -> Result<(FockVector, f64)> {
        let dim_p = self.branches.first().map_or(0, FockVector::dim);
        let psis = hermite_functions(x, dim_p);
        let raw: Vec<Complex64> = self
            .signal_amps
            .iter()
            .zip(&self.branches)
            .map(|(c, b)| c * projection_amplitude(&b.amps, &psis, zeta))
            .collect();
        let density: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
        if density < DENSITY_FLOOR {
            return Err(FockError::ZeroProbabilityOutcome(density));
        }
        let scale = 1.0 / density.sqrt();
        let amps = raw.into_iter().map(|c| c * scale).collect();
        Ok((FockVector { amps, tail_mass: 0.0 }, density))
    }
}

/// One-shot conditional-state computation: build the joint state, project on
/// the homodyne outcome, return the normalized signal state and the marginal
/// density of that outcome.
pub fn joint_conditional_state(
    signal: &FockVector,
    alpha: f64,
    params: &InteractionParams,
    zeta: f64,
    x: f64,
) -> Result<(FockVector, f64)> {
    JointState::new(signal, alpha, params)?.condition_on(zeta, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn coherent_vacuum_is_ground_state() {
        let v = FockVector::coherent(0.0, 20).unwrap();
        assert_eq!(v.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(v.amplitudes()[1..].iter().all(|c| c.norm_sqr() == 0.0));
    }

    #[test]
    fn coherent_norm_and_mean() {
        let v = FockVector::coherent(2.0, 44).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        let v = FockVector::coherent_auto(3.0).unwrap();
        assert!((v.mean_photon() - 9.0).abs() < 1e-9);
        assert!(v.tail_mass() < 1e-10);
    }

    #[test]
    fn coherent_rejects_small_truncation() {
        assert!(matches!(
            FockVector::coherent(3.0, 20),
            Err(FockError::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn kerr_evolution_is_diagonal_unitary() {
        let v = FockVector::coherent_auto(2.0).unwrap();
        let w = kerr_phase_evolve(&v, 0.07, 0.11, 3.0);
        for (a, b) in v.amplitudes().iter().zip(w.amplitudes()) {
            let tol = 8.0 * f64::EPSILON * a.norm_sqr().max(f64::MIN_POSITIVE);
            assert!((a.norm_sqr() - b.norm_sqr()).abs() <= tol);
        }
        assert!((v.mean_photon() - w.mean_photon()).abs() < 1e-12);
        assert!((v.mean_photon_sqr() - w.mean_photon_sqr()).abs() < 1e-10);
        // zero factors: identity
        let id = kerr_phase_evolve(&v, 0.0, 0.0, 5.0);
        assert_eq!(v.amplitudes(), id.amplitudes());
    }

    #[test]
    fn number_characteristic_matches_closed_form() {
        // <e^{i 0.3 n}> over |alpha=2> equals exp[4(e^{i0.3} - 1)];
        // Kerr phases must not change it.
        let v = FockVector::coherent_auto(2.0).unwrap();
        let w = kerr_phase_evolve(&v, 0.1, 0.0, 0.0);
        let got = w.number_characteristic(0.3);
        let expect = Complex64::new(0.31699383001719656, 0.773_997_320_322_541_1);
        assert!((got - expect).norm() < 1e-10, "got {got}");
    }

    #[test]
    fn ground_state_overlap_value() {
        let o = quadrature_overlap(0.0, 0, 0.0);
        assert!(rel(o.re, std::f64::consts::PI.powf(-0.25)) < 1e-15);
        assert_eq!(o.im, 0.0);
        // odd parity
        assert!(quadrature_overlap(0.0, 1, 0.0).norm() < 1e-300);
        // rotation phase e^{-i m zeta} on top of the real wavefunction
        let o = quadrature_overlap(0.7, 3, 0.5);
        let psi = hermite_functions(0.7, 4)[3];
        let expect = Complex64::from_polar(1.0, -1.5) * psi;
        assert!((o - expect).norm() < 1e-14);
    }

    #[test]
    fn hermite_matches_explicit_low_orders() {
        // psi_2(x) = (2x^2 - 1)/sqrt(2) * pi^{-1/4} e^{-x^2/2}
        for &x in &[-2.3f64, -0.4, 0.0, 0.9, 3.7] {
            let g = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
            let psi = hermite_functions(x, 4);
            assert!((psi[0] - g).abs() < 1e-14);
            assert!((psi[1] - std::f64::consts::SQRT_2 * x * g).abs() < 1e-13);
            assert!((psi[2] - (2.0 * x * x - 1.0) / std::f64::consts::SQRT_2 * g).abs() < 1e-13);
            let h3 = (2.0 * x * x * x - 3.0 * x) / 3.0f64.sqrt();
            assert!((psi[3] - h3 * g).abs() < 1e-13);
        }
    }

    #[test]
    fn hermite_normalization_by_quadrature() {
        // trapezoid over [-12, 12], step 1e-3
        let step = 1e-3;
        let n = (24.0 / step) as usize;
        let mut sum = 0.0;
        for i in 0..=n {
            let x = -12.0 + step * i as f64;
            let p = hermite_functions(x, 6)[5];
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += w * p * p * step;
        }
        assert!((sum - 1.0).abs() < 1e-8, "integral = {sum}");
    }

    #[test]
    fn hermite_survives_extreme_orders() {
        // |psi_m| is bounded by ~0.8 for every m and x
        for &x in &[0.0, 0.5, 5.0, 25.0] {
            let psis = hermite_functions(x, 10_001);
            assert!(psis.iter().all(|p| p.is_finite()));
            assert!(psis.iter().all(|p| p.abs() < 0.9));
        }
        // closed form at the origin: |psi_{2k}(0)|^2 = C(2k,k) 4^{-k} / sqrt(pi)
        let k = 5000usize;
        let mut log_c = 0.0;
        for j in 1..=k {
            // ln C(2k, k) = sum ln((k+j)/j)
            log_c += ((k + j) as f64).ln() - (j as f64).ln();
        }
        let expect = (0.5 * (log_c - 2.0 * k as f64 * 2.0f64.ln())).exp()
            / std::f64::consts::PI.powf(0.25);
        let got = hermite_functions(0.0, 2 * k + 1)[2 * k].abs();
        assert!(rel(got, expect) < 1e-9, "got {got} expect {expect}");
    }

    #[test]
    fn hermite_far_tail_is_scaled_not_zero() {
        // x = 50: psi_0 ~ e^{-1250} underflows f64, but psi_m climbs back
        // into range near the classical turning point m ~ x^2/2
        let psis = hermite_functions(50.0, 1400);
        assert_eq!(psis[0], 0.0); // genuinely below f64 range
        assert!(psis[1300].abs() > 1e-3, "got {}", psis[1300]);
        assert!(psis.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn vacuum_homodyne_density_is_gaussian() {
        let v = FockVector::coherent(0.0, 20).unwrap();
        for &x in &[0.0, 0.3, -1.2, 2.2] {
            let d = homodyne_density(&v, x, 0.9);
            let expect = (-x * x).exp() / std::f64::consts::PI.sqrt();
            assert!(rel(d, expect) < 1e-12);
        }
    }

    #[test]
    fn coherent_homodyne_density_is_displaced_gaussian() {
        let alpha = 2.0;
        let v = FockVector::coherent_auto(alpha).unwrap();
        let center = std::f64::consts::SQRT_2 * alpha;
        for &x in &[center, center - 1.0, center + 0.5, 0.0] {
            let d = homodyne_density(&v, x, 0.0);
            let expect = (-(x - center) * (x - center)).exp() / std::f64::consts::PI.sqrt();
            assert!((d - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn homodyne_density_integrates_to_one() {
        let alpha = 2.0;
        let v = kerr_phase_evolve(&FockVector::coherent_auto(alpha).unwrap(), 0.05, 0.1, 2.0);
        let span = std::f64::consts::SQRT_2 * alpha + 12.0;
        let step = 1e-3;
        let n = (2.0 * span / step).ceil() as usize;
        let mut sum = 0.0;
        for i in 0..=n {
            let x = -span + step * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += w * homodyne_density(&v, x, 0.7) * step;
        }
        assert!((sum - 1.0).abs() < 1e-8, "integral = {sum}");
    }

    #[test]
    fn oracle_moments_vacuum_and_coherent() {
        let vac = FockVector::coherent(0.0, 20).unwrap();
        let (m, m2) = oracle_moments(&vac, 1.3);
        assert!(m.abs() < 1e-15);
        assert!(rel(m2, 0.5) < 1e-14);

        let v = FockVector::coherent_auto(2.0).unwrap();
        let (m, m2) = oracle_moments(&v, 0.0);
        assert!(rel(m, 2.0 * std::f64::consts::SQRT_2) < 1e-10);
        assert!(rel(m2, 8.5) < 1e-10);
    }

    #[test]
    fn conditioning_without_coupling_preserves_number_pmf() {
        let signal = FockVector::coherent_auto(1.5).unwrap();
        let params = InteractionParams::from_factors(0.05, 0.0).unwrap();
        let (post, density) = joint_conditional_state(&signal, 2.0, &params, 0.3, 1.0).unwrap();
        assert!(density > 0.0);
        for (p, q) in post.number_pmf().iter().zip(signal.number_pmf()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioning_fock_signal_without_spm_gives_coherent_gaussian() {
        let n0 = 2usize;
        let signal = FockVector::basis_state(n0, 10).unwrap();
        let gx = 0.04;
        let params = InteractionParams::from_factors(0.0, gx).unwrap();
        let alpha = 2.0;
        let joint = JointState::new(&signal, alpha, &params).unwrap();
        let zeta = 0.2;
        let phi = gx * n0 as f64 + zeta;
        let center = std::f64::consts::SQRT_2 * alpha * phi.cos();
        for &x in &[center, center - 0.7, center + 1.1] {
            let (_, density) = joint.condition_on(zeta, x).unwrap();
            let expect = (-(x - center) * (x - center)).exp() / std::f64::consts::PI.sqrt();
            assert!((density - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn conditioning_narrows_coherent_signal() {
        // information-gain check: posterior variance under the prior one
        let signal = FockVector::coherent_auto(2.0).unwrap(); // n_bar_s = 4
        let params = InteractionParams::from_factors(0.01, 0.02).unwrap();
        let alpha = 4.0; // alpha^2 = 16
        let joint = JointState::new(&signal, alpha, &params).unwrap();
        // homodyne angle optimal for the prior mean (eta = 1)
        let zeta = crate::analytic::optimal_homodyne_angle(&params, 16.0, 4.0, 1.0);
        // outcome at the marginal mode, located by coarse-to-fine scan
        let span = std::f64::consts::SQRT_2 * alpha + 12.0;
        let mut best = (f64::MIN, 0.0);
        let n = 4000;
        for i in 0..=n {
            let x = -span + 2.0 * span * i as f64 / n as f64;
            let w = joint.marginal_density(zeta, x);
            if w > best.0 {
                best = (w, x);
            }
        }
        let (post, _) = joint.condition_on(zeta, best.1).unwrap();
        let mean = post.mean_photon();
        let var = post.mean_photon_sqr() - mean * mean;
        assert!(var < 4.0, "posterior variance {var} must beat prior 4");
    }

    #[test]
    fn marginal_matches_conditional_density() {
        let signal = FockVector::coherent_auto(1.2).unwrap();
        let params = InteractionParams::from_factors(0.03, 0.06).unwrap();
        let joint = JointState::new(&signal, 2.5, &params).unwrap();
        for &x in &[-1.0, 0.4, 2.7] {
            let (_, d) = joint.condition_on(0.4, x).unwrap();
            let w = joint.marginal_density(0.4, x);
            assert!((d - w).abs() <= 1e-10 * w.max(1.0));
        }
        assert!((joint.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn impossible_outcome_is_rejected() {
        let signal = FockVector::basis_state(0, 4).unwrap();
        let params = InteractionParams::from_factors(0.0, 0.01).unwrap();
        let joint = JointState::new(&signal, 0.0, &params).unwrap();
        // vacuum probe, outcome 40 standard widths out
        assert!(matches!(
            joint.condition_on(0.0, 40.0),
            Err(FockError::ZeroProbabilityOutcome(_))
        ));
    }

    #[test]
    fn from_amplitudes_validates_norm() {
        let bad = vec![Complex64::new(0.5, 0.0); 2];
        assert!(matches!(FockVector::from_amplitudes(bad), Err(FockError::InvalidNorm { .. })));
        let good = vec![
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
        ];
        assert!(FockVector::from_amplitudes(good).is_ok());
        assert!(matches!(FockVector::from_amplitudes(vec![]), Err(FockError::Empty)));
    }
}
