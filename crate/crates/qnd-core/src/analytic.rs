//! Closed-form sensitivity mathematics for the two-mode Kerr interaction:
//! exact quadrature moments of the evolved probe, measurement-error formulas
//! with detection losses, the optimal homodyne angle and probe photon number,
//! and the number-phase uncertainty budget.
//!
//! Two phase conventions coexist and must not be mixed:
//!
//! - the *exact* phase `φ = α² sin Γ_S + Γ_X n_s + ζ`, stored in [`MomentSet`];
//! - the *asymptotic* phase `φ = Γ_S n̄_p + Γ_X n_s + ζ`, used by the
//!   loss-aware error formulas.
//!
//! They agree to `O(Γ_S³ α²)`; each operation documents which one it uses.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Divergence guard: |sin φ| below this means the transfer function is
/// numerically zero and the imprecision formulas blow up.
pub const SIN_PHI_FLOOR: f64 = 1e-12;

/// Advisory threshold for the linearized angle-offset correction:
/// `Γ_X |n_s − n̄_s|` beyond this leaves the regime where the correction
/// is derived.
pub const EPSILON_ADVISORY_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    /// XPM factor is zero: the probe phase carries no signal information.
    #[error("no coupling: Gamma_X = 0")]
    NoCoupling,
    /// sin φ ≈ 0: the transfer function vanishes and the imprecision diverges.
    #[error("zero transfer function: sin(phi) = {0:e} is within {SIN_PHI_FLOOR:e} of 0")]
    ZeroTransfer(f64),
    #[error("quantum efficiency must lie in (0, 1], got {0}")]
    InvalidEfficiency(f64),
    /// At η = 1 the SPM penalty vanishes and the error decreases
    /// monotonically in n̄_p: there is no finite optimum.
    #[error("no finite optimum: error decreases monotonically in probe photon number")]
    UnboundedOptimum,
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
}

type Result<T> = std::result::Result<T, AnalyticError>;

/// Nonlinear phase factors governing self- and cross-phase modulation.
///
/// `gamma_s` and `gamma_x` are the dimensionless SPM and XPM phase factors
/// accumulated over one effective interaction time. When constructed from
/// physical rates, `Γ = γ·τ` and the rates are retained for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    /// Dimensionless SPM phase factor Γ_S.
    pub gamma_s: f64,
    /// Dimensionless XPM phase factor Γ_X.
    pub gamma_x: f64,
    /// SPM rate γ_s in rad/s, when known.
    pub spm_rate: Option<f64>,
    /// XPM rate γ_x in rad/s, when known.
    pub xpm_rate: Option<f64>,
    /// Effective interaction time τ in seconds, when known.
    pub tau: Option<f64>,
}

impl InteractionParams {
    /// Build from the dimensionless phase factors directly.
    pub fn from_factors(gamma_s: f64, gamma_x: f64) -> Result<Self> {
        for (name, value) in [("Gamma_S", gamma_s), ("Gamma_X", gamma_x)] {
            if !value.is_finite() {
                return Err(AnalyticError::NonFinite { name, value });
            }
        }
        Ok(Self { gamma_s, gamma_x, spm_rate: None, xpm_rate: None, tau: None })
    }

    /// Build from SPM/XPM rates (rad/s) and the effective interaction time.
    pub fn from_rates(spm_rate: f64, xpm_rate: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(AnalyticError::NonPositive { name: "tau", value: tau });
        }
        let mut p = Self::from_factors(spm_rate * tau, xpm_rate * tau)?;
        p.spm_rate = Some(spm_rate);
        p.xpm_rate = Some(xpm_rate);
        p.tau = Some(tau);
        Ok(p)
    }
}

/// Coherent probe preparation: real amplitude `α ≥ 0`, mean photon number
/// `n̄_p = α²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePrep {
    pub alpha: f64,
}

impl ProbePrep {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(AnalyticError::NonPositive { name: "alpha", value: alpha });
        }
        Ok(Self { alpha })
    }

    pub fn from_mean_photons(n_bar_p: f64) -> Result<Self> {
        if !n_bar_p.is_finite() || n_bar_p < 0.0 {
            return Err(AnalyticError::NonPositive { name: "n_bar_p", value: n_bar_p });
        }
        Ok(Self { alpha: n_bar_p.sqrt() })
    }

    /// Mean probe photon number n̄_p = α².
    pub fn mean_photons(&self) -> f64 {
        self.alpha * self.alpha
    }

    /// Coherent-state phase width Δφ_p = 1/(2√n̄_p).
    pub fn phase_width(&self) -> f64 {
        1.0 / (2.0 * self.alpha)
    }

    /// Coherent-state number width Δn_p = √n̄_p.
    pub fn number_width(&self) -> f64 {
        self.alpha
    }
}

/// Homodyne measurement chain: unified quantum efficiency η ∈ (0, 1] and
/// local-oscillator angle ζ (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    pub eta: f64,
    pub zeta: f64,
}

impl DetectionChain {
    pub fn new(eta: f64, zeta: f64) -> Result<Self> {
        validate_efficiency(eta)?;
        Ok(Self { eta, zeta })
    }
}

fn validate_efficiency(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(AnalyticError::InvalidEfficiency(eta));
    }
    Ok(())
}

/// Exact quadrature statistics of the Kerr-evolved probe, conditioned on a
/// signal Fock number.
///
/// `var_x = a + b·cos 2φ − c·sin 2φ` with the exact phase `phi`; `transfer`
/// is `∂⟨X_ζ⟩/∂n_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// First-order SPM damping factor `exp[α²(cos Γ_S − 1)]`.
    pub e1: f64,
    /// Second-order SPM damping factor `exp[α²(cos 2Γ_S − 1)]`.
    pub e2: f64,
    /// Exact total phase `α² sin Γ_S + Γ_X n_s + ζ`.
    pub phi: f64,
    /// Phase offset of the second moment, `α²(sin 2Γ_S − 2 sin Γ_S) + Γ_S`.
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// ⟨X_ζ⟩.
    pub mean_x: f64,
    /// (ΔX_ζ)².
    pub var_x: f64,
    /// Transfer function G = ∂⟨X_ζ⟩/∂n_s.
    pub transfer: f64,
}

impl MomentSet {
    /// Second moment ⟨X_ζ²⟩ = var + mean².
    pub fn mean_x_sqr(&self) -> f64 {
        self.var_x + self.mean_x * self.mean_x
    }
}

/// Summary error budget for one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Squared measurement imprecision (Δn_s)² at the optimal angle.
    pub dn2_meas: f64,
    /// Back-action perturbation of the signal phase, Γ_X √n̄_p.
    pub dphi_pert: f64,
    /// Standard quantum limit √n̄_s for reference.
    pub sql: f64,
    /// Sub-SQL feasibility margin 2 Γ_X √(n̄_p n̄_s); > 1 is necessary.
    pub sub_sql_margin: f64,
    /// Angle-offset correction factor for a signal `dn` away from the prior
    /// mean.
    pub epsilon: f64,
}

impl ErrorBudget {
    /// Assemble the budget at a given operating point. `dn` is the assumed
    /// signal-number deviation from the prior mean used for `epsilon`.
    pub fn evaluate(
        params: &InteractionParams,
        n_bar_p: f64,
        eta: f64,
        n_bar_s: f64,
        dn: f64,
    ) -> Result<Self> {
        validate_efficiency(eta)?;
        let corr = epsilon_correction(params, n_bar_p, eta, dn);
        let dn2_meas = corr.baseline_dn2;
        Ok(Self {
            dn2_meas,
            dphi_pert: params.gamma_x * n_bar_p.sqrt(),
            sql: sql(n_bar_s),
            sub_sql_margin: sub_sql_margin(params.gamma_x, n_bar_p, n_bar_s),
            epsilon: corr.epsilon,
        })
    }
}

/// Semiclassical readout imprecision from the probe's initial phase and
/// number uncertainties.
///
/// Returns `(phase_readout, optimal_readout)`: the error when the bare probe
/// phase is read out, and the error when the SPM-evading combination
/// `φ_p(t) − Γ_S n_p(t)` is read out instead.
pub fn semiclassical_error(
    dphi_p: f64,
    dn_p: f64,
    params: &InteractionParams,
) -> Result<(f64, f64)> {
    if params.gamma_x == 0.0 {
        return Err(AnalyticError::NoCoupling);
    }
    if !(dphi_p > 0.0) {
        return Err(AnalyticError::NonPositive { name: "dphi_p", value: dphi_p });
    }
    if dn_p < 0.0 {
        return Err(AnalyticError::NonPositive { name: "dn_p", value: dn_p });
    }
    let phase_readout = (dphi_p * dphi_p + params.gamma_s * params.gamma_s * dn_p * dn_p).sqrt()
        / params.gamma_x.abs();
    let optimal_readout = dphi_p / params.gamma_x.abs();
    Ok((phase_readout, optimal_readout))
}

/// Exact first and second moments of the measured quadrature `X_ζ` for a
/// coherent probe `|α⟩` against a signal Fock state.
///
/// `n_s` is accepted as a real number so that callers can take numerical
/// derivatives with respect to it; physical usage passes an integer.
pub fn exact_quadrature_moments(
    probe: &ProbePrep,
    params: &InteractionParams,
    zeta: f64,
    n_s: f64,
) -> MomentSet {
    let alpha = probe.alpha;
    let a2 = alpha * alpha;
    let gs = params.gamma_s;
    let gx = params.gamma_x;
    let e1 = (a2 * (gs.cos() - 1.0)).exp();
    let e2 = (a2 * ((2.0 * gs).cos() - 1.0)).exp();
    let phi = a2 * gs.sin() + gx * n_s + zeta;
    let delta = a2 * ((2.0 * gs).sin() - 2.0 * gs.sin()) + gs;
    let a = 0.5 + a2 * (1.0 - e1 * e1);
    let b = a2 * (e2 * delta.cos() - e1 * e1);
    let c = a2 * e2 * delta.sin();
    let mean_x = std::f64::consts::SQRT_2 * alpha * e1 * phi.cos();
    let var_x = a + b * (2.0 * phi).cos() - c * (2.0 * phi).sin();
    let transfer = -std::f64::consts::SQRT_2 * alpha * gx * e1 * phi.sin();
    MomentSet { e1, e2, phi, delta, a, b, c, mean_x, var_x, transfer }
}

/// Exact squared imprecision `(Δn_s)² = (ΔX_ζ)²/G²` from a [`MomentSet`].
pub fn exact_number_error(
    moments: &MomentSet,
    probe: &ProbePrep,
    params: &InteractionParams,
) -> Result<f64> {
    let s = moments.phi.sin();
    if s.abs() < SIN_PHI_FLOOR {
        return Err(AnalyticError::ZeroTransfer(s));
    }
    if params.gamma_x == 0.0 {
        return Err(AnalyticError::NoCoupling);
    }
    let a2 = probe.alpha * probe.alpha;
    let cot = moments.phi.cos() / s;
    let num = (moments.a + moments.b) * cot * cot - 2.0 * moments.c * cot
        + (moments.a - moments.b);
    Ok(num / (2.0 * a2 * params.gamma_x * params.gamma_x * moments.e1 * moments.e1))
}

/// Squared imprecision in the weak-nonlinearity/strong-probe regime with a
/// lossy measurement chain of efficiency η, at the asymptotic phase `phi`.
pub fn asymptotic_error_with_loss(
    params: &InteractionParams,
    n_bar_p: f64,
    chain: &DetectionChain,
    phi: f64,
) -> Result<f64> {
    validate_efficiency(chain.eta)?;
    if params.gamma_x == 0.0 {
        return Err(AnalyticError::NoCoupling);
    }
    let s = phi.sin();
    if s.abs() < SIN_PHI_FLOOR {
        return Err(AnalyticError::ZeroTransfer(s));
    }
    let eta = chain.eta;
    let gs = params.gamma_s;
    let gx = params.gamma_x;
    let cot = phi.cos() / s;
    let t = cot - 2.0 * eta * gs * n_bar_p;
    Ok((1.0 / (gx * gx))
        * ((1.0 + t * t) / (4.0 * eta * n_bar_p) + (1.0 - eta) * gs * gs * n_bar_p))
}

/// Squared imprecision at the optimal angle `cot φ = 2ηΓ_S n̄_p`, as a
/// function of n̄_p only.
pub fn error_at_optimal_angle(params: &InteractionParams, n_bar_p: f64, eta: f64) -> Result<f64> {
    validate_efficiency(eta)?;
    if params.gamma_x == 0.0 {
        return Err(AnalyticError::NoCoupling);
    }
    let gs = params.gamma_s;
    let gx = params.gamma_x;
    Ok((1.0 / (gx * gx)) * (1.0 / (4.0 * eta * n_bar_p) + (1.0 - eta) * gs * gs * n_bar_p))
}

/// Local-oscillator angle that realizes `cot φ̄ = 2ηΓ_S n̄_p` at the prior
/// mean signal number, with `φ̄ ∈ (0, π)` so the transfer function stays
/// nonzero. The result is reduced to `(−π, π]`.
pub fn optimal_homodyne_angle(
    params: &InteractionParams,
    n_bar_p: f64,
    n_bar_s: f64,
    eta: f64,
) -> f64 {
    // arccot with range (0, pi): atan2 keeps sin(phi) > 0.
    let phi_bar = 1.0_f64.atan2(2.0 * eta * params.gamma_s * n_bar_p);
    let zeta = phi_bar - params.gamma_s * n_bar_p - params.gamma_x * n_bar_s;
    wrap_angle(zeta)
}

/// Reduce an angle to `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let z = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if z == -PI {
        PI
    } else {
        z
    }
}

/// Probe photon number minimizing the optimal-angle error for 0 < η < 1.
pub fn optimal_probe_number(gamma_s: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(AnalyticError::InvalidEfficiency(eta));
    }
    if eta == 1.0 {
        return Err(AnalyticError::UnboundedOptimum);
    }
    if !(gamma_s > 0.0) {
        return Err(AnalyticError::NonPositive { name: "Gamma_S", value: gamma_s });
    }
    Ok(1.0 / (2.0 * gamma_s * (eta * (1.0 - eta)).sqrt()))
}

/// Minimum achievable squared imprecision over n̄_p at the optimal angle.
pub fn minimum_error(params: &InteractionParams, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(AnalyticError::InvalidEfficiency(eta));
    }
    if eta == 1.0 {
        return Err(AnalyticError::UnboundedOptimum);
    }
    if params.gamma_x == 0.0 {
        return Err(AnalyticError::NoCoupling);
    }
    Ok(params.gamma_s / (params.gamma_x * params.gamma_x) * ((1.0 - eta) / eta).sqrt())
}

/// Result of the angle-offset correction for a signal number `dn` away from
/// the prior mean used when fixing the homodyne angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCorrection {
    /// Correction factor ε = (1 + 4η²Γ_S²n̄_p²) Γ_X dn.
    pub epsilon: f64,
    /// Squared imprecision with the (1 + ε²) shot-noise inflation.
    pub modified_dn2: f64,
    /// The dn = 0 baseline (optimal-angle error).
    pub baseline_dn2: f64,
    /// True when Γ_X|dn| exceeds the regime where the linearization holds.
    pub beyond_linear_regime: bool,
}

/// Linearized correction to the optimal-angle error when the actual signal
/// number sits `dn` away from the prior mean the angle was tuned for.
///
/// The caller is responsible for being in the weak-nonlinearity regime; the
/// `beyond_linear_regime` flag makes the assumption observable rather than
/// enforced.
pub fn epsilon_correction(
    params: &InteractionParams,
    n_bar_p: f64,
    eta: f64,
    dn: f64,
) -> EpsilonCorrection {
    let gs = params.gamma_s;
    let gx = params.gamma_x;
    let q = 2.0 * eta * gs * n_bar_p;
    let epsilon = (1.0 + q * q) * gx * dn;
    let shot = 1.0 / (4.0 * eta * n_bar_p);
    let spm = (1.0 - eta) * gs * gs * n_bar_p;
    let inv_gx2 = 1.0 / (gx * gx);
    EpsilonCorrection {
        epsilon,
        modified_dn2: inv_gx2 * ((1.0 + epsilon * epsilon) * shot + spm),
        baseline_dn2: inv_gx2 * (shot + spm),
        beyond_linear_regime: (gx * dn).abs() > EPSILON_ADVISORY_THRESHOLD,
    }
}

/// Number-phase uncertainty budget of a coherent probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyProduct {
    /// Measurement imprecision Δn_s = 1/(2Γ_X√n̄_p).
    pub dn_meas: f64,
    /// Signal-phase perturbation Δφ_s = Γ_X√n̄_p.
    pub dphi_pert: f64,
    /// Their product; exactly 1/2 for a coherent probe.
    pub product: f64,
}

/// Imprecision/back-action pair for a coherent probe; the product saturates
/// the number-phase uncertainty bound at 1/2.
pub fn uncertainty_product(
    probe: &ProbePrep,
    params: &InteractionParams,
) -> Result<UncertaintyProduct> {
    if params.gamma_x == 0.0 {
        return Err(AnalyticError::NoCoupling);
    }
    let n_bar = probe.mean_photons();
    if !(n_bar > 0.0) {
        return Err(AnalyticError::NonPositive { name: "n_bar_p", value: n_bar });
    }
    let root = n_bar.sqrt();
    let dn_meas = 1.0 / (2.0 * params.gamma_x * root);
    let dphi_pert = params.gamma_x * root;
    Ok(UncertaintyProduct { dn_meas, dphi_pert, product: dn_meas * dphi_pert })
}

/// Standard quantum limit √n̄ for photon-number imprecision.
pub fn sql(n_bar: f64) -> f64 {
    n_bar.max(0.0).sqrt()
}

/// Sub-SQL feasibility margin 2 Γ_X √(n̄_p n̄_s); exceeding 1 is a necessary
/// condition for beating the SQL.
pub fn sub_sql_margin(gamma_x: f64, n_bar_p: f64, n_bar_s: f64) -> f64 {
    2.0 * gamma_x * (n_bar_p * n_bar_s).max(0.0).sqrt()
}
