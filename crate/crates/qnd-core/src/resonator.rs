//! Physical-parameter layer: map whispering-gallery microresonator specs to
//! SPM/XPM phase factors, loading efficiency, optimal probe photon number,
//! pump power, and a complete design report.
//!
//! The factor Γ_X = 2Γ_S is the non-resonant Kerr value and is imposed only
//! here; the math layers keep the two factors independent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{
    minimum_error, optimal_probe_number, sql, sub_sql_margin, AnalyticError, InteractionParams,
};
use crate::constants::{HBAR, SPEED_OF_LIGHT};

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error("loaded quality factor {q_load} exceeds intrinsic {q_intr}")]
    OvercoupledBeyondIntrinsic { q_load: f64, q_intr: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("eta_extra must lie in (0, 1], got {0}")]
    InvalidEtaExtra(f64),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

type Result<T> = std::result::Result<T, DesignError>;

/// Whispering-gallery resonator and detection-chain description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorSpec {
    /// Loaded quality factor.
    pub q_load: f64,
    /// Intrinsic (material-limited) quality factor.
    pub q_intr: f64,
    /// Vacuum wavelength in meters.
    pub wavelength: f64,
    /// Refractive index of the host material.
    pub n0: f64,
    /// Kerr coefficient n₂ in m²/W.
    pub n2: f64,
    /// Effective mode volume in m³.
    pub v_eff: f64,
    /// Detection-chain efficiency beyond cavity loading, ∈ (0, 1].
    pub eta_extra: f64,
}

impl ResonatorSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("q_load", self.q_load),
            ("q_intr", self.q_intr),
            ("wavelength", self.wavelength),
            ("n0", self.n0),
            ("n2", self.n2),
            ("v_eff", self.v_eff),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(DesignError::NonPositive { name, value });
            }
        }
        if self.q_load > self.q_intr {
            return Err(DesignError::OvercoupledBeyondIntrinsic {
                q_load: self.q_load,
                q_intr: self.q_intr,
            });
        }
        if !(self.eta_extra > 0.0 && self.eta_extra <= 1.0) {
            return Err(DesignError::InvalidEtaExtra(self.eta_extra));
        }
        Ok(())
    }

    /// Optical angular frequency ω₀ = 2πc/λ.
    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.wavelength
    }
}

/// Kerr phase factors per interaction time: `Γ_X = 2 Q_load (n₂/n₀)(ħω₀c/V_eff)`
/// and `Γ_S = Γ_X/2`. Returned as `(Γ_S, Γ_X)`.
pub fn kerr_factors(spec: &ResonatorSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let omega0 = spec.omega0();
    let gamma_x =
        2.0 * spec.q_load * (spec.n2 / spec.n0) * (HBAR * omega0 * SPEED_OF_LIGHT / spec.v_eff);
    Ok((gamma_x / 2.0, gamma_x))
}

/// Cavity loading efficiency η_load = 1 − Q_load/Q_intr.
pub fn loading_efficiency(q_load: f64, q_intr: f64) -> Result<f64> {
    if !(q_load > 0.0) {
        return Err(DesignError::NonPositive { name: "q_load", value: q_load });
    }
    if !(q_intr > 0.0) {
        return Err(DesignError::NonPositive { name: "q_intr", value: q_intr });
    }
    if q_load > q_intr {
        return Err(DesignError::OvercoupledBeyondIntrinsic { q_load, q_intr });
    }
    Ok(1.0 - q_load / q_intr)
}

/// Pump power sustaining `n̄_p` intracavity quanta: `P = ħω₀² n̄_p / (2 Q_load)`.
pub fn pump_power(spec: &ResonatorSpec, n_bar_p: f64) -> f64 {
    let omega0 = spec.omega0();
    HBAR * omega0 * omega0 * n_bar_p / (2.0 * spec.q_load)
}

/// Complete design point at the optimal probe photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub gamma_s: f64,
    pub gamma_x: f64,
    pub eta_load: f64,
    pub eta_total: f64,
    /// Probe photon number minimizing the measurement error.
    pub n_p_opt: f64,
    /// Squared imprecision at the optimum.
    pub dn2_min: f64,
    /// Pump power in watts sustaining `n_p_opt`.
    pub pump_power_w: f64,
    /// Signal photon number the margin and SQL refer to.
    pub n_bar_s: f64,
    /// Sub-SQL feasibility margin 2Γ_X√(n̄_p n̄_s) at the optimum.
    pub sub_sql_margin: f64,
    /// Standard quantum limit √n̄_s.
    pub sql: f64,
}

/// Evaluate the full design chain for a resonator spec and a target signal
/// photon number.
pub fn design_report(spec: &ResonatorSpec, n_bar_s: f64) -> Result<DesignReport> {
    let (gamma_s, gamma_x) = kerr_factors(spec)?;
    let eta_load = loading_efficiency(spec.q_load, spec.q_intr)?;
    let eta_total = eta_load * spec.eta_extra;
    // eta_total == 1 has no finite optimum; surfaced as a typed error
    let n_p_opt = optimal_probe_number(gamma_s, eta_total)?;
    let params = InteractionParams::from_factors(gamma_s, gamma_x)?;
    let dn2_min = minimum_error(&params, eta_total)?;
    Ok(DesignReport {
        gamma_s,
        gamma_x,
        eta_load,
        eta_total,
        n_p_opt,
        dn2_min,
        pump_power_w: pump_power(spec, n_p_opt),
        n_bar_s,
        sub_sql_margin: sub_sql_margin(gamma_x, n_p_opt, n_bar_s),
        sql: sql(n_bar_s),
    })
}
