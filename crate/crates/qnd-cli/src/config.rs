//! Run configuration: TOML sections, `--set` overrides, schema validation,
//! and resolution into core parameter types.
//!
//! Exactly one of the `[interaction]` section or the `[resonator]` section
//! may supply the nonlinear phase factors; likewise the unified efficiency
//! comes either from `[detection].eta` (explicit factors) or from the
//! resonator loading chain, never both.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use qnd_core::analytic::{optimal_homodyne_angle, InteractionParams, ProbePrep};
use qnd_core::bayes::{poisson_prior, LikelihoodMode, PhotonDistribution};
use qnd_core::resonator::{kerr_factors, loading_efficiency, ResonatorSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("bad --set override '{0}': expected section.key=value")]
    BadOverride(String),
    #[error("missing section [{0}] required by this command")]
    MissingSection(&'static str),
    #[error("missing key {0} required by this command")]
    MissingKey(&'static str),
    #[error("invalid value at {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("[interaction] and [resonator] both supply the nonlinearity; keep exactly one")]
    TwoNonlinearitySources,
    #[error("no nonlinearity source: provide [interaction] factors or a [resonator] spec")]
    NoNonlinearitySource,
    #[error("[detection].eta conflicts with the [resonator] efficiency chain; drop one")]
    TwoEfficiencySources,
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Homodyne angle: a number in radians, or `"auto-optimal"` to resolve the
/// back-action-evading angle from the other parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZetaSpec {
    Angle(f64),
    Named(String),
}

impl ZetaSpec {
    fn validate(&self) -> Result<()> {
        match self {
            ZetaSpec::Angle(z) if z.is_finite() => Ok(()),
            ZetaSpec::Angle(z) => Err(ConfigError::Invalid {
                key: "detection.zeta",
                reason: format!("angle must be finite, got {z}"),
            }),
            ZetaSpec::Named(s) if s == "auto-optimal" => Ok(()),
            ZetaSpec::Named(s) => Err(ConfigError::Invalid {
                key: "detection.zeta",
                reason: format!("unknown angle spec '{s}' (use a number or \"auto-optimal\")"),
            }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSection {
    /// Dimensionless SPM factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_s: Option<f64>,
    /// Dimensionless XPM factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_x: Option<f64>,
    /// SPM rate in rad/s (requires `tau`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spm_rate: Option<f64>,
    /// XPM rate in rad/s (requires `tau`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xpm_rate: Option<f64>,
    /// Effective interaction time in seconds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bar_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    /// Unified quantum efficiency; omit when a [resonator] chain is present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub zeta: ZetaSpec,
    /// Outcome likelihood backing posteriors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likelihood: Option<LikelihoodMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub n_bar_s: f64,
    /// Photon-number window `[lo, hi]`; default `[0, n̄ + 10√n̄ + 20]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSection {
    pub q_load: f64,
    pub q_intr: f64,
    pub wavelength: f64,
    pub n0: f64,
    pub n2: f64,
    pub v_eff: f64,
    /// Detection efficiency beyond cavity loading; when omitted it defaults
    /// to the value that places the total efficiency at the 0.9 working
    /// point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_extra: Option<f64>,
}

pub const DEFAULT_ETA_WORKING_POINT: f64 = 0.9;

impl ResonatorSection {
    pub fn to_spec(&self) -> Result<ResonatorSpec> {
        let eta_load = loading_efficiency(self.q_load, self.q_intr).map_err(|e| {
            ConfigError::Invalid { key: "resonator", reason: e.to_string() }
        })?;
        let eta_extra = match self.eta_extra {
            Some(v) => v,
            None => {
                let v = DEFAULT_ETA_WORKING_POINT / eta_load;
                if v > 1.0 {
                    return Err(ConfigError::Invalid {
                        key: "resonator.eta_extra",
                        reason: format!(
                            "default working point {DEFAULT_ETA_WORKING_POINT} unreachable: \
                             loading efficiency is only {eta_load}"
                        ),
                    });
                }
                v
            }
        };
        let spec = ResonatorSpec {
            q_load: self.q_load,
            q_intr: self.q_intr,
            wavelength: self.wavelength,
            n0: self.n0,
            n2: self.n2,
            v_eff: self.v_eff,
            eta_extra,
        };
        spec.validate()
            .map_err(|e| ConfigError::Invalid { key: "resonator", reason: e.to_string() })?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NBarP,
    Eta,
    QLoad,
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepVariable::NBarP => write!(f, "n_bar_p"),
            SweepVariable::Eta => write!(f, "eta"),
            SweepVariable::QLoad => write!(f, "q_load"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScale {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: SweepScale,
}

impl SweepSection {
    /// Ordered grid values; rejects degenerate ranges.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(ConfigError::Invalid {
                key: "sweep.points",
                reason: format!("need at least 2 points, got {}", self.points),
            });
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(ConfigError::Invalid {
                key: "sweep.min/max",
                reason: format!("degenerate range [{}, {}]", self.min, self.max),
            });
        }
        if self.scale == SweepScale::Log && self.min <= 0.0 {
            return Err(ConfigError::Invalid {
                key: "sweep.min",
                reason: "log scale requires a positive lower bound".into(),
            });
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    SweepScale::Linear => self.min + t * (self.max - self.min),
                    SweepScale::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Probe amplitude for brute-force checks; α² ≤ 100.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Fock-space truncation override.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Quadrature grid step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngSection {
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonator: Option<ResonatorSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<RngSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl RunConfig {
    /// Parse a TOML file and apply `--set section.key=value` overrides
    /// before schema validation.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let config: RunConfig =
            value.try_into().map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate_shape()?;
        Ok(config)
    }

    /// Structural checks that do not depend on the command being run.
    fn validate_shape(&self) -> Result<()> {
        if let (Some(i), Some(_)) = (&self.interaction, &self.resonator) {
            let has_factors =
                i.gamma_s.is_some() || i.gamma_x.is_some() || i.spm_rate.is_some();
            if has_factors {
                return Err(ConfigError::TwoNonlinearitySources);
            }
        }
        if self.resonator.is_some() {
            if let Some(d) = &self.detection {
                if d.eta.is_some() {
                    return Err(ConfigError::TwoEfficiencySources);
                }
            }
        }
        if let Some(d) = &self.detection {
            d.zeta.validate()?;
            if let Some(eta) = d.eta {
                if !(eta > 0.0 && eta <= 1.0) {
                    return Err(ConfigError::Invalid {
                        key: "detection.eta",
                        reason: format!("must lie in (0, 1], got {eta}"),
                    });
                }
            }
        }
        if let Some(r) = &self.resonator {
            r.to_spec()?;
        }
        if let Some(p) = &self.prior {
            if !(p.n_bar_s >= 0.0) || !p.n_bar_s.is_finite() {
                return Err(ConfigError::Invalid {
                    key: "prior.n_bar_s",
                    reason: format!("must be non-negative, got {}", p.n_bar_s),
                });
            }
            if let Some([lo, hi]) = p.window {
                if hi < lo {
                    return Err(ConfigError::Invalid {
                        key: "prior.window",
                        reason: format!("empty window [{lo}, {hi}]"),
                    });
                }
            }
        }
        if let Some(s) = &self.sweep {
            s.grid()?;
        }
        Ok(())
    }

    /// Nonlinear phase factors from whichever single source the config has.
    pub fn interaction_params(&self) -> Result<InteractionParams> {
        match (&self.interaction, &self.resonator) {
            (Some(i), None) => {
                if let (Some(gs), Some(gx)) = (i.gamma_s, i.gamma_x) {
                    InteractionParams::from_factors(gs, gx).map_err(|e| ConfigError::Invalid {
                        key: "interaction",
                        reason: e.to_string(),
                    })
                } else if let (Some(rs), Some(rx), Some(tau)) = (i.spm_rate, i.xpm_rate, i.tau) {
                    InteractionParams::from_rates(rs, rx, tau).map_err(|e| {
                        ConfigError::Invalid { key: "interaction", reason: e.to_string() }
                    })
                } else {
                    Err(ConfigError::MissingKey(
                        "interaction.gamma_s/gamma_x (or spm_rate/xpm_rate/tau)",
                    ))
                }
            }
            (None, Some(r)) => {
                let spec = r.to_spec()?;
                let (gs, gx) = kerr_factors(&spec).map_err(|e| ConfigError::Invalid {
                    key: "resonator",
                    reason: e.to_string(),
                })?;
                Ok(InteractionParams::from_factors(gs, gx).expect("finite factors"))
            }
            (Some(_), Some(_)) => Err(ConfigError::TwoNonlinearitySources),
            (None, None) => Err(ConfigError::NoNonlinearitySource),
        }
    }

    /// Unified efficiency: `[detection].eta`, or the resonator loading chain.
    pub fn efficiency(&self) -> Result<f64> {
        if let Some(r) = &self.resonator {
            let spec = r.to_spec()?;
            let eta_load = loading_efficiency(spec.q_load, spec.q_intr)
                .map_err(|e| ConfigError::Invalid { key: "resonator", reason: e.to_string() })?;
            return Ok(eta_load * spec.eta_extra);
        }
        match &self.detection {
            Some(d) => d.eta.ok_or(ConfigError::MissingKey("detection.eta")),
            None => Err(ConfigError::MissingSection("detection")),
        }
    }

    pub fn probe(&self) -> Result<ProbePrep> {
        let section = self.probe.as_ref().ok_or(ConfigError::MissingSection("probe"))?;
        let prep = match (section.alpha, section.n_bar_p) {
            (Some(a), None) => ProbePrep::from_alpha(a),
            (None, Some(n)) => ProbePrep::from_mean_photons(n),
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid {
                    key: "probe",
                    reason: "give either alpha or n_bar_p, not both".into(),
                })
            }
            (None, None) => return Err(ConfigError::MissingKey("probe.alpha or probe.n_bar_p")),
        };
        prep.map_err(|e| ConfigError::Invalid { key: "probe", reason: e.to_string() })
    }

    pub fn prior_section(&self) -> Result<&PriorSection> {
        self.prior.as_ref().ok_or(ConfigError::MissingSection("prior"))
    }

    pub fn prior_distribution(&self) -> Result<PhotonDistribution> {
        let p = self.prior_section()?;
        let window = p.window.map(|[lo, hi]| (lo, hi));
        poisson_prior(p.n_bar_s, window)
            .map_err(|e| ConfigError::Invalid { key: "prior", reason: e.to_string() })
    }

    pub fn detection(&self) -> Result<&DetectionSection> {
        self.detection.as_ref().ok_or(ConfigError::MissingSection("detection"))
    }

    pub fn likelihood_mode(&self) -> LikelihoodMode {
        self.detection
            .as_ref()
            .and_then(|d| d.likelihood)
            .unwrap_or_default()
    }

    /// Resolve the homodyne angle, either explicit or the back-action-evading
    /// optimum for the prior mean.
    pub fn resolve_zeta(
        &self,
        params: &InteractionParams,
        n_bar_p: f64,
        n_bar_s: f64,
        eta: f64,
    ) -> Result<f64> {
        match &self.detection()?.zeta {
            ZetaSpec::Angle(z) => Ok(*z),
            ZetaSpec::Named(_) => Ok(optimal_homodyne_angle(params, n_bar_p, n_bar_s, eta)),
        }
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.rng.as_ref().map(|r| r.seed))
            .ok_or(ConfigError::MissingKey("rng.seed (or --seed)"))
    }

    pub fn sweep_section(&self) -> Result<&SweepSection> {
        self.sweep.as_ref().ok_or(ConfigError::MissingSection("sweep"))
    }

    pub fn resonator_section(&self) -> Result<&ResonatorSection> {
        self.resonator.as_ref().ok_or(ConfigError::MissingSection("resonator"))
    }
}

/// Apply one `section.key=value` override onto the raw TOML tree. The value
/// is parsed as a TOML literal, falling back to a bare string.
fn apply_override(root: &mut toml::Value, item: &str) -> Result<()> {
    let (path, raw_value) =
        item.split_once('=').ok_or_else(|| ConfigError::BadOverride(item.to_string()))?;
    let segments: Vec<&str> = path.trim().split('.').collect();
    if segments.len() < 2 || segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::BadOverride(item.to_string()));
    }
    let parsed: toml::Value = match format!("v = {}", raw_value.trim()).parse::<toml::Table>() {
        Ok(table) => table["v"].clone(),
        Err(_) => toml::Value::String(raw_value.trim().to_string()),
    };
    let mut node = root;
    for segment in &segments[..segments.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| ConfigError::BadOverride(item.to_string()))?;
        node = table
            .entry(segment.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table =
        node.as_table_mut().ok_or_else(|| ConfigError::BadOverride(item.to_string()))?;
    table.insert(segments[segments.len() - 1].to_string(), parsed);
    Ok(())
}
