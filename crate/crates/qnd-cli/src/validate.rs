//! Brute-force validation harness: runs the oracle-versus-closed-form
//! battery at desk scale and reports one row per check.
//!
//! The `--corrupt` knob deliberately damages one input of a check so the
//! harness can demonstrate its own sensitivity; it is a self-test, not a
//! measurement mode.

use qnd_core::analytic::{
    exact_quadrature_moments, uncertainty_product, InteractionParams, ProbePrep,
};
use qnd_core::bayes::{
    kraus_amplitude, kraus_density, posterior, KrausParams, PhotonDistribution,
};
use qnd_core::fock::{
    homodyne_density, joint_conditional_state, kerr_phase_evolve, oracle_moments, FockVector,
    JointState,
};
use num_complex::Complex64;

use crate::config::{OutputFormat, RunConfig};
use crate::envelope::{validation_csv, validation_table, CheckRow, Envelope, Payload};
use crate::commands::OutputOpts;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Corruption {
    /// Flip the sign of Gamma_X on the closed-form side of the moments check.
    XpmSign,
}

struct OracleConfig {
    alpha: f64,
    grid_step: f64,
}

fn oracle_config(cfg: &RunConfig) -> Result<OracleConfig, CliError> {
    let section = cfg
        .oracle
        .as_ref()
        .ok_or(crate::config::ConfigError::MissingSection("oracle"))?;
    let alpha = section.alpha.unwrap_or(3.0);
    if !(alpha >= 0.0) || alpha * alpha > 100.0 {
        return Err(CliError::Config(crate::config::ConfigError::Invalid {
            key: "oracle.alpha",
            reason: format!("brute-force scale is capped at alpha^2 <= 100, got alpha = {alpha}"),
        }));
    }
    let grid_step = section.grid_step.unwrap_or(1e-3);
    if !(grid_step > 0.0 && grid_step <= 1e-2) {
        return Err(CliError::Config(crate::config::ConfigError::Invalid {
            key: "oracle.grid_step",
            reason: format!("step must lie in (0, 1e-2], got {grid_step}"),
        }));
    }
    Ok(OracleConfig { alpha, grid_step })
}

fn evolved_probe(alpha: f64, gamma_s: f64, gamma_x: f64, n_s: f64) -> Result<FockVector, CliError> {
    let coherent = FockVector::coherent_auto(alpha)
        .map_err(|e| CliError::Runtime(format!("oracle state construction: {e}")))?;
    Ok(kerr_phase_evolve(&coherent, gamma_s, gamma_x, n_s))
}

fn trapezoid(span: f64, step: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let n = (2.0 * span / step).ceil() as usize;
    let h = 2.0 * span / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let x = -span + h * i as f64;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * f(x) * h;
    }
    sum
}

/// Run the whole battery; rows carry the measured deviation and tolerance.
pub fn run_checks(cfg: &RunConfig, corrupt: Option<Corruption>) -> Result<Vec<CheckRow>, CliError> {
    let oracle = oracle_config(cfg)?;
    let mut checks = Vec::new();
    let push = |check: &'static str, measured: f64, tolerance: f64, rows: &mut Vec<CheckRow>| {
        rows.push(CheckRow { check, passed: measured <= tolerance, measured, tolerance });
    };

    // 1. coherent-state construction: norm within the truncation budget
    {
        let v = FockVector::coherent_auto(oracle.alpha)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        push("coherent-norm", (v.norm_sqr() - 1.0).abs(), 1e-10, &mut checks);
    }

    // 2. oracle moments vs closed forms over the standard desk grid
    {
        let flip = if corrupt == Some(Corruption::XpmSign) { -1.0 } else { 1.0 };
        let mut worst = 0.0f64;
        for alpha in [1.0, 2.0, 3.0] {
            for gamma_s in [0.01, 0.05] {
                let gamma_x = 2.0 * gamma_s;
                for n_s in [0.0, 1.0, 5.0] {
                    for zeta in [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
                        let probe = ProbePrep::from_alpha(alpha)
                            .map_err(|e| CliError::Runtime(e.to_string()))?;
                        let params =
                            InteractionParams::from_factors(gamma_s, flip * gamma_x)
                                .map_err(|e| CliError::Runtime(e.to_string()))?;
                        let m = exact_quadrature_moments(&probe, &params, zeta, n_s);
                        let vec = evolved_probe(alpha, gamma_s, gamma_x, n_s)?;
                        let (mean_x, mean_x2) = oracle_moments(&vec, zeta);
                        worst = worst
                            .max((mean_x - m.mean_x).abs() / m.mean_x.abs().max(1e-12));
                        worst = worst
                            .max((mean_x2 - m.mean_x_sqr()).abs() / m.mean_x_sqr().abs().max(1e-12));
                    }
                }
            }
        }
        push("moments-closed-form", worst, 1e-8, &mut checks);
    }

    // 3. coherent phase-average identity, series vs closed form
    {
        let v = FockVector::coherent_auto(2.0).map_err(|e| CliError::Runtime(e.to_string()))?;
        let lambda = 0.3f64;
        let series = v.number_characteristic(lambda);
        let closed = ((Complex64::new(0.0, lambda).exp() - 1.0) * 4.0).exp();
        push("phase-average-lemma", (series - closed).norm(), 1e-10, &mut checks);
    }

    // 4-7. kernel battery at Gamma_S alpha^2 = 0.1, phase-quadrature angle
    {
        let alpha = oracle.alpha.max(1.0);
        let gamma_s = 0.1 / (alpha * alpha);
        let gamma_x = 2.0 * gamma_s;
        let zeta = std::f64::consts::FRAC_PI_2;
        let kp = KrausParams { alpha, gamma_s, gamma_x, zeta };
        let span = std::f64::consts::SQRT_2 * alpha + 12.0;

        let vec3 = evolved_probe(alpha, gamma_s, gamma_x, 3.0)?;
        let integral = trapezoid(span, oracle.grid_step, |x| homodyne_density(&vec3, x, zeta));
        push("homodyne-normalization", (integral - 1.0).abs(), 1e-8, &mut checks);

        let mut worst_norm = 0.0f64;
        for n in 0..=10usize {
            let integral = trapezoid(span, oracle.grid_step, |x| {
                kraus_amplitude(x, n, &kp).map(|a| a.norm_sqr()).unwrap_or(0.0)
            });
            worst_norm = worst_norm.max((integral - 1.0).abs());
        }
        push("kernel-normalization", worst_norm, 1e-6, &mut checks);

        let mut sup_oracle = 0.0f64;
        let mut sup_gauss = 0.0f64;
        for n in [0usize, 3, 10] {
            let vec = evolved_probe(alpha, gamma_s, gamma_x, n as f64)?;
            let steps = (2.0 * span / oracle.grid_step).ceil() as usize;
            for i in 0..=steps {
                let x = -span + 2.0 * span * i as f64 / steps as f64;
                let kernel = kraus_amplitude(x, n, &kp)
                    .map_err(|e| CliError::Runtime(e.to_string()))?
                    .norm_sqr();
                sup_oracle = sup_oracle.max((kernel - homodyne_density(&vec, x, zeta)).abs());
                sup_gauss = sup_gauss.max((kernel - kraus_density(x, n, &kp)).abs());
            }
        }
        push("kernel-vs-oracle", sup_oracle, 2e-2, &mut checks);
        push("gaussian-vs-kernel", sup_gauss, 1e-9, &mut checks);
    }

    // 8. uncertainty product saturates 1/2 for coherent probes
    {
        let params = InteractionParams::from_factors(4.25e-7, 8.5e-7)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut worst = 0.0f64;
        for n_bar in [1e2, 1e4, 1e6, 1e8] {
            let probe = ProbePrep::from_mean_photons(n_bar)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let u = uncertainty_product(&probe, &params)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            worst = worst.max((u.product - 0.5).abs());
        }
        push("uncertainty-product", worst, 1e-15, &mut checks);
    }

    // 9. joint-state marginal equals the prior-weighted branch densities
    {
        let signal =
            FockVector::coherent_auto(1.5).map_err(|e| CliError::Runtime(e.to_string()))?;
        let params = InteractionParams::from_factors(0.02, 0.04)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let joint = JointState::new(&signal, 2.0, &params)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let zeta = 0.4;
        let mut worst = 0.0f64;
        for &x in &[-2.0, 0.5, 2.5] {
            let by_branches: f64 = (0..signal.dim())
                .map(|n| {
                    signal.amplitudes()[n].norm_sqr() * homodyne_density(joint.branch(n), x, zeta)
                })
                .sum();
            let w = joint.marginal_density(zeta, x);
            worst = worst.max((by_branches - w).abs() / w.max(1.0));
        }
        push("joint-marginal-consistency", worst, 1e-10, &mut checks);
    }

    // 10. Bayesian posterior vs conditioned joint state (total variation)
    {
        let signal =
            FockVector::coherent_auto(2.0).map_err(|e| CliError::Runtime(e.to_string()))?;
        let prior = PhotonDistribution::from_weights(0, signal.number_pmf(), 0.0)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let alpha = 3.0;
        let gamma_s = 0.2 / 9.0;
        let gamma_x = 2.0 * gamma_s;
        let zeta = std::f64::consts::FRAC_PI_2;
        let params = InteractionParams::from_factors(gamma_s, gamma_x)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let kp = KrausParams { alpha, gamma_s, gamma_x, zeta };
        let center = kp.outcome_mean(4.0);
        let mut worst = 0.0f64;
        for dx in [-1.0, 0.0, 1.0] {
            let x = center + dx;
            let (oracle_post, _) = joint_conditional_state(&signal, alpha, &params, zeta, x)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let (bayes_post, _) = posterior(x, &prior, &kp)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let tv: f64 = oracle_post
                .number_pmf()
                .iter()
                .zip(bayes_post.pmf())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / 2.0;
            worst = worst.max(tv);
        }
        push("posterior-vs-joint-state", worst, 2e-2, &mut checks);
    }

    Ok(checks)
}

/// Run, report, and convert any failure into exit code 3.
pub fn cmd_validate(
    cfg: &RunConfig,
    corrupt: Option<Corruption>,
    io: &OutputOpts,
) -> Result<(), CliError> {
    let checks = run_checks(cfg, corrupt)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let total = checks.len();

    match io.format_for_validate(cfg) {
        Some(OutputFormat::Json) => {
            let envelope = Envelope::new(
                "validate",
                cfg,
                Payload::Validation { passed: failed == 0, checks: checks.clone() },
            );
            io.emit_report(cfg, &envelope.to_json())?;
        }
        Some(OutputFormat::Csv) => {
            io.emit_report(cfg, &validation_csv(&checks))?;
        }
        None => {
            if !io.quiet {
                print!("{}", validation_table(&checks));
            }
        }
    }
    if failed > 0 {
        return Err(CliError::ValidationFailed { failed, total });
    }
    Ok(())
}

impl OutputOpts {
    /// Validate prints a text table by default; an explicit format or output
    /// path switches to machine-readable output.
    fn format_for_validate(&self, cfg: &RunConfig) -> Option<OutputFormat> {
        if let Some(f) = self.format.or_else(|| cfg.output.as_ref().and_then(|o| o.format)) {
            return Some(f);
        }
        if self.out.is_some() || cfg.output.as_ref().is_some_and(|o| o.path.is_some()) {
            return Some(OutputFormat::Csv);
        }
        None
    }

    fn emit_report(&self, cfg: &RunConfig, content: &str) -> Result<(), CliError> {
        match self
            .out
            .as_deref()
            .or_else(|| cfg.output.as_ref().and_then(|o| o.path.as_deref()))
        {
            Some(path) => {
                std::fs::write(path, content)?;
                if !self.quiet {
                    eprintln!("wrote {}", path.display());
                }
                Ok(())
            }
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}
