//! Command implementations: design estimate, error-curve sweeps, posterior
//! distributions, and the seeded sampling stream.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use qnd_core::analytic::{error_at_optimal_angle, sql, InteractionParams};
use qnd_core::bayes::{
    posterior_with_mode, sample_record, KrausParams, MeasurementRecord, PhotonDistribution,
};
use qnd_core::resonator::{design_report, kerr_factors, loading_efficiency, ResonatorSpec};
use qnd_core::rng::derive_seed;

use crate::config::{OutputFormat, RunConfig, SweepVariable};
use crate::envelope::{curve_csv, distribution_csv, Envelope, Payload, PosteriorPayload};
use crate::error::CliError;

/// Output routing shared by all commands.
pub struct OutputOpts {
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
    pub quiet: bool,
    pub timestamp: bool,
}

impl OutputOpts {
    /// Effective output path: flag wins over the `[output]` section.
    fn path<'a>(&'a self, cfg: &'a RunConfig) -> Option<&'a Path> {
        self.out
            .as_deref()
            .or_else(|| cfg.output.as_ref().and_then(|o| o.path.as_deref()))
    }

    fn format(&self, cfg: &RunConfig, default: OutputFormat) -> OutputFormat {
        self.format
            .or_else(|| cfg.output.as_ref().and_then(|o| o.format))
            .unwrap_or(default)
    }

    fn emit(&self, cfg: &RunConfig, content: &str) -> Result<(), CliError> {
        match self.path(cfg) {
            Some(path) => {
                std::fs::write(path, content)?;
                if !self.quiet {
                    eprintln!("wrote {}", path.display());
                }
            }
            None => {
                print!("{content}");
                std::io::stdout().flush()?;
            }
        }
        Ok(())
    }
}

/// Full design report for a resonator spec (JSON).
pub fn cmd_estimate(cfg: &RunConfig, io: &OutputOpts) -> Result<(), CliError> {
    let spec = cfg.resonator_section()?.to_spec()?;
    let n_bar_s = cfg.prior_section()?.n_bar_s;
    let report = design_report(&spec, n_bar_s)
        .map_err(|e| CliError::Runtime(format!("design evaluation failed: {e}")))?;
    let envelope = Envelope::new("estimate", cfg, Payload::Report(report))
        .with_timestamp(self::stamp(io));
    io.emit(cfg, &envelope.to_json())
}

fn stamp(io: &OutputOpts) -> bool {
    io.timestamp
}

/// Closed-form minimum over the probe number; the infimum 0 is reported at
/// eta = 1 or Gamma_S = 0 where no finite optimum exists.
fn min_error_formula(gamma_s: f64, gamma_x: f64, eta: f64) -> f64 {
    gamma_s / (gamma_x * gamma_x) * ((1.0 - eta) / eta).max(0.0).sqrt()
}

pub const CURVE_COLUMNS: [&str; 4] =
    ["sweep_var", "dn2_at_optimal_angle", "dn2_min_formula", "sql_ratio"];

/// Measurement-error sweep over n̄_p, η, or Q_load (CSV).
pub fn cmd_error_curve(cfg: &RunConfig, io: &OutputOpts) -> Result<(), CliError> {
    let sweep = cfg.sweep_section()?;
    let grid = sweep.grid()?;
    let n_bar_s = cfg.prior_section()?.n_bar_s;
    if !(n_bar_s > 0.0) {
        return Err(CliError::Config(crate::config::ConfigError::Invalid {
            key: "prior.n_bar_s",
            reason: "error-curve needs a positive signal photon number for the SQL column".into(),
        }));
    }
    let sql_ref = sql(n_bar_s);

    let rows: Result<Vec<Vec<f64>>, CliError> = match sweep.variable {
        SweepVariable::NBarP => {
            let params = cfg.interaction_params()?;
            let eta = cfg.efficiency()?;
            grid.par_iter()
                .map(|&n_p| curve_row(n_p, &params, n_p, eta, sql_ref))
                .collect()
        }
        SweepVariable::Eta => {
            let params = cfg.interaction_params()?;
            let n_p = cfg.probe()?.mean_photons();
            grid.par_iter()
                .map(|&eta| curve_row(eta, &params, n_p, eta, sql_ref))
                .collect()
        }
        SweepVariable::QLoad => {
            let section = cfg.resonator_section()?;
            let base = section.to_spec()?;
            let fixed_n_p = cfg.probe.as_ref().map(|_| cfg.probe()).transpose()?;
            grid.par_iter()
                .map(|&q| {
                    let spec = ResonatorSpec { q_load: q, ..base };
                    spec.validate().map_err(|e| {
                        CliError::Config(crate::config::ConfigError::Invalid {
                            key: "sweep",
                            reason: format!("q_load = {q}: {e}"),
                        })
                    })?;
                    let (gs, gx) = kerr_factors(&spec)
                        .map_err(|e| CliError::Runtime(e.to_string()))?;
                    let eta = loading_efficiency(q, spec.q_intr)
                        .map_err(|e| CliError::Runtime(e.to_string()))?
                        * spec.eta_extra;
                    let params = InteractionParams::from_factors(gs, gx)
                        .map_err(|e| CliError::Runtime(e.to_string()))?;
                    let n_p = match &fixed_n_p {
                        Some(p) => p.mean_photons(),
                        None => qnd_core::analytic::optimal_probe_number(gs, eta)
                            .map_err(|e| CliError::Runtime(e.to_string()))?,
                    };
                    curve_row(q, &params, n_p, eta, sql_ref)
                })
                .collect()
        }
    };
    let rows = rows?;

    match io.format(cfg, OutputFormat::Csv) {
        OutputFormat::Csv => io.emit(cfg, &curve_csv(&CURVE_COLUMNS, &rows)),
        OutputFormat::Json => {
            let envelope = Envelope::new(
                "error-curve",
                cfg,
                Payload::Curve { columns: CURVE_COLUMNS.to_vec(), rows },
            )
            .with_timestamp(stamp(io));
            io.emit(cfg, &envelope.to_json())
        }
    }
}

fn curve_row(
    var: f64,
    params: &InteractionParams,
    n_bar_p: f64,
    eta: f64,
    sql_ref: f64,
) -> Result<Vec<f64>, CliError> {
    let dn2 = error_at_optimal_angle(params, n_bar_p, eta)
        .map_err(|e| CliError::Runtime(format!("at sweep point {var}: {e}")))?;
    let dn2_min = min_error_formula(params.gamma_s, params.gamma_x, eta);
    Ok(vec![var, dn2, dn2_min, dn2.sqrt() / sql_ref])
}

/// Shared resolution for the inference commands.
struct InferenceSetup {
    kp: KrausParams,
    prior: PhotonDistribution,
    mode: qnd_core::bayes::LikelihoodMode,
}

fn inference_setup(cfg: &RunConfig) -> Result<InferenceSetup, CliError> {
    let params = cfg.interaction_params()?;
    let probe = cfg.probe()?;
    let eta = cfg.efficiency()?;
    let prior_mean = cfg.prior_section()?.n_bar_s;
    let prior = cfg.prior_distribution()?;
    let zeta = cfg.resolve_zeta(&params, probe.mean_photons(), prior_mean, eta)?;
    Ok(InferenceSetup {
        kp: KrausParams {
            alpha: probe.alpha,
            gamma_s: params.gamma_s,
            gamma_x: params.gamma_x,
            zeta,
        },
        prior,
        mode: cfg.likelihood_mode(),
    })
}

/// How the conditioning outcome is chosen.
#[derive(Debug, Clone, Copy)]
pub enum OutcomeArg {
    Value(f64),
    Sample,
}

impl std::str::FromStr for OutcomeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "sample" {
            return Ok(OutcomeArg::Sample);
        }
        s.parse::<f64>()
            .map(OutcomeArg::Value)
            .map_err(|_| format!("--x expects a number or 'sample', got '{s}'"))
    }
}

/// Prior/posterior distribution files for one homodyne outcome.
pub fn cmd_posterior(cfg: &RunConfig, x_arg: &OutcomeArg, io: &OutputOpts) -> Result<(), CliError> {
    let setup = inference_setup(cfg)?;
    let (x, sampled, seed) = match x_arg {
        OutcomeArg::Value(v) => (*v, None, None),
        OutcomeArg::Sample => {
            let seed = cfg.seed(io.seed)?;
            let record = sample_record(&setup.prior, &setup.kp, seed);
            (record.x, Some(record), Some(seed))
        }
    };
    let (post, marginal) =
        posterior_with_mode(x, &setup.prior, &setup.kp, setup.mode).map_err(|e| {
            CliError::Runtime(format!(
                "{e}; hint: move detection.zeta away from the singular angle or use the \
                 gaussian likelihood"
            ))
        })?;

    let rows: Vec<(usize, f64, f64)> = (0..setup.prior.pmf().len())
        .map(|i| {
            let n = setup.prior.support_min() + i;
            (n, setup.prior.pmf()[i], post.pmf()[i])
        })
        .collect();
    let interval = post.credible_interval(0.68);
    let payload = PosteriorPayload {
        x,
        zeta: setup.kp.zeta,
        marginal_density: marginal,
        prior_mean: setup.prior.mean(),
        prior_variance: setup.prior.variance(),
        posterior_mean: post.mean(),
        posterior_variance: post.variance(),
        posterior_skewness: post.skewness(),
        interval_68: [interval.0, interval.1],
        sampled_record: sampled,
        distribution: None,
    };

    match io.format(cfg, OutputFormat::Csv) {
        OutputFormat::Json => {
            let payload = PosteriorPayload { distribution: Some(rows), ..payload };
            let mut envelope =
                Envelope::new("posterior", cfg, Payload::Posterior(payload)).with_timestamp(stamp(io));
            if let Some(s) = seed {
                envelope = envelope.with_seed(s);
            }
            io.emit(cfg, &envelope.to_json())
        }
        OutputFormat::Csv => {
            let csv = distribution_csv(&rows);
            if let Some(path) = io.path(cfg) {
                std::fs::write(path, &csv)?;
                let mut envelope = Envelope::new("posterior", cfg, Payload::Posterior(payload))
                    .with_timestamp(stamp(io));
                if let Some(s) = seed {
                    envelope = envelope.with_seed(s);
                }
                let stats_path = stats_sibling(path);
                std::fs::write(&stats_path, envelope.to_json())?;
                if !io.quiet {
                    eprintln!("wrote {} and {}", path.display(), stats_path.display());
                }
                Ok(())
            } else {
                print!("{csv}");
                std::io::stdout().flush()?;
                Ok(())
            }
        }
    }
}

/// `dist.csv -> dist.stats.json`
fn stats_sibling(path: &Path) -> PathBuf {
    let stem = path.with_extension("");
    PathBuf::from(format!("{}.stats.json", stem.display()))
}

#[derive(Serialize)]
struct SampleHeader<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    count: usize,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct SampleLine {
    #[serde(rename = "type")]
    kind: &'static str,
    index: usize,
    n_true: usize,
    x: f64,
    stream_seed: u64,
    posterior_mean: f64,
    posterior_variance: f64,
    credible_68: [usize; 2],
    covered: bool,
}

#[derive(Serialize)]
struct SampleSummary {
    #[serde(rename = "type")]
    kind: &'static str,
    count: usize,
    covered_68: usize,
    coverage_68: f64,
    mean_posterior_variance: f64,
    prior_variance: f64,
}

/// Seeded Monte Carlo record stream (JSON lines): header, one line per
/// record with posterior statistics, and a calibration summary.
pub fn cmd_sample(cfg: &RunConfig, count: usize, io: &OutputOpts) -> Result<(), CliError> {
    let setup = inference_setup(cfg)?;
    let seed = cfg.seed(io.seed)?;

    let header = SampleHeader {
        kind: "header",
        version: crate::envelope::TOOL_VERSION,
        command: "sample",
        seed,
        count,
        config: cfg,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');

    // records are independent substreams of the master seed, so the result
    // is the same no matter how the iteration is scheduled
    let lines: Result<Vec<(SampleLine, f64)>, CliError> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<(SampleLine, f64), CliError> {
            let stream_seed = derive_seed(seed, i as u64);
            let record: MeasurementRecord = sample_record(&setup.prior, &setup.kp, stream_seed);
            let (post, _) = posterior_with_mode(record.x, &setup.prior, &setup.kp, setup.mode)
                .map_err(|e| CliError::Runtime(format!("record {i}: {e}")))?;
            let (lo, hi) = post.credible_interval(0.68);
            let covered = (lo..=hi).contains(&record.n_true);
            Ok((
                SampleLine {
                    kind: "record",
                    index: i,
                    n_true: record.n_true,
                    x: record.x,
                    stream_seed,
                    posterior_mean: post.mean(),
                    posterior_variance: post.variance(),
                    credible_68: [lo, hi],
                    covered,
                },
                post.variance(),
            ))
        })
        .collect();
    let lines = lines?;

    let covered = lines.iter().filter(|(l, _)| l.covered).count();
    let mean_var = if lines.is_empty() {
        0.0
    } else {
        lines.iter().map(|(_, v)| v).sum::<f64>() / lines.len() as f64
    };
    for (line, _) in &lines {
        out.push_str(&serde_json::to_string(line).expect("record serializes"));
        out.push('\n');
    }
    if count > 0 {
        let summary = SampleSummary {
            kind: "summary",
            count,
            covered_68: covered,
            coverage_68: covered as f64 / count as f64,
            mean_posterior_variance: mean_var,
            prior_variance: setup.prior.variance(),
        };
        out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
        out.push('\n');
    }
    io.emit(cfg, &out)
}
