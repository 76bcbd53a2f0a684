//! Simulation and design toolkit for quantum nondemolition (QND) measurement
//! of photon number via the Kerr cross-phase-modulation effect.
//!
//! A weak signal mode and a strong coherent probe mode share a cubic
//! nonlinearity. Cross-phase modulation (XPM) writes the signal photon number
//! onto the probe phase, which a homodyne detector reads out; self-phase
//! modulation (SPM) of the probe is the back-action noise source that the
//! optimal homodyne angle evades.
//!
//! The crate is organized in four layers:
//!
//! - [`analytic`] — closed-form quadrature moments, measurement-error
//!   formulas, optimal homodyne angle and probe power.
//! - [`fock`] — brute-force truncated Fock-space ground truth: diagonal Kerr
//!   evolution, homodyne projection via oscillator wavefunctions, and
//!   conditional signal states. Validates every closed form at desk scale.
//! - [`bayes`] — measurement statistics and inference: the conditioning
//!   kernel, Poisson priors, Bayesian posteriors, and a seeded sampler.
//! - [`resonator`] — whispering-gallery-resonator design estimates mapping
//!   physical cavity parameters to nonlinear phase factors and a full design
//!   report.
//!
//! All operations are pure functions of their inputs and safe to call from
//! any number of threads.

pub mod analytic;
pub mod bayes;
pub mod constants;
pub mod fock;
pub mod resonator;
pub mod rng;

pub use analytic::{DetectionChain, ErrorBudget, InteractionParams, MomentSet, ProbePrep};
pub use bayes::{KrausParams, MeasurementRecord, PhotonDistribution};
pub use fock::{FockVector, JointState};
pub use resonator::{DesignReport, ResonatorSpec};
