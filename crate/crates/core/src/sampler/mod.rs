//! Exact-amplitude simulation of the quantum lattice sampler and the
//! brute-force machinery to judge its output.

mod dist;
mod run;
mod spec;

pub use dist::{
    brute_force_target, chi_square_p_value, lattice_points_in_cube, pac_distance, DiscreteDistribution, PacReport,
};
pub use run::{
    reduction_parameter, sample, sample_with, HypothesisCheck, IntNearestPlane, SampleDiagnostics, SampleOptions,
    SampleOutcome, CARRYING_AMPLITUDE,
};
pub use spec::{
    bounded_check, constant_spec, delta_spec, gaussian_dual_spec, gaussian_spec, BoundednessReport, QESKind, QESSpec,
};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::{parse_rational, rational_to_f64, ExactMatrix};

/// The `spec` block of a sampling config; it describes the target density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecConfig {
    /// `"gaussian"` (target `e^{-π‖x‖²/s²}`) or `"constant"` (QES `F ≡ 1`, target `δ₀`).
    pub kind: String,
    #[serde(default)]
    pub s: Option<f64>,
    /// Target enumeration radius; defaults to `6s`.
    #[serde(default)]
    pub grid_radius: Option<f64>,
}

/// A sampling run as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Path of the basis matrix file, relative to the config file.
    pub basis: String,
    pub spec: SpecConfig,
    /// Exact rational `"p/q"`.
    pub epsilon: String,
    pub shots: usize,
    pub seed: u64,
}

impl SampleConfig {
    pub fn epsilon(&self) -> Result<BigRational> {
        parse_rational(&self.epsilon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub tv_distance: f64,
    pub l1_distance: f64,
    pub max_displacement: f64,
    pub match_radius: f64,
    pub decode_mismatch_rate: f64,
    pub sigma_inverse_applied: bool,
    pub chi_square_p_value: Option<f64>,
    pub observed_support: usize,
    pub target_support: usize,
    pub diagnostics: SampleDiagnostics,
}

/// Runs the sampler for a target spec and scores it against the
/// brute-force target with match radius `ε`.
pub fn run_experiment(
    b: &ExactMatrix,
    spec: &SpecConfig,
    epsilon: &BigRational,
    shots: usize,
    seed: u64,
) -> Result<(SampleOutcome, SampleReport)> {
    run_experiment_with(b, spec, epsilon, shots, seed, &SampleOptions::default())
}

/// As [`run_experiment`] with explicit sampler limits.
pub fn run_experiment_with(
    b: &ExactMatrix,
    spec: &SpecConfig,
    epsilon: &BigRational,
    shots: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<(SampleOutcome, SampleReport)> {
    let (qes, target) = match spec.kind.as_str() {
        "gaussian" => {
            let s = spec.s.ok_or_else(|| Error::Parameter("gaussian spec needs \"s\"".into()))?;
            if !(s > 0.0) {
                return Err(Error::Parameter("gaussian parameter must be positive".into()));
            }
            let radius = spec.grid_radius.unwrap_or(6.0 * s);
            let density = move |x: &[f64]| (-std::f64::consts::PI * x.iter().map(|v| v * v).sum::<f64>() / (s * s)).exp();
            (gaussian_dual_spec(s, radius)?, brute_force_target(density, b, radius)?)
        }
        "constant" => (
            constant_spec(f64::INFINITY)?,
            DiscreteDistribution::from_weights([(vec![0; b.rows()], 1.0)])?,
        ),
        other => return Err(Error::Parameter(format!("unknown spec kind {other:?}"))),
    };
    let outcome = sample_with(&qes, b, epsilon, shots, seed, opts)?;
    let match_radius = rational_to_f64(epsilon);
    let pac = pac_distance(&outcome.distribution, &target, match_radius);
    let chi = if shots > 0 { Some(chi_square_p_value(&outcome.distribution, &outcome.samples)?) } else { None };
    let report = SampleReport {
        tv_distance: pac.tv_distance,
        l1_distance: pac.l1_distance,
        max_displacement: pac.max_displacement,
        match_radius,
        decode_mismatch_rate: outcome.diagnostics.decode_mismatch_rate,
        sigma_inverse_applied: outcome.diagnostics.sigma_inverse_applied,
        chi_square_p_value: chi,
        observed_support: outcome.distribution.len(),
        target_support: target.len(),
        diagnostics: outcome.diagnostics.clone(),
    };
    Ok((outcome, report))
}
