//! Target-return channel and amplifier placements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{apply_amplifier, apply_beamsplitter, apply_phase, make_thermal, partial_trace, tensor, GaussianState};
use crate::sources::{build_source, SourceSpec};

/// Mode index of the signal (later: received) arm in a two-mode radar state.
pub const SIGNAL_MODE: usize = 0;
/// Mode index of the retained idler.
pub const IDLER_MODE: usize = 1;

/// Physical parameters of one detection experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarScenario {
    pub source: SourceSpec,
    /// Round-trip reflectivity when the target is present.
    pub eta: f64,
    /// Phase picked up by the signal relative to the idler.
    #[serde(default)]
    pub theta: f64,
    /// Background photons per mode.
    #[serde(rename = "N_B")]
    pub n_b: f64,
    #[serde(rename = "G_S", default = "unit_gain")]
    pub g_s: f64,
    #[serde(rename = "G_R", default = "unit_gain")]
    pub g_r: f64,
    #[serde(rename = "G_I", default = "unit_gain")]
    pub g_i: f64,
    #[serde(rename = "N_GS", default)]
    pub n_gs: f64,
    #[serde(rename = "N_GR", default)]
    pub n_gr: f64,
    #[serde(rename = "N_GI", default)]
    pub n_gi: f64,
}

fn unit_gain() -> f64 {
    1.0
}

impl RadarScenario {
    /// A scenario without amplifiers and with θ = 0.
    pub fn new(source: SourceSpec, eta: f64, n_b: f64) -> Self {
        Self {
            source,
            eta,
            theta: 0.0,
            n_b,
            g_s: 1.0,
            g_r: 1.0,
            g_i: 1.0,
            n_gs: 0.0,
            n_gr: 0.0,
            n_gi: 0.0,
        }
    }

    pub fn with_source(mut self, source: SourceSpec) -> Self {
        self.source = source;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_signal_amp(mut self, gain: f64, noise: f64) -> Self {
        self.g_s = gain;
        self.n_gs = noise;
        self
    }

    pub fn with_receiver_amp(mut self, gain: f64, noise: f64) -> Self {
        self.g_r = gain;
        self.n_gr = noise;
        self
    }

    pub fn with_idler_amp(mut self, gain: f64, noise: f64) -> Self {
        self.g_i = gain;
        self.n_gi = noise;
        self
    }

    /// Range checks on every field, including source feasibility.
    pub fn validate(&self) -> Result<()> {
        self.violations().into_iter().next().map_or(Ok(()), Err)
    }

    /// All range violations, each tagged with the offending field.
    pub fn violations(&self) -> Vec<Error> {
        self.field_violations().into_iter().map(|(f, e)| tag(f, e)).collect()
    }

    /// Range violations paired with the serialized name of the offending field.
    pub fn field_violations(&self) -> Vec<(&'static str, Error)> {
        let mut out = Vec::new();
        if let Err(e) = self.source.validate() {
            out.push(("source", e));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            out.push(("eta", Error::Domain(format!("reflectivity must lie in [0, 1], got {}", self.eta))));
        }
        if !self.theta.is_finite() {
            out.push(("theta", Error::Domain("phase must be finite".into())));
        }
        if !(self.n_b >= 0.0 && self.n_b.is_finite()) {
            out.push(("N_B", Error::Domain(format!("must be nonnegative, got {}", self.n_b))));
        }
        for (name, g) in [("G_S", self.g_s), ("G_R", self.g_r), ("G_I", self.g_i)] {
            if !(g >= 1.0 && g.is_finite()) {
                out.push((name, Error::Domain(format!("gain must be >= 1, got {g}"))));
            }
        }
        for (name, n) in [("N_GS", self.n_gs), ("N_GR", self.n_gr), ("N_GI", self.n_gi)] {
            if !(n >= 0.0 && n.is_finite()) {
                out.push((name, Error::Domain(format!("added noise must be nonnegative, got {n}"))));
            }
        }
        out
    }
}

fn tag(field: &str, e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{field}: {m}")),
        Error::Infeasible(m) => Error::Infeasible(format!("{field}: {m}")),
        other => other,
    }
}

/// Target hypothesis; an absent target forces η = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    TargetAbsent,
    TargetPresent,
}

impl Hypothesis {
    pub fn effective_eta(self, scenario: &RadarScenario) -> f64 {
        match self {
            Hypothesis::TargetAbsent => 0.0,
            Hypothesis::TargetPresent => scenario.eta,
        }
    }
}

/// Replaces the signal mode by `√η a_S e^{−iθ} + √(1−η) a_B`, with `a_B`
/// thermal with `n_b` photons and uncorrelated with everything else.
pub fn target_return(
    state: &GaussianState,
    signal_mode: usize,
    eta: f64,
    n_b: f64,
    theta: f64,
) -> Result<GaussianState> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("reflectivity must lie in [0, 1], got {eta}")));
    }
    let rotated = apply_phase(state, signal_mode, theta)?;
    let n = rotated.n_modes();
    let with_background = tensor(&rotated, &make_thermal(n_b)?);
    let mixed = apply_beamsplitter(&with_background, signal_mode, n, eta, 0.0)?;
    let keep: Vec<usize> = (0..n).collect();
    partial_trace(&mixed, &keep)
}

/// Runs the full pipeline and returns the joint `(received, idler)` state:
/// source, signal amplifier, target return, receiver amplifier, idler amplifier.
pub fn simulate_scenario(scenario: &RadarScenario, hypothesis: Hypothesis) -> Result<GaussianState> {
    scenario.validate()?;
    let source = build_source(&scenario.source)?;
    let amplified = apply_amplifier(&source, SIGNAL_MODE, scenario.g_s, scenario.n_gs)?;
    let returned = target_return(
        &amplified,
        SIGNAL_MODE,
        hypothesis.effective_eta(scenario),
        scenario.n_b,
        scenario.theta,
    )?;
    let received = apply_amplifier(&returned, SIGNAL_MODE, scenario.g_r, scenario.n_gr)?;
    apply_amplifier(&received, IDLER_MODE, scenario.g_i, scenario.n_gi)
}
