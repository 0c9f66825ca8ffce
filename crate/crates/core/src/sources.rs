//! Transmitter states compared under an equal transmitted-power constraint:
//! the two-mode squeezed vacuum and thermal noise split on a beamsplitter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{apply_beamsplitter, make_thermal, make_tmsv, tensor, GaussianState};

/// Which transmitter produces the signal/idler pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// Two-mode squeezed vacuum.
    Tmsv,
    /// Classically correlated thermal noise.
    Ccn,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Tmsv => "tmsv",
            SourceKind::Ccn => "ccn",
        }
    }
}

/// Parameters of one transmitter. `xi`, `n_1` and `phi` only matter for the
/// classical source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Photons transmitted per signal mode.
    #[serde(rename = "N_S")]
    pub n_s: f64,
    /// Beamsplitter reflection coefficient.
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Photons in the cold beamsplitter port.
    #[serde(rename = "N_1", default)]
    pub n_1: f64,
    /// Beamsplitter phase in radians.
    #[serde(default)]
    pub phi: f64,
}

fn default_xi() -> f64 {
    0.5
}

impl SourceSpec {
    pub fn tmsv(n_s: f64) -> Self {
        Self { kind: SourceKind::Tmsv, n_s, xi: default_xi(), n_1: 0.0, phi: 0.0 }
    }

    pub fn ccn(n_s: f64, xi: f64) -> Self {
        Self { kind: SourceKind::Ccn, n_s, xi, n_1: 0.0, phi: 0.0 }
    }

    pub fn with_cold_port(mut self, n_1: f64) -> Self {
        self.n_1 = n_1;
        self
    }

    pub fn with_phase(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    /// The same parameters with a different source kind.
    pub fn with_kind(mut self, kind: SourceKind) -> Self {
        self.kind = kind;
        self
    }

    /// Checks the parameter ranges and, for the classical source, that the
    /// power constraint is satisfiable.
    pub fn validate(&self) -> Result<()> {
        if !(self.n_s >= 0.0 && self.n_s.is_finite()) {
            return Err(Error::Domain(format!("N_S must be nonnegative, got {}", self.n_s)));
        }
        if self.kind == SourceKind::Ccn {
            if !self.phi.is_finite() {
                return Err(Error::Domain("beamsplitter phase must be finite".into()));
            }
            solve_power_constraint(self.n_s, self.xi, self.n_1)?;
        }
        Ok(())
    }
}

/// Hot-port photon number `N_0 = (N_S − (1−ξ)N_1)/ξ` that makes the signal arm
/// carry exactly `N_S` photons. Fails unless `N_0 > N_1`.
pub fn solve_power_constraint(n_s: f64, xi: f64, n_1: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain(format!("reflection coefficient xi must lie in (0, 1), got {xi}")));
    }
    if !(n_s >= 0.0 && n_s.is_finite()) {
        return Err(Error::Domain(format!("N_S must be nonnegative, got {n_s}")));
    }
    if !(n_1 >= 0.0 && n_1.is_finite()) {
        return Err(Error::Domain(format!("N_1 must be nonnegative, got {n_1}")));
    }
    let n_0 = (n_s - (1.0 - xi) * n_1) / xi;
    if !(n_0 > n_1) {
        return Err(Error::Infeasible(format!(
            "N_S = xi*N_0 + (1-xi)*N_1 requires N_0 > N_1, but N_S = {n_s}, xi = {xi}, N_1 = {n_1} give N_0 = {n_0}"
        )));
    }
    Ok(n_0)
}

/// Builds the `(signal, idler)` state of a transmitter.
pub fn build_source(spec: &SourceSpec) -> Result<GaussianState> {
    match spec.kind {
        SourceKind::Tmsv => {
            spec.validate()?;
            make_tmsv(spec.n_s)
        }
        SourceKind::Ccn => {
            spec.validate()?;
            let n_0 = solve_power_constraint(spec.n_s, spec.xi, spec.n_1)?;
            let input = tensor(&make_thermal(n_0)?, &make_thermal(spec.n_1)?);
            apply_beamsplitter(&input, 0, 1, spec.xi, spec.phi)
        }
    }
}
