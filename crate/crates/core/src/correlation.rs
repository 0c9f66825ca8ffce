//! Pearson correlation structure of received/idler states and the
//! quantum-advantage figures of merit built from it.

use nalgebra::{DMatrix, Matrix2};

use crate::channel::{simulate_scenario, Hypothesis, RadarScenario};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::sources::{solve_power_constraint, SourceKind};

/// Tolerance on the orthogonality of the normalized cross block.
pub const STRUCTURE_TOL: f64 = 1e-6;

/// Cross-correlation decomposition `R = [[I, κD], [κDᵀ, I]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    /// Full 4×4 Pearson matrix.
    pub r: DMatrix<f64>,
    /// Cross-correlation amplitude, always nonnegative.
    pub kappa: f64,
    /// Normalized cross block, orthogonal with determinant ±1.
    pub d: Matrix2<f64>,
    /// Sign of `det D`: −1 for phase-sensitive correlations (TMSV), +1 for
    /// phase-insensitive ones (classical noise).
    pub det_d: f64,
    /// Phase recovered from `D`, relative to the zero-phase orientation of
    /// its family (`diag(1, −1)` for det −1, `−I` for det +1).
    pub theta_hat: f64,
}

/// `R_ij = Σ_ij / √(Σ_ii Σ_jj)`.
pub fn correlation_matrix(state: &GaussianState) -> Result<DMatrix<f64>> {
    if state.n_modes() != 2 {
        return Err(Error::Mode(format!("correlation matrix needs 2 modes, got {}", state.n_modes())));
    }
    pearson(state.cov())
}

pub(crate) fn pearson(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let diag: Vec<f64> = (0..cov.nrows()).map(|i| cov[(i, i)]).collect();
    if let Some(i) = diag.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Degenerate(format!("quadrature {i} has variance {}", diag[i])));
    }
    let mut r = DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| cov[(i, j)] / (diag[i].sqrt() * diag[j].sqrt()));
    for i in 0..r.nrows() {
        r[(i, i)] = 1.0;
    }
    Ok(r)
}

/// Splits a 4×4 Pearson matrix into amplitude and orientation.
pub fn extract_cross_correlation(r: &DMatrix<f64>) -> Result<CorrelationReport> {
    if r.nrows() != 4 || r.ncols() != 4 {
        return Err(Error::Structure(format!("expected a 4x4 matrix, got {}x{}", r.nrows(), r.ncols())));
    }
    for (i, j) in [(0, 1), (2, 3)] {
        if r[(i, j)].abs() > STRUCTURE_TOL || r[(j, i)].abs() > STRUCTURE_TOL {
            return Err(Error::Structure(format!("diagonal block is not the identity at ({i}, {j})")));
        }
    }
    let c = Matrix2::new(r[(0, 2)], r[(0, 3)], r[(1, 2)], r[(1, 3)]);
    let det = c.determinant();
    let kappa = det.abs().sqrt();
    if kappa == 0.0 {
        if c.amax() > STRUCTURE_TOL {
            return Err(Error::Structure("rank-one cross block".into()));
        }
        return Ok(CorrelationReport {
            r: r.clone(),
            kappa: 0.0,
            d: Matrix2::identity(),
            det_d: 1.0,
            theta_hat: 0.0,
        });
    }
    let d = c / kappa;
    let gram = d.transpose() * d;
    if (gram - Matrix2::identity()).amax() > STRUCTURE_TOL {
        return Err(Error::Structure(format!(
            "normalized cross block is not orthogonal (DᵀD deviates by {:.3e})",
            (gram - Matrix2::identity()).amax()
        )));
    }
    let det_d = det.signum();
    let theta_hat = if det_d < 0.0 {
        (-d[(0, 1)]).atan2(d[(0, 0)])
    } else {
        (-d[(0, 1)]).atan2(-d[(0, 0)])
    };
    Ok(CorrelationReport { r: r.clone(), kappa, d, det_d, theta_hat })
}

/// Cross-correlation report of a two-mode state.
pub fn state_correlation(state: &GaussianState) -> Result<CorrelationReport> {
    extract_cross_correlation(&correlation_matrix(state)?)
}

/// Received photons `N_R = ηN_S + (1−η)N_B`.
pub fn received_photons(n_s: f64, eta: f64, n_b: f64) -> f64 {
    eta * n_s + (1.0 - eta) * n_b
}

fn check_channel(n_s: f64, eta: f64, n_b: f64) -> Result<()> {
    if !(n_s >= 0.0 && n_s.is_finite()) {
        return Err(Error::Domain(format!("N_S must be nonnegative, got {n_s}")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta must lie in [0, 1], got {eta}")));
    }
    if !(n_b >= 0.0 && n_b.is_finite()) {
        return Err(Error::Domain(format!("N_B must be nonnegative, got {n_b}")));
    }
    Ok(())
}

/// Closed-form κ of the two-mode squeezed vacuum after the return channel.
pub fn kappa_tmsv(n_s: f64, eta: f64, n_b: f64) -> Result<f64> {
    check_channel(n_s, eta, n_b)?;
    let n_r = received_photons(n_s, eta, n_b);
    Ok((eta * n_s * (n_s + 1.0)).sqrt() / ((n_r + 0.5).sqrt() * (n_s + 0.5).sqrt()))
}

/// Closed-form κ of classically correlated noise after the return channel.
pub fn kappa_ccn(n_s: f64, xi: f64, n_1: f64, eta: f64, n_b: f64) -> Result<f64> {
    check_channel(n_s, eta, n_b)?;
    solve_power_constraint(n_s, xi, n_1)?;
    let n_r = received_photons(n_s, eta, n_b);
    let excess = n_s - n_1;
    Ok(eta.sqrt() * excess / ((n_r + 0.5).sqrt() * (excess + xi / (1.0 - xi) * (n_1 + 0.5)).sqrt()))
}

fn check_advantage_args(n_s: f64, xi: f64) -> Result<()> {
    if !(n_s > 0.0 && n_s.is_finite()) {
        return Err(Error::Domain(format!("N_S must be positive, got {n_s}")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain(format!("xi must lie in (0, 1), got {xi}")));
    }
    Ok(())
}

/// `Q_A = κ²_TMSV/κ²_CCN` at equal transmitted power, with `N_1 = 0` and no amplifiers.
pub fn quantum_advantage(n_s: f64, xi: f64) -> Result<f64> {
    check_advantage_args(n_s, xi)?;
    Ok((n_s + 1.0) / (n_s + 0.5) * (1.0 + xi / (2.0 * n_s * (1.0 - xi))))
}

/// Advantage with a strongly amplified idler (`G_I → ∞`) whose amplifier adds
/// `n_gi` noise photons.
pub fn quantum_advantage_idler_amplified(n_s: f64, xi: f64, n_gi: f64) -> Result<f64> {
    check_advantage_args(n_s, xi)?;
    if !(n_gi >= 0.0 && n_gi.is_finite()) {
        return Err(Error::Domain(format!("N_GI must be nonnegative, got {n_gi}")));
    }
    Ok((n_s + 1.0) / (n_s + n_gi + 1.0) * (1.0 + xi * (n_gi + 1.0) / (n_s * (1.0 - xi))))
}

/// κ of the target-present state produced by the full pipeline.
pub fn pipeline_kappa(scenario: &RadarScenario) -> Result<f64> {
    let state = simulate_scenario(scenario, Hypothesis::TargetPresent)?;
    Ok(state_correlation(&state)?.kappa)
}

/// κ²_TMSV/κ²_CCN from two pipeline runs that differ only in the source kind.
pub fn pipeline_advantage(scenario: &RadarScenario) -> Result<f64> {
    let q = pipeline_kappa(&scenario.with_source(scenario.source.with_kind(SourceKind::Tmsv)))?;
    let c = pipeline_kappa(&scenario.with_source(scenario.source.with_kind(SourceKind::Ccn)))?;
    if c == 0.0 {
        return Err(Error::Degenerate("classical cross-correlation vanishes".into()));
    }
    Ok((q / c).powi(2))
}
