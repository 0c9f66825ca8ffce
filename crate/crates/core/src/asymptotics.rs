//! Quantum relative entropy between zero-mean Gaussian states, its variance,
//! the first-order small-η radar forms and the finite-copy Stein exponent.
//!
//! A zero-mean Gaussian state with symplectic spectrum above 1/2 can be written
//! as `ρ = exp(−½ xᵀ G x)/Z`. With `K = Σ^{1/2} Ω Σ^{1/2}`,
//! `G = Σ^{-1/2} ψ(KᵀK) Σ^{-1/2}` where `ψ(ν²) = ν ln((ν+½)/(ν−½))`. Then
//!
//! ```text
//! D(ρ₁‖ρ₀) = S(ρ₀) − S(ρ₁) + ½ Tr[G₀ (Σ₁ − Σ₀)]
//! V(ρ₁‖ρ₀) = ½ Tr[ΔG Σ₁ ΔG Σ₁] + ⅛ Tr[ΔG Ω ΔG Ω],   ΔG = G₁ − G₀
//! ```
//!
//! Writing `D` as an entropy difference plus a trace against `Σ₁ − Σ₀` keeps
//! precision when the hypotheses differ by a tiny η: no large quantities are
//! subtracted beyond the two entropies, which use closed-form spectra.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::distributions::normal_quantile;
use crate::error::{Error, Result};
use crate::gaussian::{symplectic_eigenvalues, von_neumann_entropy, williamson_parts, GaussianState, SymplecticForm, PURITY_TOL};

/// `ψ(ν²) = ν ln((ν+½)/(ν−½))`, or zero on (numerically) pure modes.
fn psi(nu_sq: f64) -> f64 {
    let nu = nu_sq.max(0.25).sqrt();
    if nu <= 0.5 + PURITY_TOL {
        return 0.0;
    }
    nu * (1.0 / (nu - 0.5)).ln_1p()
}

/// Quadratic form `G` of `ln ρ`. Pure modes contribute zero; callers that
/// need `ln ρ` to exist must check the spectrum first.
fn log_quadratic_form(state: &GaussianState) -> Result<DMatrix<f64>> {
    let parts = williamson_parts(state)?;
    let q = &parts.eigenvectors;
    let f = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        parts.eigenvalues.len(),
        parts.eigenvalues.iter().map(|&l| psi(l)),
    ));
    let core = q * f * q.transpose();
    let g = &parts.inv_sqrt * core * &parts.inv_sqrt;
    Ok((&g + g.transpose()) * 0.5)
}

fn check_pair(rho1: &GaussianState, rho0: &GaussianState) -> Result<()> {
    if rho1.n_modes() != rho0.n_modes() {
        return Err(Error::Mode(format!(
            "relative entropy needs equal mode counts, got {} and {}",
            rho1.n_modes(),
            rho0.n_modes()
        )));
    }
    let nu0 = symplectic_eigenvalues(rho0)?;
    if let Some(nu) = nu0.iter().find(|&&nu| nu <= 0.5 + PURITY_TOL) {
        return Err(Error::Support(format!(
            "reference state has symplectic eigenvalue {nu} at the purity threshold; relative entropy is unbounded"
        )));
    }
    Ok(())
}

/// Exact `D(ρ₁‖ρ₀) = Tr ρ₁(ln ρ₁ − ln ρ₀)` in nats.
pub fn relative_entropy_gaussian(rho1: &GaussianState, rho0: &GaussianState) -> Result<f64> {
    check_pair(rho1, rho0)?;
    let g0 = log_quadratic_form(rho0)?;
    let delta = rho1.cov() - rho0.cov();
    let trace = g0.component_mul(&delta).sum();
    let d = von_neumann_entropy(rho0)? - von_neumann_entropy(rho1)? + 0.5 * trace;
    Ok(d)
}

/// Exact `V(ρ₁‖ρ₀) = Tr ρ₁[ln ρ₁ − ln ρ₀ − D]²`.
pub fn relative_entropy_variance_gaussian(rho1: &GaussianState, rho0: &GaussianState) -> Result<f64> {
    check_pair(rho1, rho0)?;
    let dg = log_quadratic_form(rho1)? - log_quadratic_form(rho0)?;
    let omega = SymplecticForm::new(rho1.n_modes()).into_matrix();
    let a = &dg * rho1.cov();
    let b = &dg * &omega;
    let v = 0.5 * (&a * &a).trace() + 0.125 * (&b * &b).trace();
    Ok(v.max(0.0))
}

fn check_first_order_domain(n_s: f64, n_b: f64, eta: f64) -> Result<()> {
    if !(n_s > 0.0 && n_s.is_finite()) {
        return Err(Error::Domain(format!("N_S must be positive, got {n_s}")));
    }
    if !(n_b > 0.0 && n_b.is_finite()) {
        return Err(Error::Domain(format!("N_B must be positive, got {n_b}")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
    }
    Ok(())
}

/// First-order-in-η relative entropy for a TMSV source:
/// `η N_S(N_S+1)/(N_S+N_B+1) · [ln(1+1/N_B) + ln(1+1/N_S)]`.
pub fn d_tmsv_first_order(n_s: f64, n_b: f64, eta: f64) -> Result<f64> {
    check_first_order_domain(n_s, n_b, eta)?;
    Ok(eta * n_s * (n_s + 1.0) / (n_s + n_b + 1.0) * ((1.0 / n_b).ln_1p() + (1.0 / n_s).ln_1p()))
}

/// First-order-in-η relative entropy for a CCN source with a vacuum cold port:
/// `η N_S²/(N_S − ξN_B/(1−ξ)) · [ln(1+1/N_B) − ln(1+ξ/(N_S(1−ξ)))]`.
///
/// Only defined while `N_S > ξN_B/(1−ξ)`; outside that region use the exact
/// computation.
pub fn d_ccn_first_order(n_s: f64, xi: f64, n_b: f64, eta: f64) -> Result<f64> {
    check_first_order_domain(n_s, n_b, eta)?;
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain(format!("xi must lie in (0, 1), got {xi}")));
    }
    let r = xi / (1.0 - xi);
    let denom = n_s - r * n_b;
    if !(denom > 0.0) {
        return Err(Error::Regime(format!(
            "first-order CCN form needs N_S > xi N_B/(1-xi) (N_S = {n_s}, xi N_B/(1-xi) = {})",
            r * n_b
        )));
    }
    Ok(eta * n_s * n_s / denom * ((1.0 / n_b).ln_1p() - (r / n_s).ln_1p()))
}

/// Finite-copy error exponent `−ln P_M / M ≈ D + √(V/M) Φ⁻¹(ε)`.
///
/// The `O(ln M / M)` correction is not included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinReport {
    pub d: f64,
    pub v: f64,
    pub m: u64,
    pub epsilon: f64,
    pub exponent: f64,
    /// `√(V/M) Φ⁻¹(ε)`, the retained finite-M term.
    pub second_order_term: f64,
}

pub fn stein_exponent(d: f64, v: f64, m: u64, epsilon: f64) -> Result<SteinReport> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("D must be finite and nonnegative, got {d}")));
    }
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("V must be finite and nonnegative, got {v}")));
    }
    if m == 0 {
        return Err(Error::Domain("M must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let second_order_term = (v / m as f64).sqrt() * normal_quantile(epsilon)?;
    Ok(SteinReport { d, v, m, epsilon, exponent: d + second_order_term, second_order_term })
}
