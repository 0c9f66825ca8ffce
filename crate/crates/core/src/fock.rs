//! Number-basis density matrices of one- and two-mode zero-mean Gaussian
//! states, used as an independent check of the covariance-level relative
//! entropy.
//!
//! Matrix elements follow from the Husimi function. With `Σ_Q = Σ + I/2` and
//! `v = (α, α*)`,
//!
//! ```text
//! e^{|α|²} ⟨α|ρ|α⟩ = det(Σ_Q)^{-1/2} exp(½ vᵀ A v),   A = X − Lᵀ Σ_Q⁻¹ L
//! ```
//!
//! where `x = L v` maps to quadratures and `X` pairs each α with its α*. The
//! Taylor coefficients of the right side are the density matrix elements and
//! satisfy `√(k_i+1) f_{k+e_i} = Σ_j A_ij √k_j f_{k−e_j}`.
//!
//! Memory is `O(cutoff^{2n})` complex scalars for `n` modes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

pub const MAX_FOCK_MODES: usize = 2;
pub const MAX_CUTOFF: usize = 80;
/// Largest trace deficit `1 − Tr ρ` accepted from a truncation.
pub const TAIL_TOL: f64 = 1e-8;

const EIGEN_FLOOR: f64 = 1e-300;

/// Truncated density matrix in the product number basis, index
/// `Σ_m k_m cutoff^{n−1−m}`, renormalized to unit trace.
#[derive(Debug, Clone)]
pub struct FockState {
    pub matrix: DMatrix<Complex64>,
    pub cutoff: usize,
    /// Trace lost to the truncation before renormalization.
    pub tail: f64,
}

pub fn fock_density_matrix(state: &GaussianState, cutoff: usize) -> Result<FockState> {
    let n = state.n_modes();
    if n > MAX_FOCK_MODES {
        return Err(Error::Mode(format!("Fock oracle supports at most {MAX_FOCK_MODES} modes, got {n}")));
    }
    if cutoff == 0 || cutoff > MAX_CUTOFF {
        return Err(Error::Domain(format!("cutoff must lie in 1..={MAX_CUTOFF}, got {cutoff}")));
    }
    let dim = 2 * n;
    let sigma_q = state.cov() + DMatrix::identity(dim, dim) * 0.5;
    let det = sigma_q.determinant();
    let sq_inv = sigma_q
        .try_inverse()
        .ok_or_else(|| Error::InvalidState("singular Husimi covariance".into()))?;

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut l = DMatrix::<Complex64>::zeros(dim, dim);
    for m in 0..n {
        l[(2 * m, m)] = Complex64::new(h, 0.0);
        l[(2 * m, n + m)] = Complex64::new(h, 0.0);
        l[(2 * m + 1, m)] = Complex64::new(0.0, -h);
        l[(2 * m + 1, n + m)] = Complex64::new(0.0, h);
    }
    let sq_inv_c = sq_inv.map(|x| Complex64::new(x, 0.0));
    let mut a = -(l.transpose() * sq_inv_c * &l);
    for m in 0..n {
        a[(m, n + m)] += 1.0;
        a[(n + m, m)] += 1.0;
    }

    // Flat index over k ∈ [0, cutoff)^{2n}, first coordinate most significant.
    let total = cutoff.pow(dim as u32);
    let strides: Vec<usize> = (0..dim).map(|i| cutoff.pow((dim - 1 - i) as u32)).collect();
    let sqrt_k: Vec<f64> = (0..=cutoff).map(|k| (k as f64).sqrt()).collect();
    let mut f = vec![Complex64::new(0.0, 0.0); total];
    f[0] = Complex64::new(det.powf(-0.5), 0.0);
    let mut k = vec![0usize; dim];
    for idx in 1..total {
        let mut rem = idx;
        for (ki, s) in k.iter_mut().zip(&strides) {
            *ki = rem / s;
            rem %= s;
        }
        let i = k.iter().position(|&x| x > 0).expect("nonzero index");
        // f_k = (1/√k_i) Σ_j A_ij √k'_j f_{k'−e_j}, with k' = k − e_i.
        let base = idx - strides[i];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..dim {
            let kj = if j == i { k[j] - 1 } else { k[j] };
            if kj > 0 {
                acc += a[(i, j)] * sqrt_k[kj] * f[base - strides[j]];
            }
        }
        f[idx] = acc / sqrt_k[k[i]];
    }

    // Row: photon numbers paired with α*; column: paired with α.
    let side = cutoff.pow(n as u32);
    let mut rho = DMatrix::<Complex64>::zeros(side, side);
    for row in 0..side {
        for col in 0..side {
            rho[(row, col)] = f[col * side + row];
        }
    }
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let trace = rho.trace().re;
    let tail = 1.0 - trace;
    if tail > TAIL_TOL {
        return Err(Error::Truncation(format!(
            "cutoff {cutoff} leaves trace deficit {tail:e} (limit {TAIL_TOL:e})"
        )));
    }
    Ok(FockState { matrix: rho / Complex64::new(trace, 0.0), cutoff, tail })
}

struct Spectral {
    values: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

fn spectral(rho: &DMatrix<Complex64>) -> Spectral {
    let eig = nalgebra::SymmetricEigen::new(rho.clone());
    Spectral { values: eig.eigenvalues, vectors: eig.eigenvectors }
}

/// Relative entropy and its variance from truncated density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockComparison {
    pub d: f64,
    pub v: f64,
    pub tail1: f64,
    pub tail0: f64,
}

/// `D` and `V` by dense matrix logarithms in the number basis.
///
/// Both states are truncated at `cutoff` photons per mode; each truncation
/// must keep the trace deficit below [`TAIL_TOL`]. For thermal-like marginals
/// with mean `N` the deficit per mode is about `(N/(N+1))^cutoff`.
pub fn fock_oracle(rho1: &GaussianState, rho0: &GaussianState, cutoff: usize) -> Result<FockComparison> {
    if rho1.n_modes() != rho0.n_modes() {
        return Err(Error::Mode("Fock oracle needs equal mode counts".into()));
    }
    let f1 = fock_density_matrix(rho1, cutoff)?;
    let f0 = fock_density_matrix(rho0, cutoff)?;
    let s1 = spectral(&f1.matrix);
    let s0 = spectral(&f0.matrix);

    let ln = |x: f64| x.max(EIGEN_FLOOR).ln();
    let log0 = &s0.vectors * DMatrix::from_diagonal(&s0.values.map(|x| Complex64::new(ln(x), 0.0))) * s0.vectors.adjoint();
    // ln ρ₀ in the eigenbasis of ρ₁.
    let log0_in_1 = s1.vectors.adjoint() * log0 * &s1.vectors;

    let lam: Vec<f64> = s1.values.iter().map(|&x| x.max(0.0)).collect();
    let mut d = 0.0;
    for (i, &l) in lam.iter().enumerate() {
        if l > 0.0 {
            d += l * (ln(l) - log0_in_1[(i, i)].re);
        }
    }
    // X = diag(ln λ₁) − ln ρ₀ − D; V = Σ_i λ_i Σ_j |X_ij|².
    let mut v = 0.0;
    for (i, &l) in lam.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..lam.len() {
            let mut x = -log0_in_1[(i, j)];
            if i == j {
                x += ln(l) - d;
            }
            row += x.norm_sqr();
        }
        v += l * row;
    }
    Ok(FockComparison { d, v, tail1: f1.tail, tail0: f0.tail })
}

/// Relative entropy `Tr ρ₁(ln ρ₁ − ln ρ₀)` from truncated density matrices.
pub fn fock_relative_entropy_oracle(rho1: &GaussianState, rho0: &GaussianState, cutoff: usize) -> Result<f64> {
    Ok(fock_oracle(rho1, rho0, cutoff)?.d)
}
