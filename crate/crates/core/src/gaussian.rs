//! Zero-mean bosonic Gaussian states in the covariance-matrix picture.
//!
//! Quadratures are interleaved per mode, `(q1, p1, q2, p2, ...)`, with
//! `q = (a + a†)/√2` and `p = i(a† − a)/√2`. In this normalization the vacuum
//! has variance 1/2 in every quadrature, and a mode with covariance block
//! `(N + 1/2)·I` carries `N` photons on average. Every photon-number formula in
//! the crate assumes this convention.
//!
//! All transformations are pure functions returning a new state.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use crate::error::{Error, Result};

/// Lower bound on a symplectic eigenvalue of a physical state, after
/// allowing for round-off accumulated by a chain of transformations.
pub const UNCERTAINTY_TOL: f64 = 1e-10;

/// Relative tolerance used when checking that a covariance matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symplectic eigenvalues at or below `1/2 + PURITY_TOL` are treated as pure modes.
pub const PURITY_TOL: f64 = 1e-9;

/// The block-diagonal symplectic form `⊕ [[0, 1], [−1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    omega: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        for k in 0..n_modes {
            omega[(2 * k, 2 * k + 1)] = 1.0;
            omega[(2 * k + 1, 2 * k)] = -1.0;
        }
        Self { omega }
    }

    pub fn n_modes(&self) -> usize {
        self.omega.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.omega
    }
}

/// A zero-mean multimode Gaussian state, fully described by its covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state from a covariance matrix, checking symmetry, positive
    /// definiteness and the uncertainty relation.
    pub fn new(cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() {
            return Err(Error::InvalidState(format!(
                "covariance is {}x{}, expected square",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if cov.nrows() == 0 || !cov.nrows().is_multiple_of(2) {
            return Err(Error::InvalidState(format!(
                "covariance dimension {} is not a positive even number",
                cov.nrows()
            )));
        }
        if cov.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("covariance has non-finite entries".into()));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        let n = cov.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidState(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let state = Self::from_cov_unchecked(cov);
        let nu = symplectic_eigenvalues(&state)?;
        if nu[0] < 0.5 - UNCERTAINTY_TOL {
            return Err(Error::InvalidState(format!(
                "uncertainty relation violated: minimum symplectic eigenvalue {} < 1/2",
                nu[0]
            )));
        }
        Ok(state)
    }

    /// Symmetrizes and wraps a covariance produced by a physical map.
    pub(crate) fn from_cov_unchecked(cov: DMatrix<f64>) -> Self {
        let sym = (&cov + cov.transpose()) * 0.5;
        Self { cov: sym }
    }

    /// The n-mode vacuum.
    pub fn vacuum(n_modes: usize) -> Self {
        Self::from_cov_unchecked(DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5)
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn into_cov(self) -> DMatrix<f64> {
        self.cov
    }

    /// The 2×2 block coupling modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        Matrix2::new(
            self.cov[(2 * i, 2 * j)],
            self.cov[(2 * i, 2 * j + 1)],
            self.cov[(2 * i + 1, 2 * j)],
            self.cov[(2 * i + 1, 2 * j + 1)],
        )
    }

    /// Mean photon number of a mode, `(Σ_qq + Σ_pp)/2 − 1/2`.
    pub fn photon_number(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        Ok(0.5 * (self.cov[(2 * mode, 2 * mode)] + self.cov[(2 * mode + 1, 2 * mode + 1)]) - 0.5)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::Mode(format!(
                "mode {mode} out of range for a {}-mode state",
                self.n_modes()
            )));
        }
        Ok(())
    }

    /// Conjugates the covariance by a symplectic matrix acting on `modes`.
    /// `local` is `2k × 2k` in the order the modes are listed.
    fn conjugate_local(&self, modes: &[usize], local: &DMatrix<f64>) -> Self {
        let n = self.cov.nrows();
        let mut s = DMatrix::identity(n, n);
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                for r in 0..2 {
                    for c in 0..2 {
                        s[(2 * ma + r, 2 * mb + c)] = local[(2 * a + r, 2 * b + c)];
                    }
                }
            }
        }
        Self::from_cov_unchecked(&s * &self.cov * s.transpose())
    }
}

/// Real 2×2 representation of multiplication of `a = (q + ip)/√2` by the
/// complex number `re + i·im`.
fn complex_block(re: f64, im: f64) -> Matrix2<f64> {
    Matrix2::new(re, -im, im, re)
}

/// Bose–Einstein occupation `1/(exp(2πf/T) − 1)` in natural units (ħ = k_B = 1).
pub fn thermal_photon_number(frequency: f64, temperature: f64) -> Result<f64> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::Domain(format!("frequency must be positive, got {frequency}")));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
    }
    let x = 2.0 * std::f64::consts::PI * frequency / temperature;
    Ok(1.0 / x.exp_m1())
}

const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Bose–Einstein occupation for a frequency in hertz and a temperature in kelvin.
pub fn thermal_photon_number_si(frequency_hz: f64, temperature_k: f64) -> Result<f64> {
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::Domain(format!("frequency must be positive, got {frequency_hz}")));
    }
    if !(temperature_k > 0.0 && temperature_k.is_finite()) {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature_k}")));
    }
    let x = PLANCK * frequency_hz / (BOLTZMANN * temperature_k);
    Ok(1.0 / x.exp_m1())
}

fn check_photons(name: &str, n: f64) -> Result<()> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("{name} must be a nonnegative number, got {n}")));
    }
    Ok(())
}

/// Single-mode thermal state with `n` mean photons.
pub fn make_thermal(n: f64) -> Result<GaussianState> {
    check_photons("thermal photon number", n)?;
    Ok(GaussianState::from_cov_unchecked(DMatrix::identity(2, 2) * (n + 0.5)))
}

/// Two-mode squeezed vacuum with `n_s` photons in each arm.
///
/// q-quadratures are positively correlated and p-quadratures anticorrelated.
pub fn make_tmsv(n_s: f64) -> Result<GaussianState> {
    check_photons("TMSV photon number", n_s)?;
    let a = n_s + 0.5;
    let c = (n_s * (n_s + 1.0)).sqrt();
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        a,   0.0, c,   0.0,
        0.0, a,   0.0, -c,
        c,   0.0, a,   0.0,
        0.0, -c,  0.0, a,
    ]);
    Ok(GaussianState::from_cov_unchecked(cov))
}

/// Tensor product; modes of `b` follow those of `a`.
pub fn tensor(a: &GaussianState, b: &GaussianState) -> GaussianState {
    let na = a.cov.nrows();
    let nb = b.cov.nrows();
    let mut cov = DMatrix::zeros(na + nb, na + nb);
    cov.view_mut((0, 0), (na, na)).copy_from(&a.cov);
    cov.view_mut((na, na), (nb, nb)).copy_from(&b.cov);
    GaussianState::from_cov_unchecked(cov)
}

/// Mixes modes `i` and `j` on a beamsplitter with reflection coefficient `xi`
/// and phase `phi`:
///
/// ```text
/// a_i' =  √ξ a_i + √(1−ξ) e^{iφ} a_j
/// a_j' = −√(1−ξ) e^{−iφ} a_i + √ξ a_j
/// ```
///
/// `xi = 1` is the identity and `xi = 0` swaps the modes (up to phases).
pub fn apply_beamsplitter(
    state: &GaussianState,
    mode_i: usize,
    mode_j: usize,
    xi: f64,
    phi: f64,
) -> Result<GaussianState> {
    state.check_mode(mode_i)?;
    state.check_mode(mode_j)?;
    if mode_i == mode_j {
        return Err(Error::Mode(format!("beamsplitter needs two distinct modes, got {mode_i} twice")));
    }
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::Domain(format!("reflection coefficient must lie in [0, 1], got {xi}")));
    }
    if !phi.is_finite() {
        return Err(Error::Domain("beamsplitter phase must be finite".into()));
    }
    let t = xi.sqrt();
    let r = (1.0 - xi).sqrt();
    let (s, c) = phi.sin_cos();
    let blocks = [
        complex_block(t, 0.0),
        complex_block(r * c, r * s),
        complex_block(-r * c, r * s),
        complex_block(t, 0.0),
    ];
    let mut local = DMatrix::zeros(4, 4);
    for (k, blk) in blocks.iter().enumerate() {
        let (bi, bj) = (k / 2, k % 2);
        local.view_mut((2 * bi, 2 * bj), (2, 2)).copy_from(blk);
    }
    Ok(state.conjugate_local(&[mode_i, mode_j], &local))
}

/// Phase shift `a ↦ a·e^{−iθ}` on one mode.
pub fn apply_phase(state: &GaussianState, mode: usize, theta: f64) -> Result<GaussianState> {
    state.check_mode(mode)?;
    if !theta.is_finite() {
        return Err(Error::Domain("phase must be finite".into()));
    }
    let (s, c) = theta.sin_cos();
    let blk = complex_block(c, -s);
    let local = DMatrix::from_column_slice(2, 2, blk.as_slice());
    Ok(state.conjugate_local(&[mode], &local))
}

/// Phase-insensitive amplifier `a ↦ √G a + √(G−1) a_G†`, where the ancilla
/// `a_G` is thermal with `noise` photons.
///
/// The mode's own block becomes `G·block + (G−1)(noise + 1/2)·I` and its
/// correlations with every other mode scale by `√G`.
pub fn apply_amplifier(
    state: &GaussianState,
    mode: usize,
    gain: f64,
    noise: f64,
) -> Result<GaussianState> {
    state.check_mode(mode)?;
    if !(gain >= 1.0 && gain.is_finite()) {
        return Err(Error::Domain(format!("amplifier gain must be >= 1, got {gain}")));
    }
    check_photons("amplifier noise", noise)?;
    let mut cov = state.cov.clone();
    let g = gain.sqrt();
    for r in [2 * mode, 2 * mode + 1] {
        cov.row_mut(r).scale_mut(g);
        cov.column_mut(r).scale_mut(g);
    }
    let added = (gain - 1.0) * (noise + 0.5);
    cov[(2 * mode, 2 * mode)] += added;
    cov[(2 * mode + 1, 2 * mode + 1)] += added;
    Ok(GaussianState::from_cov_unchecked(cov))
}

/// Reduced state on the listed modes, in the order given.
pub fn partial_trace(state: &GaussianState, keep: &[usize]) -> Result<GaussianState> {
    if keep.is_empty() {
        return Err(Error::Mode("partial trace must keep at least one mode".into()));
    }
    for (k, &m) in keep.iter().enumerate() {
        state.check_mode(m)?;
        if keep[..k].contains(&m) {
            return Err(Error::Mode(format!("mode {m} listed twice in partial trace")));
        }
    }
    let idx: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| state.cov[(idx[r], idx[c])]);
    Ok(GaussianState::from_cov_unchecked(cov))
}

fn det2(m: &Matrix2<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Symplectic spectrum of a two-mode covariance from its local invariants,
/// `ν±² = (Δ ± √(Δ² − 4 det Σ))/2` with `Δ = det A + det B + sign·2 det C`.
/// `sign = −1` gives the spectrum of the partial transpose.
fn two_mode_spectrum(state: &GaussianState, sign: f64) -> Result<[f64; 2]> {
    let a = state.block(0, 0);
    let b = state.block(1, 1);
    let c = state.block(0, 1);
    let det_a = det2(&a);
    if !(a[(0, 0)] > 0.0 && det_a > 0.0) {
        return Err(Error::InvalidState("covariance is not positive definite".into()));
    }
    // det Σ = det A · det(B − Cᵀ A⁻¹ C)
    let a_inv = a.try_inverse().ok_or_else(|| Error::InvalidState("singular mode block".into()))?;
    let schur = b - c.transpose() * a_inv * c;
    let det_schur = det2(&schur);
    if !(schur[(0, 0)] > 0.0 && det_schur > 0.0) {
        return Err(Error::InvalidState("covariance is not positive definite".into()));
    }
    let det_sigma = det_a * det_schur;
    let delta = det_a + det2(&b) + sign * 2.0 * det2(&c);
    let disc = (delta * delta - 4.0 * det_sigma).max(0.0);
    if disc.sqrt() < NEAR_DEGENERATE * delta.abs() {
        // The closed form loses half the digits at a degenerate spectrum.
        return two_mode_spectrum_iterative(state, sign);
    }
    let hi_sq = 0.5 * (delta + disc.sqrt());
    if !(hi_sq > 0.0) {
        return Err(Error::InvalidState("covariance is not positive definite".into()));
    }
    let lo_sq = det_sigma / hi_sq;
    Ok([lo_sq.sqrt(), hi_sq.sqrt()])
}

/// Relative gap `(ν+² − ν−²)/Δ` below which the closed form is abandoned.
const NEAR_DEGENERATE: f64 = 1e-4;

fn two_mode_spectrum_iterative(state: &GaussianState, sign: f64) -> Result<[f64; 2]> {
    let mut cov = state.cov.clone();
    if sign < 0.0 {
        // p ↦ −p on the second mode flips the sign of det C.
        for k in 0..4 {
            if k != 3 {
                cov[(3, k)] = -cov[(3, k)];
                cov[(k, 3)] = -cov[(k, 3)];
            }
        }
    }
    let parts = williamson_parts(&GaussianState::from_cov_unchecked(cov))?;
    let mut sq = parts.eigenvalues;
    sq.sort_by(f64::total_cmp);
    let lo = (0.5 * (sq[0] + sq[1])).max(0.0).sqrt();
    let hi = (0.5 * (sq[2] + sq[3])).max(0.0).sqrt();
    Ok([lo, hi])
}

/// Symmetric square root and inverse square root of a positive definite matrix.
pub(crate) fn sqrt_and_inv_sqrt(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(m.clone());
    let lmax = eig.eigenvalues.amax();
    if eig.eigenvalues.iter().any(|&l| !(l > 1e-300 && l > 1e-15 * lmax)) {
        return Err(Error::InvalidState("covariance is not positive definite".into()));
    }
    let q = &eig.eigenvectors;
    let sq = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let isq = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok((q * sq * q.transpose(), q * isq * q.transpose()))
}

/// Eigen-decomposition of `KᵀK` with `K = Σ^{1/2} Ω Σ^{1/2}`; its eigenvalues
/// are the squared symplectic eigenvalues, each appearing twice.
pub(crate) struct WilliamsonParts {
    pub inv_sqrt: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

pub(crate) fn williamson_parts(state: &GaussianState) -> Result<WilliamsonParts> {
    let (sqrt, inv_sqrt) = sqrt_and_inv_sqrt(&state.cov)?;
    let omega = SymplecticForm::new(state.n_modes()).into_matrix();
    let k = &sqrt * omega * &sqrt;
    let ktk = k.transpose() * &k;
    let ktk = (&ktk + ktk.transpose()) * 0.5;
    let eig = SymmetricEigen::new(ktk);
    Ok(WilliamsonParts {
        inv_sqrt,
        eigenvalues: eig.eigenvalues.iter().copied().collect(),
        eigenvectors: eig.eigenvectors,
    })
}

/// Symplectic eigenvalues in ascending order, one per mode.
///
/// One- and two-mode states use closed forms in the local invariants; larger
/// states use the eigenvalues of `KᵀK` with `K = Σ^{1/2} Ω Σ^{1/2}`.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<Vec<f64>> {
    match state.n_modes() {
        1 => {
            let d = det2(&state.block(0, 0));
            if !(state.cov[(0, 0)] > 0.0 && d > 0.0) {
                return Err(Error::InvalidState("covariance is not positive definite".into()));
            }
            Ok(vec![d.sqrt()])
        }
        2 => Ok(two_mode_spectrum(state, 1.0)?.to_vec()),
        _ => {
            let parts = williamson_parts(state)?;
            let mut sq = parts.eigenvalues;
            sq.sort_by(f64::total_cmp);
            Ok(sq.chunks(2).map(|p| (0.5 * (p[0] + p[1])).max(0.0).sqrt()).collect())
        }
    }
}

/// Smallest symplectic eigenvalue of the partial transpose of a two-mode
/// state, transposing `transposed_mode` (p ↦ −p). Values below 1/2 certify
/// entanglement.
pub fn ppt_min_symplectic(state: &GaussianState, transposed_mode: usize) -> Result<f64> {
    if state.n_modes() != 2 {
        return Err(Error::Mode(format!(
            "partial transposition criterion needs a 2-mode state, got {} modes",
            state.n_modes()
        )));
    }
    state.check_mode(transposed_mode)?;
    // det C flips sign under p ↦ −p on either mode, so both partitions agree.
    Ok(two_mode_spectrum(state, -1.0)?[0])
}

/// Von Neumann entropy (nats) of a state with the given symplectic spectrum.
pub fn entropy_from_spectrum(nus: &[f64]) -> f64 {
    nus.iter()
        .map(|&nu| {
            // (n+1)ln(n+1) − n ln n with n = ν − ½, arranged to avoid cancellation at large n.
            let n = nu - 0.5;
            if n > 0.0 {
                n.ln_1p() + n * (1.0 / n).ln_1p()
            } else {
                0.0
            }
        })
        .sum()
}

/// Von Neumann entropy of a Gaussian state in nats.
pub fn von_neumann_entropy(state: &GaussianState) -> Result<f64> {
    Ok(entropy_from_spectrum(&symplectic_eigenvalues(state)?))
}
