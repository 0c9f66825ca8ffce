//! Heterodyne detection: outcome statistics, the generalized likelihood-ratio
//! detector, analytic ROC curves and a Monte Carlo check of them.
//!
//! Heterodyne detection of a mode adds one vacuum unit of noise, so the
//! classical outcomes of a state with covariance `Σ` are zero-mean normal with
//! covariance `Σ + I/2`.

use nalgebra::{DMatrix, Matrix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{simulate_scenario, Hypothesis, RadarScenario};
use crate::correlation::{extract_cross_correlation, pearson, STRUCTURE_TOL};
use crate::distributions::{chi2_isf, noncentral_chi2_sf};
use crate::error::{Error, Result};
use crate::fmt::fmt_f64;
use crate::gaussian::{sqrt_and_inv_sqrt, GaussianState};

/// Rows drawn from one random substream. The partition of a sample matrix into
/// chunks depends only on `M`, never on the thread count.
pub const SAMPLE_CHUNK: usize = 4096;

/// Monte Carlo and grid settings for ROC estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    /// Number of mode pairs measured per decision.
    #[serde(rename = "M")]
    pub m: u64,
    pub p_fa_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Domain("M must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        validate_grid(&self.p_fa_grid)
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("p_fa_grid must not be empty".into()));
    }
    for (i, &p) in grid.iter().enumerate() {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p_fa_grid[{i}] = {p} is outside (0, 1)")));
        }
        if i > 0 && !(p > grid[i - 1]) {
            return Err(Error::Domain(format!("p_fa_grid is not strictly increasing at index {i}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RocKind {
    Analytic,
    Empirical,
}

impl RocKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RocKind::Analytic => "analytic",
            RocKind::Empirical => "empirical",
        }
    }
}

/// Receiver operating characteristic as `(P_Fa, P_D)` pairs.
///
/// For empirical curves `p_fa` is the nominal false-alarm rate that set the
/// threshold; the observed rate is kept in `p_fa_observed`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub kind: RocKind,
    pub m: u64,
    pub kappa_het: f64,
    /// Binomial standard error of each `P_D` (empirical only).
    pub stderr: Option<Vec<f64>>,
    pub p_fa_observed: Option<Vec<f64>>,
}

impl RocCurve {
    /// CSV with header `p_fa,p_d,stderr`; `stderr` is empty for analytic curves.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p_fa,p_d,stderr\n");
        for (i, (p_fa, p_d)) in self.points.iter().enumerate() {
            let se = self.stderr.as_ref().map(|s| fmt_f64(s[i])).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", fmt_f64(*p_fa), fmt_f64(*p_d), se));
        }
        out
    }
}

/// Covariance of heterodyne outcomes, `Σ + I/2`.
pub fn heterodyne_covariance(state: &GaussianState) -> DMatrix<f64> {
    let n = state.cov().nrows();
    state.cov() + DMatrix::identity(n, n) * 0.5
}

/// Pearson cross-correlation amplitude of the heterodyne outcomes.
pub fn heterodyne_kappa(state: &GaussianState) -> Result<f64> {
    Ok(extract_cross_correlation(&pearson(&heterodyne_covariance(state))?)?.kappa)
}

/// Draws `m` heterodyne outcome vectors (one per row).
///
/// Rows are generated in chunks of [`SAMPLE_CHUNK`]; chunk `k` uses the
/// ChaCha8 stream `k` of `seed`, so output is identical for any thread count.
pub fn sample_heterodyne(state: &GaussianState, m: usize, seed: u64) -> Result<DMatrix<f64>> {
    sample_normal(&heterodyne_covariance(state), m, seed)
}

pub(crate) fn sample_normal(cov: &DMatrix<f64>, m: usize, seed: u64) -> Result<DMatrix<f64>> {
    let dim = cov.nrows();
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidState("sampling covariance is not positive definite".into()))?;
    let l = chol.l();
    let chunks: Vec<DMatrix<f64>> = (0..m.div_ceil(SAMPLE_CHUNK))
        .into_par_iter()
        .map(|k| {
            let rows = SAMPLE_CHUNK.min(m - k * SAMPLE_CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut z = vec![0.0; dim];
            let mut block = DMatrix::zeros(rows, dim);
            for r in 0..rows {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (j, zj) in z.iter().enumerate().take(i + 1) {
                        acc += l[(i, j)] * zj;
                    }
                    block[(r, i)] = acc;
                }
            }
            block
        })
        .collect();
    let mut out = DMatrix::zeros(m, dim);
    for (k, block) in chunks.iter().enumerate() {
        out.view_mut((k * SAMPLE_CHUNK, 0), (block.nrows(), dim)).copy_from(block);
    }
    Ok(out)
}

/// Whitened sufficient statistics `(t, u) = (Tr S_w, Tr(P_w S_w))` of a sample.
fn whitened_moments(samples: &DMatrix<f64>, null_cov: &DMatrix<f64>, pattern: &Matrix2<f64>) -> Result<(f64, f64)> {
    if null_cov.nrows() != 4 || null_cov.ncols() != 4 {
        return Err(Error::Domain("null covariance must be 4x4".into()));
    }
    if samples.ncols() != 4 {
        return Err(Error::Domain(format!("samples must have 4 columns, got {}", samples.ncols())));
    }
    if samples.nrows() == 0 {
        return Err(Error::Domain("no samples".into()));
    }
    let scale = null_cov.amax();
    if null_cov.view((0, 2), (2, 2)).amax() > 1e-12 * scale {
        return Err(Error::Domain("null covariance must have a zero received-idler block".into()));
    }
    if (pattern.transpose() * pattern - Matrix2::identity()).amax() > STRUCTURE_TOL {
        return Err(Error::Domain("alternative pattern must be an orthogonal 2x2 matrix".into()));
    }
    let a = null_cov.view((0, 0), (2, 2)).into_owned();
    let b = null_cov.view((2, 2), (2, 2)).into_owned();
    let (_, a_w) = sqrt_and_inv_sqrt(&a).map_err(|_| Error::Domain("singular null covariance".into()))?;
    let (_, b_w) = sqrt_and_inv_sqrt(&b).map_err(|_| Error::Domain("singular null covariance".into()))?;
    let mut t = 0.0;
    let mut u = 0.0;
    for row in samples.row_iter() {
        let yr = [
            a_w[(0, 0)] * row[0] + a_w[(0, 1)] * row[1],
            a_w[(1, 0)] * row[0] + a_w[(1, 1)] * row[1],
        ];
        let yi = [
            b_w[(0, 0)] * row[2] + b_w[(0, 1)] * row[3],
            b_w[(1, 0)] * row[2] + b_w[(1, 1)] * row[3],
        ];
        t += yr[0] * yr[0] + yr[1] * yr[1] + yi[0] * yi[0] + yi[1] * yi[1];
        for i in 0..2 {
            for j in 0..2 {
                u += 2.0 * pattern[(i, j)] * yr[i] * yi[j];
            }
        }
    }
    let m = samples.nrows() as f64;
    Ok((t / m, u / m))
}

/// Per-sample negative log-likelihood (up to constants) of `Σ(κ)` in whitened
/// coordinates: `2 ln(1−κ²) + (t − κu)/(1−κ²)`.
fn whitened_nll(kappa: f64, t: f64, u: f64) -> f64 {
    let one_minus = 1.0 - kappa * kappa;
    2.0 * one_minus.ln() + (t - kappa * u) / one_minus
}

/// Maximum-likelihood κ on (−1, 1): the stationary points solve
/// `4κ³ − uκ² + (2t − 4)κ − u = 0`.
fn ml_kappa(t: f64, u: f64) -> f64 {
    let g = |k: f64| ((4.0 * k - u) * k + (2.0 * t - 4.0)) * k - u;
    let mut breaks = vec![-1.0, 1.0];
    // g'(κ) = 12κ² − 2uκ + (2t − 4)
    let disc = 4.0 * u * u - 48.0 * (2.0 * t - 4.0);
    if disc > 0.0 {
        let s = disc.sqrt();
        for r in [(2.0 * u - s) / 24.0, (2.0 * u + s) / 24.0] {
            if r > -1.0 && r < 1.0 {
                breaks.push(r);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let lim = 1.0 - 1e-15;
    let mut best = 0.0;
    let mut best_val = whitened_nll(0.0, t, u);
    for w in breaks.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (glo, ghi) = (g(lo), g(hi));
        if glo == 0.0 || ghi == 0.0 || glo.signum() != ghi.signum() {
            let rising = glo < ghi;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (g(mid) < 0.0) == rising {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-16 {
                    break;
                }
            }
            let k = (0.5 * (lo + hi)).clamp(-lim, lim);
            let val = whitened_nll(k, t, u);
            if val < best_val {
                best = k;
                best_val = val;
            }
        }
    }
    best
}

/// Generalized likelihood-ratio statistic `2[ℓ(κ̂) − ℓ(0)]` for a cross
/// correlation of known orientation `alt_pattern` and unknown amplitude κ.
///
/// The alternative family is `Σ(κ) = Σ₀ + κ [[0, A^{1/2} D B^{1/2}], [·ᵀ, 0]]`,
/// where `A`, `B` are the received and idler blocks of `null_cov`. κ̂ is the
/// unrestricted maximum-likelihood estimate on (−1, 1), so by Wilks's theorem
/// the statistic is asymptotically χ²₁ under the null and χ'²₁(2Mκ²) under
/// a local alternative.
pub fn wilks_statistic(samples: &DMatrix<f64>, null_cov: &DMatrix<f64>, alt_pattern: &Matrix2<f64>) -> Result<f64> {
    let (t, u) = whitened_moments(samples, null_cov, alt_pattern)?;
    let k = ml_kappa(t, u);
    let m = samples.nrows() as f64;
    Ok((m * (t - whitened_nll(k, t, u))).max(0.0))
}

/// `P_D = Q_{χ'²₁(2Mκ²)}(Q⁻¹_{χ²₁}(P_Fa))` on each grid point.
pub fn roc_analytic(kappa_het: f64, m: u64, p_fa_grid: &[f64]) -> Result<RocCurve> {
    if !(0.0..1.0).contains(&kappa_het) {
        return Err(Error::Domain(format!("kappa_het must lie in [0, 1), got {kappa_het}")));
    }
    if m == 0 {
        return Err(Error::Domain("M must be at least 1".into()));
    }
    validate_grid(p_fa_grid)?;
    let lambda = 2.0 * m as f64 * kappa_het * kappa_het;
    let points = p_fa_grid
        .iter()
        .map(|&p| {
            let threshold = chi2_isf(p)?;
            let p_d = if lambda == 0.0 { p } else { noncentral_chi2_sf(threshold, lambda)? };
            Ok((p, p_d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RocCurve { points, kind: RocKind::Analytic, m, kappa_het, stderr: None, p_fa_observed: None })
}

/// Null and alternative hypotheses of a detection experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisPair {
    pub null: Hypothesis,
    pub alternative: Hypothesis,
}

impl Default for HypothesisPair {
    fn default() -> Self {
        Self { null: Hypothesis::TargetAbsent, alternative: Hypothesis::TargetPresent }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `trial` under hypothesis slot `slot` (0 = null, 1 = alternative).
pub fn trial_seed(seed: u64, trial: u64, slot: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial.wrapping_mul(2).wrapping_add(slot)))
}

/// Monte Carlo ROC: `trials` experiments of `M` heterodyne samples under each
/// hypothesis, thresholded at the χ²₁ quantiles of the nominal false-alarm grid.
///
/// The detector knows the null covariance and the orientation `D` of the
/// alternative's cross-correlation.
pub fn roc_empirical(scenario: &RadarScenario, hypotheses: HypothesisPair, config: &DetectionConfig) -> Result<RocCurve> {
    config.validate()?;
    let null_state = simulate_scenario(scenario, hypotheses.null)?;
    let alt_state = simulate_scenario(scenario, hypotheses.alternative)?;
    let null_cov = heterodyne_covariance(&null_state);
    let alt_cov = heterodyne_covariance(&alt_state);
    let alt_report = extract_cross_correlation(&pearson(&alt_cov)?)?;
    let pattern = alt_report.d;
    let m = usize::try_from(config.m).map_err(|_| Error::Domain("M too large".into()))?;

    let stats: Vec<(f64, f64)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let x0 = sample_normal(&null_cov, m, trial_seed(config.seed, trial, 0))?;
            let x1 = sample_normal(&alt_cov, m, trial_seed(config.seed, trial, 1))?;
            Ok((wilks_statistic(&x0, &null_cov, &pattern)?, wilks_statistic(&x1, &null_cov, &pattern)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = config.trials as f64;
    let mut points = Vec::with_capacity(config.p_fa_grid.len());
    let mut stderr = Vec::with_capacity(config.p_fa_grid.len());
    let mut observed = Vec::with_capacity(config.p_fa_grid.len());
    for &p in &config.p_fa_grid {
        let threshold = chi2_isf(p)?;
        let fa = stats.iter().filter(|(s0, _)| *s0 > threshold).count() as f64 / n;
        let pd = stats.iter().filter(|(_, s1)| *s1 > threshold).count() as f64 / n;
        points.push((p, pd));
        stderr.push((pd * (1.0 - pd) / n).sqrt());
        observed.push(fa);
    }
    Ok(RocCurve {
        points,
        kind: RocKind::Empirical,
        m: config.m,
        kappa_het: alt_report.kappa,
        stderr: Some(stderr),
        p_fa_observed: Some(observed),
    })
}
