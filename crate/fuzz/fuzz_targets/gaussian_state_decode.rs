#![no_main]

use libfuzzer_sys::fuzz_target;
use nalgebra::DMatrix;
use noise_radar::gaussian::{symplectic_eigenvalues, GaussianState};

// Input: one byte for the mode count (1..=3), then little-endian f64s filling
// the covariance row by row.
fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else { return };
    let dim = 2 * (1 + head as usize % 3);
    let vals: Vec<f64> = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if vals.len() < dim * dim {
        return;
    }
    let cov = DMatrix::from_row_slice(dim, dim, &vals[..dim * dim]);
    if let Ok(state) = GaussianState::new(cov) {
        if let Ok(nu) = symplectic_eigenvalues(&state) {
            assert!(nu.iter().all(|v| v.is_finite()));
        }
    }
});
