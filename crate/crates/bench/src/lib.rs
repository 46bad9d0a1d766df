//! Shared fixtures for the criterion benchmarks.

use ccx_core::linalg::Matrix;
use ccx_core::synthesis::TargetMatrix;

/// The worked 4x4 target with a rank-3 structure and five monochromatic
/// blocks.
pub fn worked_target() -> TargetMatrix {
    ccx_core::partition::worked_example_target()
}

/// Deterministic dense matrix with entries from a fixed linear congruential
/// stream, scaled to roughly `[-span, span]`.
pub fn pseudo_random_matrix(rows: usize, cols: usize, span: f64, seed: u64) -> Matrix {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    Matrix::from_fn(rows, cols, |_, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let unit = (state >> 11) as f64 / (1u64 << 53) as f64;
        span * (2.0 * unit - 1.0)
    })
}
