//! Feasibility checks, the closed-form minimum averaged control cost for
//! single-round protocols, the constructive synthesis that attains it, and
//! cost comparisons against full information sharing.
//!
//! For an `m x n` target `H` realized through a map with singular values
//! `sigma_k(F)`, the single-round optimum is
//!
//! ```text
//! C(H) = (2 / sqrt(p q)) * sum_k sigma_k(H) / sigma_k(F)
//! ```
//!
//! with weights `p = m`, `q = n` in the standard problem, while full
//! information sharing averages `J(H) = (2 / (m n sigma_1(F))) * sum |H_ij|`.

use std::f64::consts::PI;

use crate::controls::{bh_sigma, pair_output, BilinearMap, ControlSignal, MapKind, Role};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, svd, Matrix, DEFAULT_RANK_TOL};

/// Singular values at or below `RANK_DROP_REL * sigma_1` are treated as zero
/// directions during synthesis; their targets are realized as exact zeros.
const RANK_DROP_REL: f64 = 1e-12;

/// An `m x n` table of required outputs: entry `(i, j)` must be produced when
/// Alice picks choice `i` and Bob picks choice `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix {
    pub mat: Matrix,
    pub row_labels: Option<Vec<String>>,
    pub col_labels: Option<Vec<String>>,
}

impl TargetMatrix {
    pub fn new(mat: Matrix) -> Self {
        TargetMatrix { mat, row_labels: None, col_labels: None }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    /// Sum of absolute entries.
    pub fn entry_abs_sum(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                acc += self.mat[(i, j)].abs();
            }
        }
        acc
    }
}

impl From<Matrix> for TargetMatrix {
    fn from(mat: Matrix) -> Self {
        TargetMatrix::new(mat)
    }
}

/// Paired control sets realizing a target, with the achieved averaged cost.
#[derive(Debug, Clone)]
pub struct ProtocolSolution {
    /// One control per row choice of the target.
    pub alice: Vec<ControlSignal>,
    /// One control per column choice of the target.
    pub bob: Vec<ControlSignal>,
    /// `(1/p) tr U U^T + (1/q) tr V V^T` recomputed from the coefficients.
    pub cost: f64,
    /// Largest deviation `|pairing(u_i, v_j) - H_ij|` over all choice pairs.
    pub residual: f64,
    /// Cost weights `(p, q)`.
    pub weights: (u32, u32),
}

impl ProtocolSolution {
    /// Cost recomputed from the stored coefficient vectors.
    pub fn recompute_cost(&self) -> f64 {
        let (p, q) = self.weights;
        self.alice.iter().map(|s| s.energy()).sum::<f64>() / p as f64
            + self.bob.iter().map(|s| s.energy()).sum::<f64>() / q as f64
    }
}

/// Report from [`verify_solution`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyReport {
    /// Largest `|pairing(u_i, v_j) - H_ij|` over all pairs.
    pub max_residual: f64,
    /// Largest `|simulated z(1) - H_ij|`, when simulation was requested.
    pub sim_max_residual: Option<f64>,
    /// Averaged cost recomputed from the coefficients.
    pub recomputed_cost: f64,
}

/// Cost comparison between the no-communication optimum and the
/// full-information average.
#[derive(Debug, Clone)]
pub struct CostReport {
    /// Single-round optimum `C(H)`.
    pub single_round_cost: f64,
    /// Full-information average `J(H)`.
    pub shared_info_cost: f64,
    /// `C(H) - J(H)`, non-negative.
    pub gap: f64,
    /// Per-choice-pair minimum energies `2 |H_ij| / sigma_1(F)`.
    pub per_pair_costs: Matrix,
    /// Lower bound on the gap for square targets through the Heisenberg map.
    pub gap_lower_bound: Option<f64>,
}

/// A single-round protocol for `h` exists iff the map's rank is at least the
/// target's. The diagonal Heisenberg map has unbounded rank and is always
/// feasible.
pub fn feasibility_rank_check(h: &TargetMatrix, f: &BilinearMap) -> bool {
    match f.rank() {
        None => true,
        Some(map_rank) => numerical_rank(&h.mat, DEFAULT_RANK_TOL) <= map_rank,
    }
}

/// Whether `h` is realizable by a system whose input-output map is affine in
/// the control pair: all cross differences `H_ik - H_jk` must be independent
/// of the column `k` (within `1e-12` absolute).
pub fn affine_obstruction_check(h: &TargetMatrix) -> bool {
    assert!(h.rows() >= 2 && h.cols() >= 2, "need at least a 2x2 target");
    let m = &h.mat;
    for i in 1..h.rows() {
        let base = m[(i, 0)] - m[(0, 0)];
        for k in 1..h.cols() {
            if ((m[(i, k)] - m[(0, k)]) - base).abs() > 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Singular values of the map paired against the first `count` directions.
/// Fails when a needed direction of a finite map is missing or zero.
fn paired_map_sigmas(f: &BilinearMap, count: usize) -> Result<Vec<f64>> {
    match f.kind() {
        MapKind::DiagonalBh => Ok((0..count).map(bh_sigma).collect()),
        MapKind::Generic => {
            let sigmas = f.sigmas();
            if sigmas.len() < count {
                return Err(Error::Infeasible(format!(
                    "map truncation has {} directions, target needs {count}",
                    sigmas.len()
                )));
            }
            Ok(sigmas[..count].to_vec())
        }
    }
}

/// Infimum averaged cost `(2 / sqrt(pq)) * sum_k sigma_k(H) / sigma_k(F)` of
/// single-round protocols realizing `h` through `f` with weights `(p, q)`.
///
/// Both singular-value sequences pair in descending index order; any
/// consistent order among exactly equal map singular values yields the same
/// sum.
pub fn optimal_cost(h: &TargetMatrix, f: &BilinearMap, p: u32, q: u32) -> Result<f64> {
    assert!(p >= 1 && q >= 1, "weights must be positive");
    if !feasibility_rank_check(h, f) {
        return Err(Error::Infeasible("target rank exceeds map rank".into()));
    }
    if !f.is_regular() {
        return Err(Error::UnsupportedRepresentation(
            "cost formula requires a regular representation".into(),
        ));
    }
    let sigma_h = svd(&h.mat)?.singular_values;
    let count = h.rows().min(h.cols());
    let sigma_f = paired_map_sigmas(f, count)?;
    let drop = RANK_DROP_REL * sigma_h[0].max(1.0);
    let mut acc = 0.0;
    for k in 0..count {
        if sigma_h[k] <= drop {
            continue;
        }
        if sigma_f[k] <= 0.0 {
            return Err(Error::Infeasible(format!("map direction {k} is null")));
        }
        acc += sigma_h[k] / sigma_f[k];
    }
    Ok(2.0 / ((p as f64) * (q as f64)).sqrt() * acc)
}

/// Single-round optimum through the Heisenberg plant:
/// `(2 pi / sqrt(mn)) * sum_k ceil(k/2) * sigma_k(H)`.
pub fn bh_optimal_cost(h: &TargetMatrix) -> f64 {
    let sigma_h = svd(&h.mat).expect("finite target").singular_values;
    let count = h.rows().min(h.cols());
    let sum: f64 = (0..count).map(|k| (k / 2 + 1) as f64 * sigma_h[k]).sum();
    2.0 * PI / ((h.rows() * h.cols()) as f64).sqrt() * sum
}

/// Embed `h` in the top-left block of an `l x l` matrix of zeros. Padding
/// choices are forced to zero controls by optimality, so the optimum cost is
/// unchanged.
pub fn augment_target(h: &TargetMatrix, l: usize) -> Result<TargetMatrix> {
    if l < h.rows().max(h.cols()) {
        return Err(Error::InvalidInput(format!(
            "augmentation size {l} smaller than target {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let mat = Matrix::from_fn(l, l, |i, j| {
        if i < h.rows() && j < h.cols() {
            h.mat[(i, j)]
        } else {
            0.0
        }
    });
    Ok(TargetMatrix::new(mat))
}

/// Construct a minimum-energy single-round solution.
///
/// Works at the truncation size `l` of `f` (which must cover the target and be
/// invertible):
///
/// 1. rotate the map to diagonal form through its SVD `F_l = P S_F Q^T`
///    (a no-op for the diagonal Heisenberg kind),
/// 2. take the right singular basis `T` of the zero-padded target,
/// 3. scale by the diagonal `R` with entries
///    `(q/p)^{1/4} sqrt(sigma_k(H) sigma_k(F))` over the target's rank,
/// 4. set `U = H T R^+` and `V^T = S_F^{-1} R T^T` (the pseudo-inverse takes
///    the exact limit of the vanishing-regularization family), and rotate
///    back by `P`, `Q`.
///
/// Rows of `U`, `V` beyond the target's dimensions vanish identically and are
/// dropped; the rest become the agents' coefficient vectors.
pub fn synthesize_single_round(
    h: &TargetMatrix,
    f: &BilinearMap,
    p: u32,
    q: u32,
    tol: f64,
) -> Result<ProtocolSolution> {
    assert!(p >= 1 && q >= 1, "weights must be positive");
    assert!(tol > 0.0, "residual tolerance must be positive");
    let (m, n) = (h.rows(), h.cols());
    let l = f.dim();
    if l < m.max(n) {
        return Err(Error::InvalidInput(format!(
            "map truncation {l} cannot host a {m}x{n} target; build the map at least {}-dimensional",
            m.max(n)
        )));
    }
    if !feasibility_rank_check(h, f) {
        return Err(Error::Infeasible("target rank exceeds map rank".into()));
    }

    // Diagonalize the map: generic maps through their SVD, the Heisenberg
    // truncation is already diagonal with descending entries.
    let (rot_left, rot_right, sigma_f) = match f.kind() {
        MapKind::DiagonalBh => (None, None, (0..l).map(bh_sigma).collect::<Vec<_>>()),
        MapKind::Generic => {
            let fs = svd(f.repr())?;
            (Some(fs.left), Some(fs.right), fs.singular_values)
        }
    };
    let f_scale = sigma_f[0].max(1.0);
    if sigma_f[l - 1] <= 1e-12 * f_scale {
        return Err(Error::SingularMap(format!(
            "smallest map singular value {:.3e} is numerically zero",
            sigma_f[l - 1]
        )));
    }

    let padded = augment_target(h, l)?;
    let hs = svd(&padded.mat)?;
    let sigma_h = &hs.singular_values;
    let drop = RANK_DROP_REL * sigma_h[0].max(1.0);
    let rank = sigma_h.iter().filter(|&&s| s > drop).count();

    let weight = ((q as f64) / (p as f64)).powf(0.25);
    let r_diag: Vec<f64> =
        (0..rank).map(|k| weight * (sigma_h[k] * sigma_f[k]).sqrt()).collect();

    // U' columns are scaled left singular vectors; V' rows live on the right
    // singular basis. Columns past the rank carry exact zeros.
    let mut u = Matrix::zeros(l, l);
    let mut v = Matrix::zeros(l, l);
    for k in 0..rank {
        let u_scale = sigma_h[k] / r_diag[k];
        let v_scale = r_diag[k] / sigma_f[k];
        for i in 0..l {
            u[(i, k)] = hs.left[(i, k)] * u_scale;
            v[(i, k)] = hs.right[(i, k)] * v_scale;
        }
    }
    if let Some(p_rot) = &rot_left {
        u = &u * &p_rot.transpose();
    }
    if let Some(q_rot) = &rot_right {
        v = &v * &q_rot.transpose();
    }

    let alice: Vec<ControlSignal> = (0..m)
        .map(|i| ControlSignal::new(Role::Alice, u.row(i).to_vec()).expect("finite"))
        .collect();
    let bob: Vec<ControlSignal> = (0..n)
        .map(|j| ControlSignal::new(Role::Bob, v.row(j).to_vec()).expect("finite"))
        .collect();

    let mut residual = 0.0_f64;
    for (i, ui) in alice.iter().enumerate() {
        for (j, vj) in bob.iter().enumerate() {
            residual = residual.max((pair_output(ui, vj, f) - h.mat[(i, j)]).abs());
        }
    }
    if residual > tol {
        return Err(Error::ConvergenceFailure(format!(
            "synthesized residual {residual:.3e} exceeds tolerance {tol:.3e}"
        )));
    }

    let cost = alice.iter().map(|s| s.energy()).sum::<f64>() / p as f64
        + bob.iter().map(|s| s.energy()).sum::<f64>() / q as f64;
    Ok(ProtocolSolution { alice, bob, cost, residual, weights: (p, q) })
}

/// Recompute every pairing (and optionally every plant simulation) of a
/// solution against its target.
pub fn verify_solution(
    sol: &ProtocolSolution,
    h: &TargetMatrix,
    f: &BilinearMap,
    sim_steps: Option<usize>,
) -> VerifyReport {
    assert_eq!(sol.alice.len(), h.rows(), "row count mismatch");
    assert_eq!(sol.bob.len(), h.cols(), "column count mismatch");
    let mut max_residual = 0.0_f64;
    let mut sim_max_residual = sim_steps.map(|_| 0.0_f64);
    for (i, ui) in sol.alice.iter().enumerate() {
        for (j, vj) in sol.bob.iter().enumerate() {
            let target = h.mat[(i, j)];
            max_residual = max_residual.max((pair_output(ui, vj, f) - target).abs());
            if let (Some(acc), Some(steps)) = (sim_max_residual.as_mut(), sim_steps) {
                let z = crate::bh::simulate_bh(ui, vj, steps).final_state()[2];
                *acc = acc.max((z - target).abs());
            }
        }
    }
    VerifyReport { max_residual, sim_max_residual, recomputed_cost: sol.recompute_cost() }
}

/// Averaged cost when each agent knows the other's choice:
/// `(2 / (m n sigma_1(F))) * sum |H_ij|`.
pub fn shared_info_cost(h: &TargetMatrix, f: &BilinearMap) -> Result<f64> {
    let sigma1 = f.sigma_max();
    if sigma1 <= 0.0 {
        return Err(Error::InvalidInput("map has zero largest singular value".into()));
    }
    Ok(2.0 / ((h.rows() * h.cols()) as f64 * sigma1) * h.entry_abs_sum())
}

/// For a square target through the Heisenberg map, the communication saving
/// is bounded below by `(2 pi / n) * sum_k (ceil(k/2) - 1) sigma_k(H) >= 0`.
/// Checks both that bound and its non-negativity.
pub fn cost_gap_bound_check(h: &TargetMatrix) -> Result<bool> {
    if h.rows() != h.cols() {
        return Err(Error::InvalidInput("gap bound applies to square targets".into()));
    }
    let n = h.rows();
    let sigma_h = svd(&h.mat)?.singular_values;
    let bound: f64 =
        2.0 * PI / n as f64 * (0..n).map(|k| (k / 2) as f64 * sigma_h[k]).sum::<f64>();
    let gap = bh_optimal_cost(h) - shared_info_cost(h, &BilinearMap::fb(1))?;
    Ok(bound >= -1e-15 && gap >= bound - 1e-9)
}

/// Entry-sum bounds for an orthogonal target `H` (`n x n`): with
/// `val = (2 pi / n^2) sum |H_ij|`,
///
/// ```text
/// 2 pi / n  <=  val  <=  2 pi / sqrt(n)
/// ```
///
/// together with the general-matrix bound `val <= (2 pi / n) sum_k sigma_k(H)`.
pub fn orthogonal_bounds_check(h: &TargetMatrix) -> Result<bool> {
    if h.rows() != h.cols() {
        return Err(Error::InvalidInput("bounds apply to square matrices".into()));
    }
    if !h.mat.is_orthogonal(1e-10) {
        return Err(Error::InvalidInput("matrix is not orthogonal within 1e-10".into()));
    }
    let n = h.rows() as f64;
    let val = 2.0 * PI / (n * n) * h.entry_abs_sum();
    let lower = 2.0 * PI / n;
    let upper = 2.0 * PI / n.sqrt();
    let sigma_sum: f64 = svd(&h.mat)?.singular_values.iter().sum();
    let general = 2.0 * PI / n * sigma_sum;
    Ok(val >= lower - 1e-12 && val <= upper + 1e-12 && val <= general + 1e-12)
}

/// Assemble the cost comparison for a target through a map.
pub fn cost_report(h: &TargetMatrix, f: &BilinearMap, p: u32, q: u32) -> Result<CostReport> {
    let single_round_cost = optimal_cost(h, f, p, q)?;
    let shared = shared_info_cost(h, f)?;
    let sigma1 = f.sigma_max();
    let per_pair_costs =
        Matrix::from_fn(h.rows(), h.cols(), |i, j| 2.0 * h.mat[(i, j)].abs() / sigma1);
    let gap_lower_bound = if h.rows() == h.cols() && f.kind() == MapKind::DiagonalBh {
        let n = h.rows();
        let sigma_h = svd(&h.mat)?.singular_values;
        Some(2.0 * PI / n as f64 * (0..n).map(|k| (k / 2) as f64 * sigma_h[k]).sum::<f64>())
    } else {
        None
    };
    Ok(CostReport {
        single_round_cost,
        shared_info_cost: shared,
        gap: single_round_cost - shared,
        per_pair_costs,
        gap_lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_near(a: f64, b: f64, tol: f64, msg: &str) {
        assert!((a - b).abs() <= tol, "{msg}: {a} vs {b} (diff {})", (a - b).abs());
    }

    fn worked_target() -> TargetMatrix {
        TargetMatrix::new(
            Matrix::from_rows(&[
                vec![1.0, 1.0, 1.0, 1.0],
                vec![1.0, 1.0, 5.0, 5.0],
                vec![2.0, 3.0, 5.0, 5.0],
                vec![2.0, 3.0, 5.0, 5.0],
            ])
            .unwrap(),
        )
    }

    fn hadamard(order: usize) -> Matrix {
        assert!(order.is_power_of_two());
        let mut m = Matrix::from_rows(&[vec![1.0]]).unwrap();
        while m.rows() < order {
            let k = m.rows();
            m = Matrix::from_fn(2 * k, 2 * k, |i, j| {
                let sign = if i >= k && j >= k { -1.0 } else { 1.0 };
                sign * m[(i % k, j % k)]
            });
        }
        m
    }

    fn identity_target(n: usize) -> TargetMatrix {
        TargetMatrix::new(Matrix::identity(n))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, span: f64) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-span..span))
    }

    #[test]
    fn feasibility_examples() {
        let fb = BilinearMap::fb(8);
        assert!(feasibility_rank_check(&worked_target(), &fb));
        let rank1 =
            BilinearMap::new_generic(Matrix::from_diag(&[1.0, 0.0]), None).unwrap();
        let h2 = identity_target(2);
        assert!(!feasibility_rank_check(&h2, &rank1));
        let zero = TargetMatrix::new(Matrix::zeros(3, 3));
        assert!(feasibility_rank_check(&zero, &rank1));
    }

    #[test]
    fn affine_obstruction_examples() {
        let yes = TargetMatrix::new(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        assert!(affine_obstruction_check(&yes));
        let no = TargetMatrix::new(Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap());
        assert!(!affine_obstruction_check(&no));
        let constant = TargetMatrix::new(Matrix::from_fn(3, 4, |_, _| 2.5));
        assert!(affine_obstruction_check(&constant));
    }

    #[test]
    fn optimal_cost_single_target() {
        let h = TargetMatrix::new(Matrix::from_rows(&[vec![1.0]]).unwrap());
        let c = optimal_cost(&h, &BilinearMap::fb(2), 1, 1).unwrap();
        assert_near(c, 2.0 * PI, 1e-12, "2 pi |h|");
        let h2 = TargetMatrix::new(Matrix::from_rows(&[vec![-2.0]]).unwrap());
        let c2 = optimal_cost(&h2, &BilinearMap::fb(2), 1, 1).unwrap();
        assert_near(c2, 4.0 * PI, 1e-12, "2 pi |h|");
    }

    #[test]
    fn optimal_cost_identity_and_hadamard() {
        let c = optimal_cost(&identity_target(2), &BilinearMap::fb(4), 2, 2).unwrap();
        assert_near(c, 2.0 * PI, 1e-12, "identity cost");
        let h4 = TargetMatrix::new(hadamard(4));
        let c4 = optimal_cost(&h4, &BilinearMap::fb(8), 4, 4).unwrap();
        assert_near(c4, 6.0 * PI, 1e-10, "Hadamard-4 cost");
    }

    #[test]
    fn optimal_cost_errors() {
        let rank1 =
            BilinearMap::new_generic(Matrix::from_diag(&[1.0, 0.0]), None).unwrap();
        assert!(matches!(
            optimal_cost(&identity_target(2), &rank1, 2, 2),
            Err(Error::Infeasible(_))
        ));
        let irregular = BilinearMap::new_generic(
            Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            None,
        )
        .unwrap();
        assert!(matches!(
            optimal_cost(&identity_target(2), &irregular, 2, 2),
            Err(Error::UnsupportedRepresentation(_))
        ));
    }

    #[test]
    fn bh_cost_matches_generic_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let m = rng.gen_range(1..=5);
            let n = rng.gen_range(1..=5);
            let h = TargetMatrix::new(random_matrix(&mut rng, m, n, 5.0));
            let direct = bh_optimal_cost(&h);
            let via_formula = optimal_cost(
                &h,
                &BilinearMap::fb(2 * m.min(n)),
                m as u32,
                n as u32,
            )
            .unwrap();
            assert_near(direct, via_formula, 1e-10 * direct.max(1.0), "two routes");
        }
    }

    #[test]
    fn bh_cost_golden_values() {
        assert_near(bh_optimal_cost(&identity_target(2)), 2.0 * PI, 1e-12, "identity");
        let h2 = TargetMatrix::new(hadamard(2));
        assert_near(bh_optimal_cost(&h2), 2.0 * std::f64::consts::SQRT_2 * PI, 1e-10, "hadamard-2");
    }

    #[test]
    fn augment_examples() {
        let h = TargetMatrix::new(Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap());
        let padded = augment_target(&h, 2).unwrap();
        assert_eq!(padded.mat, Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap());
        let square = identity_target(3);
        assert_eq!(augment_target(&square, 3).unwrap().mat, square.mat);
        assert!(augment_target(&square, 2).is_err());
    }

    #[test]
    fn augmentation_preserves_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=4);
            let h = TargetMatrix::new(random_matrix(&mut rng, m, n, 5.0));
            let l = 2 * m.max(n);
            let padded = augment_target(&h, l).unwrap();
            let f = BilinearMap::fb(2 * l);
            let c0 = optimal_cost(&h, &f, m as u32, n as u32).unwrap();
            let c1 = optimal_cost(&padded, &f, m as u32, n as u32).unwrap();
            assert_near(c0, c1, 1e-10 * c0.max(1.0), "augmented cost");
        }
    }

    #[test]
    fn synthesize_single_target() {
        let h = TargetMatrix::new(Matrix::from_rows(&[vec![1.0]]).unwrap());
        let sol = synthesize_single_round(&h, &BilinearMap::fb(2), 1, 1, 1e-9).unwrap();
        assert_near(sol.alice[0].energy(), PI, 1e-10, "alice energy");
        assert_near(sol.bob[0].energy(), PI, 1e-10, "bob energy");
        assert_near(sol.cost, 2.0 * PI, 1e-10, "total");
        assert_near(
            pair_output(&sol.alice[0], &sol.bob[0], &BilinearMap::fb(2)),
            1.0,
            1e-12,
            "pairing",
        );
    }

    #[test]
    fn synthesize_identity() {
        let h = identity_target(2);
        let f = BilinearMap::fb(4);
        let sol = synthesize_single_round(&h, &f, 2, 2, 1e-10).unwrap();
        assert!(sol.residual <= 1e-10);
        assert_near(sol.cost, 2.0 * PI, 1e-8 * 2.0 * PI, "identity cost");
    }

    #[test]
    fn synthesize_worked_target() {
        let h = worked_target();
        let f = BilinearMap::fb(8);
        let sol = synthesize_single_round(&h, &f, 4, 4, 1e-9).unwrap();
        assert!(sol.residual <= 1e-9);
        let expected = bh_optimal_cost(&h);
        assert_near(sol.cost, expected, 1e-8 * expected, "optimal cost attained");
    }

    #[test]
    fn synthesize_rejects_infeasible() {
        let rank1 =
            BilinearMap::new_generic(Matrix::from_diag(&[1.0, 0.0]), None).unwrap();
        assert!(matches!(
            synthesize_single_round(&identity_target(2), &rank1, 2, 2, 1e-9),
            Err(Error::SingularMap(_)) | Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn synthesize_generic_map() {
        // A non-diagonal invertible map exercises the rotation route.
        let repr = Matrix::from_rows(&[
            vec![0.3, 0.1, 0.0],
            vec![-0.1, 0.25, 0.05],
            vec![0.0, 0.02, 0.2],
        ])
        .unwrap();
        let f = BilinearMap::new_generic(repr, None).unwrap();
        let h = TargetMatrix::new(Matrix::from_rows(&[
            vec![1.0, -2.0, 0.5],
            vec![0.0, 3.0, 1.0],
        ]).unwrap());
        let sol = synthesize_single_round(&h, &f, 2, 3, 1e-9).unwrap();
        assert!(sol.residual <= 1e-9, "residual {}", sol.residual);
        let expected = optimal_cost(&h, &f, 2, 3).unwrap();
        assert_near(sol.cost, expected, 1e-8 * expected, "generic-map optimum");
    }

    #[test]
    fn verify_flags_corruption() {
        let h = identity_target(2);
        let f = BilinearMap::fb(4);
        let mut sol = synthesize_single_round(&h, &f, 2, 2, 1e-10).unwrap();
        let clean = verify_solution(&sol, &h, &f, None);
        assert!(clean.max_residual <= 1e-10);
        // Zero out one coefficient: the report must show the damage.
        let mut coeffs = sol.alice[0].coeffs().to_vec();
        let idx = coeffs.iter().position(|c| c.abs() > 0.1).unwrap();
        coeffs[idx] = 0.0;
        sol.alice[0] = ControlSignal::new(Role::Alice, coeffs).unwrap();
        let dirty = verify_solution(&sol, &h, &f, None);
        assert!(dirty.max_residual > 1e-6, "corruption not detected");
    }

    #[test]
    fn verify_with_simulation() {
        let h = identity_target(2);
        let f = BilinearMap::fb(4);
        let sol = synthesize_single_round(&h, &f, 2, 2, 1e-10).unwrap();
        let report = verify_solution(&sol, &h, &f, Some(10_000));
        assert!(report.sim_max_residual.unwrap() <= 1e-6);
        assert_near(report.recomputed_cost, sol.cost, 1e-10, "cost recompute");
    }

    #[test]
    fn shared_info_examples() {
        let fb = BilinearMap::fb(2);
        assert_near(shared_info_cost(&identity_target(2), &fb).unwrap(), PI, 1e-12, "identity");
        for n in [2usize, 4] {
            let h = TargetMatrix::new(hadamard(n));
            assert_near(shared_info_cost(&h, &fb).unwrap(), 2.0 * PI, 1e-12, "hadamard");
        }
        let h = worked_target();
        assert_near(shared_info_cost(&h, &fb).unwrap(), 5.75 * PI, 1e-12, "worked target");
    }

    #[test]
    fn gap_bound_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let h = TargetMatrix::new(random_matrix(&mut rng, 4, 4, 5.0));
            assert!(cost_gap_bound_check(&h).unwrap());
        }
        // Rank-1 target: the bound degenerates to zero but still holds.
        let rank1 = TargetMatrix::new(Matrix::from_fn(3, 3, |i, j| ((i + 1) * (j + 1)) as f64));
        assert!(cost_gap_bound_check(&rank1).unwrap());
        // Rank 3: the bound is strictly positive.
        let h = worked_target();
        assert!(cost_gap_bound_check(&h).unwrap());
        let sigma = svd(&h.mat).unwrap().singular_values;
        let bound =
            2.0 * PI / 4.0 * (0..4).map(|k| (k / 2) as f64 * sigma[k]).sum::<f64>();
        assert!(bound > 0.1, "rank-3 target should have a strictly positive bound");
    }

    #[test]
    fn orthogonal_bounds_examples() {
        // Identity hits the lower bound.
        assert!(orthogonal_bounds_check(&identity_target(3)).unwrap());
        // A 2x2 rotation by pi/4 hits the upper bound.
        let c = (PI / 4.0).cos();
        let s = (PI / 4.0).sin();
        let rot = TargetMatrix::new(Matrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap());
        assert!(orthogonal_bounds_check(&rot).unwrap());
        let not_orthogonal = TargetMatrix::new(Matrix::from_fn(2, 2, |_, _| 1.0));
        assert!(orthogonal_bounds_check(&not_orthogonal).is_err());
    }

    #[test]
    fn cost_homogeneity_and_orthogonal_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..10 {
            let h = TargetMatrix::new(random_matrix(&mut rng, 4, 4, 5.0));
            let c = rng.gen_range(-3.0..3.0_f64);
            if c.abs() < 1e-3 {
                continue;
            }
            let base = bh_optimal_cost(&h);
            let scaled = bh_optimal_cost(&TargetMatrix::new(h.mat.scale(c)));
            assert_near(scaled, c.abs() * base, 1e-10 * base.max(1.0), "homogeneity");

            let p = svd(&random_matrix(&mut rng, 4, 4, 1.0)).unwrap().left;
            let q = svd(&random_matrix(&mut rng, 4, 4, 1.0)).unwrap().left;
            let rotated = TargetMatrix::new(&(&p * &h.mat) * &q.transpose());
            assert_near(
                bh_optimal_cost(&rotated),
                base,
                1e-9 * base.max(1.0),
                "orthogonal invariance",
            );
        }
    }

    #[test]
    fn random_feasible_solutions_never_beat_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let h = worked_target();
        let (m, n) = (4, 4);
        let l = 8;
        let f = BilinearMap::fb(l);
        let padded = augment_target(&h, l).unwrap();
        let best = optimal_cost(&h, &f, m, n).unwrap();
        for _ in 0..50 {
            // U = H T R^{-1}, V^T = F^{-1} R T^T realizes the target for any
            // orthogonal T and invertible R.
            let theta = svd(&random_matrix(&mut rng, l, l, 1.0)).unwrap().left;
            let r_diag: Vec<f64> = (0..l).map(|_| rng.gen_range(0.2..3.0)).collect();
            let mut u = &padded.mat * &theta;
            for k in 0..l {
                for i in 0..l {
                    u[(i, k)] /= r_diag[k];
                }
            }
            let mut vt = theta.transpose();
            for i in 0..l {
                for j in 0..l {
                    vt[(i, j)] *= r_diag[i] / bh_sigma(i);
                }
            }
            let v = vt.transpose();
            let cost = (0..l).map(|i| u.row(i).iter().map(|x| x * x).sum::<f64>()).sum::<f64>()
                / m as f64
                + (0..l).map(|j| v.row(j).iter().map(|x| x * x).sum::<f64>()).sum::<f64>()
                    / n as f64;
            assert!(cost >= best - 1e-9, "random feasible cost {cost} beats optimum {best}");
        }
    }

    #[test]
    fn brute_force_single_target_minimum() {
        // Oracle for the 1x1 target [1] with a 2-coefficient truncation:
        // minimize |a|^2 + |b|^2 subject to sum_k a_k b_k / pi = 1. For fixed
        // a, the cheapest b is the least-norm solution of the constraint, so
        // scan a over a polar grid and refine around the best cell.
        let f2 = [1.0 / PI, 1.0 / PI];
        let cost_for = |a: [f64; 2]| -> f64 {
            let fa = [a[0] * f2[0], a[1] * f2[1]];
            let norm2 = fa[0] * fa[0] + fa[1] * fa[1];
            if norm2 < 1e-12 {
                return f64::INFINITY;
            }
            let a2 = a[0] * a[0] + a[1] * a[1];
            a2 + 1.0 / norm2
        };
        let mut best = f64::INFINITY;
        let mut best_a = [0.0, 0.0];
        for ir in 1..=160 {
            let radius = 0.05 * ir as f64;
            for ia in 0..96 {
                let ang = 2.0 * PI * ia as f64 / 96.0;
                let a = [radius * ang.cos(), radius * ang.sin()];
                let c = cost_for(a);
                if c < best {
                    best = c;
                    best_a = a;
                }
            }
        }
        // Local refinement.
        let mut step = 0.02;
        for _ in 0..60 {
            let mut improved = false;
            for d in [[step, 0.0], [-step, 0.0], [0.0, step], [0.0, -step]] {
                let cand = [best_a[0] + d[0], best_a[1] + d[1]];
                let c = cost_for(cand);
                if c < best {
                    best = c;
                    best_a = cand;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        let h = TargetMatrix::new(Matrix::from_rows(&[vec![1.0]]).unwrap());
        let formula = optimal_cost(&h, &BilinearMap::fb(2), 1, 1).unwrap();
        assert!(
            (best - formula).abs() <= 0.01 * formula,
            "search found {best}, formula {formula}"
        );
    }

    #[test]
    fn shared_cost_never_exceeds_single_round() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let f = BilinearMap::fb(12);
        for _ in 0..30 {
            let m = rng.gen_range(1..=5);
            let n = rng.gen_range(1..=5);
            let h = TargetMatrix::new(random_matrix(&mut rng, m, n, 8.0));
            let j = shared_info_cost(&h, &f).unwrap();
            let c = optimal_cost(&h, &f, m as u32, n as u32).unwrap();
            assert!(j <= c + 1e-9, "J {j} > C {c}");
        }
    }

    #[test]
    fn constraint_exactness_random_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..20 {
            let m = rng.gen_range(1..=6);
            let n = rng.gen_range(1..=6);
            let h = TargetMatrix::new(random_matrix(&mut rng, m, n, 10.0));
            let f = BilinearMap::fb(2 * m.max(n));
            let sol = synthesize_single_round(&h, &f, m as u32, n as u32, 1e-9).unwrap();
            assert!(sol.residual <= 1e-9);
            let expected = optimal_cost(&h, &f, m as u32, n as u32).unwrap();
            assert_near(sol.cost, expected, 1e-8 * expected.max(1.0), "cost vs formula");
        }
    }

    #[test]
    fn cost_report_fields() {
        let report = cost_report(&identity_target(2), &BilinearMap::fb(4), 2, 2).unwrap();
        assert_near(report.single_round_cost, 2.0 * PI, 1e-10, "C");
        assert_near(report.shared_info_cost, PI, 1e-12, "J");
        assert_near(report.gap, PI, 1e-10, "gap");
        assert_near(report.per_pair_costs[(0, 0)], 2.0 * PI, 1e-12, "per-pair");
        assert_eq!(report.per_pair_costs[(0, 1)], 0.0);
        assert!(report.gap_lower_bound.is_some());
    }
}
