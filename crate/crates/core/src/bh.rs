//! Time-domain simulators: the three-state Heisenberg plant
//! `x' = u, y' = v, z' = v x - u y`, the signed-area rule for its output, and
//! the rotation-group comparison system `X' = (u W_y + v W_x) X` on SO(3).
//!
//! Integration is classical fixed-step RK4: the dynamics are smooth, runs are
//! reproducible, and the observed order is easy to verify by step doubling.

use std::f64::consts::PI;

use crate::controls::{ControlSignal, Role};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Default number of RK4 steps over one unit round.
pub const DEFAULT_STEPS: usize = 10_000;

/// Sampled states of the Heisenberg plant.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 3]>,
}

impl Trajectory {
    pub fn final_state(&self) -> [f64; 3] {
        *self.states.last().expect("trajectory is never empty")
    }
}

/// Sampled rotation matrices of the comparison system.
#[derive(Debug, Clone)]
pub struct RotationTrajectory {
    pub times: Vec<f64>,
    pub matrices: Vec<Matrix>,
}

#[inline]
fn plant_rhs(u: f64, v: f64, s: [f64; 3]) -> [f64; 3] {
    [u, v, v * s[0] - u * s[1]]
}

/// RK4 over `[t_start, t_end]`, calling `sink(t, state)` after every step.
/// `u` and `v` are evaluated in the same time coordinate as the bounds.
pub(crate) fn integrate_segment(
    u: &dyn Fn(f64) -> f64,
    v: &dyn Fn(f64) -> f64,
    start: [f64; 3],
    t_start: f64,
    t_end: f64,
    steps: usize,
    sink: &mut dyn FnMut(f64, [f64; 3]),
) -> [f64; 3] {
    assert!(steps > 0 && t_end > t_start);
    let h = (t_end - t_start) / steps as f64;
    let mut s = start;
    for step in 0..steps {
        let t0 = t_start + step as f64 * h;
        let tm = t0 + 0.5 * h;
        let t1 = t_start + (step + 1) as f64 * h;
        let (u0, v0) = (u(t0), v(t0));
        let (um, vm) = (u(tm), v(tm));
        let (u1, v1) = (u(t1.min(t_end)), v(t1.min(t_end)));
        let k1 = plant_rhs(u0, v0, s);
        let k2 = plant_rhs(um, vm, [s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1], s[2] + 0.5 * h * k1[2]]);
        let k3 = plant_rhs(um, vm, [s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1], s[2] + 0.5 * h * k2[2]]);
        let k4 = plant_rhs(u1, v1, [s[0] + h * k3[0], s[1] + h * k3[1], s[2] + h * k3[2]]);
        for i in 0..3 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        sink(t1.min(t_end), s);
    }
    s
}

/// Integrate the Heisenberg plant over one unit round from the origin.
///
/// The recorded final `z` agrees with [`crate::controls::pair_output`] against
/// the diagonal Heisenberg map up to the integrator error.
pub fn simulate_bh(u: &ControlSignal, v: &ControlSignal, steps: usize) -> Trajectory {
    assert!(steps >= 100, "need at least 100 steps per round");
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push([0.0; 3]);
    integrate_segment(
        &|t| u.eval(t),
        &|t| v.eval(t),
        [0.0; 3],
        0.0,
        1.0,
        steps,
        &mut |t, s| {
            times.push(t);
            states.push(s);
        },
    );
    Trajectory { times, states }
}

/// Signed area enclosed by the planar `(x, y)` component of a trajectory,
/// `(1/2) closed-integral (x dy - y dx)` by the shoelace rule. The plant's
/// final output equals twice this area for closed loops.
///
/// Fails when the `(x, y)` endpoints do not close up within `1e-6`.
pub fn enclosed_area(traj: &Trajectory) -> Result<f64> {
    let first = traj.states.first().ok_or_else(|| Error::InvalidInput("empty trajectory".into()))?;
    let last = traj.final_state();
    let gap = ((last[0] - first[0]).powi(2) + (last[1] - first[1]).powi(2)).sqrt();
    if gap > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "open planar curve: endpoint gap {gap:.3e} exceeds 1e-6"
        )));
    }
    let mut acc = 0.0;
    for w in traj.states.windows(2) {
        let (x0, y0) = (w[0][0], w[0][1]);
        let (x1, y1) = (w[1][0], w[1][1]);
        acc += x0 * y1 - x1 * y0;
    }
    Ok(0.5 * acc)
}

// 3x3 helpers for the rotation-group integrator.

type Mat3 = [[f64; 3]; 3];

const IDENTITY3: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

/// `(u W_y + v W_x) X` with the standard rotation generators.
#[inline]
fn bloch_rhs(u: f64, v: f64, x: &Mat3) -> Mat3 {
    let a: Mat3 = [[0.0, 0.0, u], [0.0, 0.0, -v], [-u, v, 0.0]];
    mat3_mul(&a, x)
}

/// Project a near-rotation back onto the orthogonal group by Newton iteration
/// towards the polar factor: `X <- (X + X^{-T}) / 2`.
fn reorthogonalize(x: &mut Mat3) {
    for _ in 0..2 {
        let det = x[0][0] * (x[1][1] * x[2][2] - x[1][2] * x[2][1])
            - x[0][1] * (x[1][0] * x[2][2] - x[1][2] * x[2][0])
            + x[0][2] * (x[1][0] * x[2][1] - x[1][1] * x[2][0]);
        // Adjugate-transpose over the determinant is X^{-T}.
        let inv_t = [
            [
                (x[1][1] * x[2][2] - x[1][2] * x[2][1]) / det,
                (x[1][2] * x[2][0] - x[1][0] * x[2][2]) / det,
                (x[1][0] * x[2][1] - x[1][1] * x[2][0]) / det,
            ],
            [
                (x[0][2] * x[2][1] - x[0][1] * x[2][2]) / det,
                (x[0][0] * x[2][2] - x[0][2] * x[2][0]) / det,
                (x[0][1] * x[2][0] - x[0][0] * x[2][1]) / det,
            ],
            [
                (x[0][1] * x[1][2] - x[0][2] * x[1][1]) / det,
                (x[0][2] * x[1][0] - x[0][0] * x[1][2]) / det,
                (x[0][0] * x[1][1] - x[0][1] * x[1][0]) / det,
            ],
        ];
        for i in 0..3 {
            for j in 0..3 {
                x[i][j] = 0.5 * (x[i][j] + inv_t[i][j]);
            }
        }
    }
}

/// Integrate `X' = (u W_y + v W_x) X` from the identity over `[0, t_final]`,
/// re-projecting onto the rotation group after every step.
pub fn simulate_bloch(
    u: &ControlSignal,
    v: &ControlSignal,
    t_final: f64,
    steps: usize,
) -> RotationTrajectory {
    assert!(steps >= 100, "need at least 100 steps");
    assert!(t_final > 0.0);
    let h = t_final / steps as f64;
    let mut x = IDENTITY3;
    let mut times = Vec::with_capacity(steps + 1);
    let mut matrices = Vec::with_capacity(steps + 1);
    let to_matrix =
        |m: &Mat3| Matrix::from_fn(3, 3, |i, j| m[i][j]);
    times.push(0.0);
    matrices.push(to_matrix(&x));
    // Inputs are periodic with period 1; fold times so signal evaluation
    // stays inside the unit interval even when t_final exceeds 1.
    let fold = |t: f64| t - t.floor();
    for step in 0..steps {
        let t0 = step as f64 * h;
        let tm = t0 + 0.5 * h;
        let t1 = (step + 1) as f64 * h;
        let (u0, v0) = (u.eval(fold(t0)), v.eval(fold(t0)));
        let (um, vm) = (u.eval(fold(tm)), v.eval(fold(tm)));
        let (u1, v1) = (u.eval(fold(t1)), v.eval(fold(t1)));
        let k1 = bloch_rhs(u0, v0, &x);
        let mut x2 = x;
        add_scaled(&mut x2, &k1, 0.5 * h);
        let k2 = bloch_rhs(um, vm, &x2);
        let mut x3 = x;
        add_scaled(&mut x3, &k2, 0.5 * h);
        let k3 = bloch_rhs(um, vm, &x3);
        let mut x4 = x;
        add_scaled(&mut x4, &k3, h);
        let k4 = bloch_rhs(u1, v1, &x4);
        for i in 0..3 {
            for j in 0..3 {
                x[i][j] += h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
        reorthogonalize(&mut x);
        times.push(t1);
        matrices.push(to_matrix(&x));
    }
    RotationTrajectory { times, matrices }
}

#[inline]
fn add_scaled(dst: &mut Mat3, src: &Mat3, c: f64) {
    for i in 0..3 {
        for j in 0..3 {
            dst[i][j] += c * src[i][j];
        }
    }
}

/// Comparison of the rotation angle produced by one circular loop against the
/// Heisenberg output `z(1) = eps^2 / (2 pi)`.
#[derive(Debug, Clone, Copy)]
pub struct BlochComparison {
    /// Rotation angle extracted from the upper-left block of `X(T)`.
    pub theta: f64,
    /// Heisenberg output for the same inputs.
    pub z1: f64,
    /// `|theta + z1 / 2|`; vanishes faster than `eps^2` as `eps -> 0`.
    pub gap: f64,
    /// Largest entry of `X(T)` outside the upper-left 2x2 block and the
    /// (2,2) corner. `theta` is only meaningful when this is small (<= 1e-3).
    pub off_block_residual: f64,
}

/// Drive the rotation system with `u = eps cos(2 pi t)`, `v = eps sin(2 pi t)`
/// over `[0, 1/sqrt(1 + (eps/2pi)^2)]` and compare the resulting z-axis
/// rotation angle with half the Heisenberg loop output.
pub fn bloch_angle_vs_area(eps: f64) -> BlochComparison {
    assert!(eps > 0.0 && eps <= 1.0, "amplitude must lie in (0, 1]");
    let sqrt2 = std::f64::consts::SQRT_2;
    let u = ControlSignal::new(Role::Alice, vec![0.0, eps / sqrt2]).expect("finite");
    let v = ControlSignal::new(Role::Bob, vec![0.0, eps / sqrt2]).expect("finite");
    let t_final = 1.0 / (1.0 + (eps / (2.0 * PI)).powi(2)).sqrt();
    let run = simulate_bloch(&u, &v, t_final, DEFAULT_STEPS);
    let x = run.matrices.last().expect("non-empty");
    let off_block_residual = [x[(0, 2)], x[(1, 2)], x[(2, 0)], x[(2, 1)], x[(2, 2)] - 1.0]
        .iter()
        .fold(0.0_f64, |acc, e| acc.max(e.abs()));
    let theta = x[(0, 1)].atan2(x[(0, 0)]);
    let z1 = eps * eps / (2.0 * PI);
    BlochComparison { theta, z1, gap: (theta + 0.5 * z1).abs(), off_block_residual }
}
