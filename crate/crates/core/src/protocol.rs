//! Round-based execution of protocols through the simulated Heisenberg plant:
//! open-loop single rounds, low-energy bit signaling with loop controls, and
//! two-phase runs that first walk a communication tree and then apply the
//! cheap per-block controls.
//!
//! A transmitted bit costs one unit round. The speaker drives a small loop
//! whose orientation encodes the bit; the listener supplies the quadrature
//! carrier. At mid-round the plant output `z` peaks at `+-epsilon/(16 pi)`
//! and is decoded by sign; the second half-round reverses the loop so that
//! the full state returns to the origin before the next round starts.

use std::f64::consts::PI;

use crate::bh::{integrate_segment, Trajectory};
use crate::controls::{pair_output, BilinearMap, ControlSignal, Role};
use crate::error::{Error, Result};
use crate::partition::{
    block_value, is_monochromatic, MatrixPartition, ProtocolTree, Speaker,
};
use crate::synthesis::{ProtocolSolution, TargetMatrix};

/// What the decoding agent sees at the mid-round sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    /// The full plant state; decoding still keys on the output coordinate,
    /// which is the only one the two bit values separate.
    FullState,
    /// Sign of the output `z` (the minimal one-bit quantizer).
    ZSign,
    /// `z` quantized into the given number of uniform cells.
    ZQuantized(u32),
}

/// Per-round execution parameters.
#[derive(Debug, Clone, Copy)]
pub struct RoundConfig {
    pub steps_per_round: usize,
    pub observation: Observation,
    /// Realization tolerance on `|final output - target|`.
    pub tolerance: f64,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            steps_per_round: crate::bh::DEFAULT_STEPS,
            observation: Observation::ZSign,
            tolerance: 1e-6,
        }
    }
}

impl RoundConfig {
    fn validate(&self) -> Result<()> {
        if self.steps_per_round < 100 {
            return Err(Error::InvalidInput("need at least 100 steps per round".into()));
        }
        if let Observation::ZQuantized(levels) = self.observation {
            if levels < 2 {
                return Err(Error::InvalidInput("quantizer needs at least 2 levels".into()));
            }
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Steps per round, forced even so the mid-round sample lands on a node.
    fn even_steps(&self) -> usize {
        self.steps_per_round + self.steps_per_round % 2
    }
}

/// One round of a run transcript.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    /// 1 for signaling rounds, 2 for the realization round.
    pub phase: u8,
    pub speaker: Option<Speaker>,
    pub bit: Option<u8>,
    /// Output at the mid-round sample.
    pub z_mid: f64,
    /// Output at the end of the round.
    pub z_end: f64,
    /// Energy spent up to and including this round.
    pub cumulative_energy: f64,
}

/// Outcome of executing a protocol for one choice pair.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// 0-based `(row, column)` choice pair.
    pub choice: (usize, usize),
    /// Plant output at termination.
    pub final_output: f64,
    pub target: f64,
    pub bits_exchanged: usize,
    pub control_energy: f64,
    pub rounds_used: usize,
    /// `|final_output - target| <= tolerance`.
    pub realized: bool,
    pub transcript: Vec<RoundRecord>,
    /// Full state history; times run over `[0, rounds_used]`.
    pub trajectory: Trajectory,
}

/// A bit-carrying control pair: two opposite-orientation loops over one unit
/// round. `alice_signal` is the speaker's lobe (negated over `[t1, t2]`),
/// `bob_carrier` the listener's quadrature carrier. Total energy is at most
/// `epsilon / 2`; the state returns to the origin at `t2`.
#[derive(Debug, Clone)]
pub struct EpsilonSignal {
    pub epsilon: f64,
    pub bit: u8,
    pub alice_signal: ControlSignal,
    pub bob_carrier: ControlSignal,
    pub t1: f64,
    pub t2: f64,
}

/// Expected `|z(t1)|` of a signaling round with budget `epsilon`.
pub fn signal_amplitude(epsilon: f64) -> f64 {
    epsilon / (16.0 * PI)
}

/// Build the signaling pair for Alice announcing `bit` with energy budget
/// `epsilon`: `u = +-r cos(4 pi t)` encoding the bit, `v = r sin(4 pi t)`
/// the carrier, `r^2 = epsilon / 2`.
pub fn make_epsilon_signal(epsilon: f64, bit: u8) -> EpsilonSignal {
    assert!(epsilon > 0.0, "energy budget must be positive");
    assert!(bit <= 1, "bit must be 0 or 1");
    let (u, v) = speaker_round_controls(Speaker::Alice, epsilon, bit);
    EpsilonSignal { epsilon, bit, alice_signal: u, bob_carrier: v, t1: 0.5, t2: 1.0 }
}

/// Controls `(u, v)` for one signaling round. The speaker's channel carries
/// the bit-oriented cosine lobe, the listener's the sine carrier; signs are
/// arranged so that `z(t1) > 0` always means bit 1.
fn speaker_round_controls(speaker: Speaker, epsilon: f64, bit: u8) -> (ControlSignal, ControlSignal) {
    let r = (epsilon / 2.0).sqrt();
    let amp = r / std::f64::consts::SQRT_2;
    let orient = if bit == 1 { 1.0 } else { -1.0 };
    match speaker {
        // u = orient * r cos(4 pi t), v = r sin(4 pi t)
        Speaker::Alice => (
            ControlSignal::new(Role::Alice, vec![0.0, 0.0, 0.0, orient * amp]).expect("finite"),
            ControlSignal::new(Role::Bob, vec![0.0, 0.0, 0.0, amp]).expect("finite"),
        ),
        // u = r sin(4 pi t), v = -orient * r cos(4 pi t)
        Speaker::Bob => (
            ControlSignal::new(Role::Alice, vec![0.0, 0.0, amp, 0.0]).expect("finite"),
            ControlSignal::new(Role::Bob, vec![0.0, 0.0, orient * amp, 0.0]).expect("finite"),
        ),
    }
}

/// States of one simulated signaling round.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonRun {
    pub mid_state: [f64; 3],
    pub end_state: [f64; 3],
    /// Total control energy of the round (both channels).
    pub energy: f64,
}

/// Simulate a signaling round from the origin.
pub fn simulate_epsilon_signal(sig: &EpsilonSignal, steps: usize) -> EpsilonRun {
    let steps = steps.max(100) + steps % 2;
    let (mid, end) = run_signal_segments(
        &sig.alice_signal,
        &sig.bob_carrier,
        Speaker::Alice,
        [0.0; 3],
        steps,
        &mut |_, _| {},
    );
    EpsilonRun {
        mid_state: mid,
        end_state: end,
        energy: sig.alice_signal.energy() + sig.bob_carrier.energy(),
    }
}

/// Integrate one signaling round: the speaker's lobe is reversed over the
/// second half so the loop closes. Returns the states at mid-round and at the
/// end of the round; `sink` receives round-local times in `[0, 1]`.
fn run_signal_segments(
    u: &ControlSignal,
    v: &ControlSignal,
    speaker: Speaker,
    start: [f64; 3],
    steps: usize,
    sink: &mut dyn FnMut(f64, [f64; 3]),
) -> ([f64; 3], [f64; 3]) {
    let half = (steps / 2).max(50);
    let mid = integrate_segment(
        &|t| u.eval(t),
        &|t| v.eval(t),
        start,
        0.0,
        0.5,
        half,
        sink,
    );
    let end = match speaker {
        Speaker::Alice => integrate_segment(
            &|t| -u.eval(t),
            &|t| v.eval(t),
            mid,
            0.5,
            1.0,
            half,
            sink,
        ),
        Speaker::Bob => integrate_segment(
            &|t| u.eval(t),
            &|t| -v.eval(t),
            mid,
            0.5,
            1.0,
            half,
            sink,
        ),
    };
    (mid, end)
}

/// Decode a transmitted bit from the observed mid-round output.
fn decode_bit(z_mid: f64, observation: Observation, design_amp: f64) -> Result<u8> {
    let floor = (design_amp * 1e-6).max(1e-13);
    match observation {
        Observation::ZSign | Observation::FullState => {
            if z_mid.abs() < floor {
                return Err(Error::DecodeFailure(format!(
                    "observed output {z_mid:.3e} is below the separation floor {floor:.3e}"
                )));
            }
            Ok(u8::from(z_mid > 0.0))
        }
        Observation::ZQuantized(levels) => {
            let a = 1.5 * design_amp;
            let width = 2.0 * a / levels as f64;
            let idx = (((z_mid + a) / width).floor() as i64).clamp(0, levels as i64 - 1);
            let center = -a + (idx as f64 + 0.5) * width;
            if center.abs() < 0.5 * width - floor {
                return Err(Error::DecodeFailure(format!(
                    "quantizer cell {idx} straddles zero; {levels} levels cannot separate the states"
                )));
            }
            Ok(u8::from(center > 0.0))
        }
    }
}

/// Run one open-loop round of a synthesized solution through the plant.
/// The declared target is the pairing value of the chosen controls, so the
/// outcome checks the simulation against the formula route.
pub fn run_single_round(
    sol: &ProtocolSolution,
    i: usize,
    j: usize,
    cfg: &RoundConfig,
) -> Result<RunOutcome> {
    cfg.validate()?;
    if i >= sol.alice.len() || j >= sol.bob.len() {
        return Err(Error::InvalidInput(format!(
            "choice pair ({i}, {j}) out of range for a {}x{} solution",
            sol.alice.len(),
            sol.bob.len()
        )));
    }
    let u = &sol.alice[i];
    let v = &sol.bob[j];
    let f = BilinearMap::fb(u.len().max(v.len()));
    let target = pair_output(u, v, &f);
    let steps = cfg.even_steps();
    let mut times = vec![0.0];
    let mut states = vec![[0.0_f64; 3]];
    let mut z_mid = 0.0;
    let end = integrate_segment(
        &|t| u.eval(t),
        &|t| v.eval(t),
        [0.0; 3],
        0.0,
        1.0,
        steps,
        &mut |t, s| {
            if (t - 0.5).abs() < 1e-12 {
                z_mid = s[2];
            }
            times.push(t);
            states.push(s);
        },
    );
    let energy = u.energy() + v.energy();
    let final_output = end[2];
    Ok(RunOutcome {
        choice: (i, j),
        final_output,
        target,
        bits_exchanged: 0,
        control_energy: energy,
        rounds_used: 1,
        realized: (final_output - target).abs() <= cfg.tolerance,
        transcript: vec![RoundRecord {
            round: 1,
            phase: 2,
            speaker: None,
            bit: None,
            z_mid,
            z_end: final_output,
            cumulative_energy: energy,
        }],
        trajectory: Trajectory { times, states },
    })
}

/// Execute a two-phase protocol for the choice pair `(i, j)`: walk the tree
/// with one signaling round per bit, then realize the selected block's value
/// with the minimal loop controls (`energy = 2 pi |value|`).
pub fn run_two_phase(
    tree: &ProtocolTree,
    p: &MatrixPartition,
    h: &TargetMatrix,
    i: usize,
    j: usize,
    epsilon: f64,
    cfg: &RoundConfig,
) -> Result<RunOutcome> {
    cfg.validate()?;
    if epsilon <= 0.0 {
        return Err(Error::InvalidInput("signaling budget must be positive".into()));
    }
    if i >= h.rows() || j >= h.cols() {
        return Err(Error::InvalidInput(format!(
            "choice pair ({i}, {j}) out of range for a {}x{} target",
            h.rows(),
            h.cols()
        )));
    }
    if !p.blocks.iter().all(|b| is_monochromatic(h, b)) {
        return Err(Error::InvalidInput("two-phase runs need monochromatic blocks".into()));
    }
    let path = tree.replay(i, j)?;
    let steps = cfg.even_steps();
    let amp = signal_amplitude(epsilon);

    let mut state = [0.0_f64; 3];
    let mut times = vec![0.0];
    let mut states = vec![state];
    let mut transcript = Vec::new();
    let mut energy = 0.0;

    // Phase 1: one signaling round per bit on the path.
    for (round, &(speaker, bit)) in path.bits.iter().enumerate() {
        let (u, v) = speaker_round_controls(speaker, epsilon, bit);
        let offset = round as f64;
        let (mid, end) = run_signal_segments(&u, &v, speaker, state, steps, &mut |t, s| {
            times.push(offset + t);
            states.push(s);
        });
        let decoded = decode_bit(mid[2] - state[2], cfg.observation, amp)?;
        if decoded != bit {
            return Err(Error::DecodeFailure(format!(
                "round {}: sent {bit}, decoded {decoded}",
                round + 1
            )));
        }
        energy += u.energy() + v.energy();
        transcript.push(RoundRecord {
            round: round + 1,
            phase: 1,
            speaker: Some(speaker),
            bit: Some(bit),
            z_mid: mid[2],
            z_end: end[2],
            cumulative_energy: energy,
        });
        state = end;
    }

    // Phase 2: realize the block value with the minimal circular pair.
    let value = block_value(h, &p.blocks[path.block]);
    let scale = (PI * value.abs()).sqrt();
    let u2 = ControlSignal::new(Role::Alice, vec![0.0, value.signum() * scale]).expect("finite");
    let v2 = ControlSignal::new(Role::Bob, vec![0.0, scale]).expect("finite");
    let offset = path.bits.len() as f64;
    let mut z_mid = state[2];
    let end = integrate_segment(
        &|t| u2.eval(t),
        &|t| v2.eval(t),
        state,
        0.0,
        1.0,
        steps,
        &mut |t, s| {
            if (t - 0.5).abs() < 1e-12 {
                z_mid = s[2];
            }
            times.push(offset + t);
            states.push(s);
        },
    );
    energy += u2.energy() + v2.energy();
    let rounds_used = path.bits.len() + 1;
    transcript.push(RoundRecord {
        round: rounds_used,
        phase: 2,
        speaker: None,
        bit: None,
        z_mid,
        z_end: end[2],
        cumulative_energy: energy,
    });

    let target = h.mat[(i, j)];
    let final_output = end[2];
    Ok(RunOutcome {
        choice: (i, j),
        final_output,
        target,
        bits_exchanged: 2 * path.bits.len(),
        control_energy: energy,
        rounds_used,
        realized: (final_output - target).abs() <= cfg.tolerance,
        transcript,
        trajectory: Trajectory { times, states },
    })
}

/// Mean two-phase control energy over all `m * n` choice pairs. Approaches
/// the full-information cost `J(H)` as `epsilon` shrinks: the realization
/// rounds contribute exactly `J(H)` on average and every signaling round
/// costs at most `epsilon / 2`.
pub fn average_two_phase_cost(
    tree: &ProtocolTree,
    p: &MatrixPartition,
    h: &TargetMatrix,
    epsilon: f64,
    cfg: &RoundConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            total += run_two_phase(tree, p, h, i, j, epsilon, cfg)?.control_energy;
        }
    }
    Ok(total / (h.rows() * h.cols()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::BilinearMap;
    use crate::partition::{
        build_protocol_tree, min_monochromatic_partition, protocol_complexity,
        worked_example_target,
    };
    use crate::synthesis::{shared_info_cost, synthesize_single_round};

    fn assert_near(a: f64, b: f64, tol: f64, msg: &str) {
        assert!((a - b).abs() <= tol, "{msg}: {a} vs {b} (diff {})", (a - b).abs());
    }

    #[test]
    fn single_round_realizes_identity() {
        let h = TargetMatrix::new(crate::linalg::Matrix::identity(2));
        let sol = synthesize_single_round(&h, &BilinearMap::fb(4), 2, 2, 1e-10).unwrap();
        let cfg = RoundConfig::default();
        let on = run_single_round(&sol, 0, 0, &cfg).unwrap();
        assert!(on.realized);
        assert!((on.final_output - 1.0).abs() < 1e-6);
        assert_eq!(on.bits_exchanged, 0);
        let off = run_single_round(&sol, 0, 1, &cfg).unwrap();
        assert!(off.final_output.abs() < 1e-6);
    }

    #[test]
    fn single_round_zero_solution() {
        let h = TargetMatrix::new(crate::linalg::Matrix::zeros(1, 1));
        let sol = synthesize_single_round(&h, &BilinearMap::fb(2), 1, 1, 1e-10).unwrap();
        let out = run_single_round(&sol, 0, 0, &RoundConfig::default()).unwrap();
        assert_eq!(out.final_output, 0.0);
        assert_eq!(out.control_energy, 0.0);
    }

    #[test]
    fn single_round_rejects_out_of_range() {
        let h = TargetMatrix::new(crate::linalg::Matrix::identity(2));
        let sol = synthesize_single_round(&h, &BilinearMap::fb(4), 2, 2, 1e-10).unwrap();
        assert!(run_single_round(&sol, 2, 0, &RoundConfig::default()).is_err());
    }

    #[test]
    fn epsilon_signal_meets_contract() {
        for eps in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
            for bit in [0u8, 1u8] {
                let sig = make_epsilon_signal(eps, bit);
                let run = simulate_epsilon_signal(&sig, 10_000);
                assert!(run.energy < eps, "energy {} vs budget {eps}", run.energy);
                for c in run.end_state {
                    assert!(c.abs() <= 1e-8, "did not return to origin: {:?}", run.end_state);
                }
                let expected = signal_amplitude(eps);
                let z = run.mid_state[2];
                assert_near(z.abs(), expected, 1e-3 * expected, "mid-round amplitude");
                assert_eq!(z > 0.0, bit == 1, "orientation encodes the bit");
            }
        }
    }

    #[test]
    fn epsilon_signal_amplitude_scales_linearly() {
        let z1 = simulate_epsilon_signal(&make_epsilon_signal(1e-2, 1), 10_000).mid_state[2];
        let z2 = simulate_epsilon_signal(&make_epsilon_signal(5e-3, 1), 10_000).mid_state[2];
        assert_near(z1 / z2, 2.0, 1e-6, "amplitude is linear in the budget");
    }

    #[test]
    fn bob_rounds_encode_bits_too() {
        for bit in [0u8, 1u8] {
            let (u, v) = speaker_round_controls(Speaker::Bob, 1e-3, bit);
            let (mid, end) =
                run_signal_segments(&u, &v, Speaker::Bob, [0.0; 3], 10_000, &mut |_, _| {});
            assert_eq!(mid[2] > 0.0, bit == 1);
            for c in end {
                assert!(c.abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn two_phase_worked_example() {
        let h = worked_example_target();
        let search = min_monochromatic_partition(&h, 200_000);
        assert!(search.exact);
        let tree = build_protocol_tree(&search.partition, &h).unwrap();
        let cfg = RoundConfig::default();
        // (1, 2) zero-based lands in the value-5 block.
        let out = run_two_phase(&tree, &search.partition, &h, 1, 2, 1e-3, &cfg).unwrap();
        assert!(out.realized, "final {} target {}", out.final_output, out.target);
        assert_near(out.final_output, 5.0, 1e-6, "block value");
        assert!(out.bits_exchanged <= protocol_complexity(&tree));
        let phase2_energy =
            out.control_energy - 0.5e-3 * (out.bits_exchanged / 2) as f64;
        assert_near(phase2_energy, 2.0 * PI * 5.0, 1e-9, "realization energy");

        // The all-ones block sits two levels down: a shorter path than the
        // worst case.
        let out11 = run_two_phase(&tree, &search.partition, &h, 0, 0, 1e-3, &cfg).unwrap();
        assert_near(out11.final_output, 1.0, 1e-6, "block value 1");
        assert_eq!(out11.bits_exchanged, 4);
    }

    #[test]
    fn two_phase_constant_target_needs_no_bits() {
        let h = TargetMatrix::new(crate::linalg::Matrix::from_fn(2, 3, |_, _| 2.0));
        let search = min_monochromatic_partition(&h, 10_000);
        assert_eq!(search.partition.blocks.len(), 1);
        let tree = build_protocol_tree(&search.partition, &h).unwrap();
        let out = run_two_phase(&tree, &search.partition, &h, 1, 2, 1e-3, &RoundConfig::default())
            .unwrap();
        assert_eq!(out.bits_exchanged, 0);
        assert_near(out.control_energy, 4.0 * PI, 1e-9, "2 pi |h|");
        assert!(out.realized);
    }

    #[test]
    fn average_cost_approaches_shared_info_bound() {
        let h = worked_example_target();
        let search = min_monochromatic_partition(&h, 200_000);
        let tree = build_protocol_tree(&search.partition, &h).unwrap();
        let cfg = RoundConfig { steps_per_round: 2_000, ..RoundConfig::default() };
        let j = shared_info_cost(&h, &BilinearMap::fb(2)).unwrap();
        let mean = average_two_phase_cost(&tree, &search.partition, &h, 1e-3, &cfg).unwrap();
        assert!(mean >= j - 1e-9);
        assert!((mean - j) / j < 0.01, "mean {mean} vs bound {j}");
        // Shrinking the budget approaches the bound monotonically, and
        // halving it halves the signaling excess exactly.
        let mean_big = average_two_phase_cost(&tree, &search.partition, &h, 1e-2, &cfg).unwrap();
        let mean2 = average_two_phase_cost(&tree, &search.partition, &h, 5e-4, &cfg).unwrap();
        assert!(mean_big > mean && mean > mean2 && mean2 >= j - 1e-9);
        assert_near((mean2 - j) / (mean - j), 0.5, 1e-6, "excess is linear in the budget");
    }

    #[test]
    fn bits_never_exceed_protocol_complexity() {
        let h = worked_example_target();
        let search = min_monochromatic_partition(&h, 200_000);
        let tree = build_protocol_tree(&search.partition, &h).unwrap();
        let cfg = RoundConfig { steps_per_round: 1_000, ..RoundConfig::default() };
        let worst = protocol_complexity(&tree);
        for i in 0..4 {
            for j in 0..4 {
                let out = run_two_phase(&tree, &search.partition, &h, i, j, 1e-3, &cfg).unwrap();
                assert!(out.bits_exchanged <= worst, "pair ({i},{j})");
                assert!(out.realized, "pair ({i},{j}) not realized");
            }
        }
    }

    #[test]
    fn identity_two_phase_approaches_pi() {
        let h = TargetMatrix::new(crate::linalg::Matrix::identity(2));
        let search = min_monochromatic_partition(&h, 10_000);
        let tree = build_protocol_tree(&search.partition, &h).unwrap();
        let cfg = RoundConfig { steps_per_round: 2_000, ..RoundConfig::default() };
        let mean = average_two_phase_cost(&tree, &search.partition, &h, 1e-4, &cfg).unwrap();
        assert_near(mean, PI, 1e-3, "identity average");
    }

    #[test]
    fn quantized_observation_decodes() {
        let h = worked_example_target();
        let search = min_monochromatic_partition(&h, 200_000);
        let tree = build_protocol_tree(&search.partition, &h).unwrap();
        let cfg = RoundConfig {
            steps_per_round: 2_000,
            observation: Observation::ZQuantized(4),
            tolerance: 1e-6,
        };
        let out = run_two_phase(&tree, &search.partition, &h, 2, 1, 1e-3, &cfg).unwrap();
        assert!(out.realized);
        assert_near(out.final_output, 3.0, 1e-6, "block value 3");
    }

    #[test]
    fn rejects_nonpositive_budget() {
        let h = TargetMatrix::new(crate::linalg::Matrix::identity(2));
        let search = min_monochromatic_partition(&h, 10_000);
        let tree = build_protocol_tree(&search.partition, &h).unwrap();
        let err =
            run_two_phase(&tree, &search.partition, &h, 0, 0, 0.0, &RoundConfig::default());
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn transcript_shapes_match_rounds() {
        let h = worked_example_target();
        let search = min_monochromatic_partition(&h, 200_000);
        let tree = build_protocol_tree(&search.partition, &h).unwrap();
        let cfg = RoundConfig { steps_per_round: 1_000, ..RoundConfig::default() };
        let out = run_two_phase(&tree, &search.partition, &h, 3, 3, 1e-3, &cfg).unwrap();
        assert_eq!(out.transcript.len(), out.rounds_used);
        assert_eq!(out.transcript.last().unwrap().phase, 2);
        assert_eq!(out.bits_exchanged, 2 * (out.rounds_used - 1));
        // Trajectory spans all rounds.
        let t_last = *out.trajectory.times.last().unwrap();
        assert_near(t_last, out.rounds_used as f64, 1e-9, "time span");
    }
}
