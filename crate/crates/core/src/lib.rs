//! Minimum-energy distributed control for bilinear input-output systems.
//!
//! Two agents, Alice and Bob, each pick one of finitely many open-loop
//! controls and drive a shared plant whose scalar output after one round is
//! bilinear in the pair. A target matrix `H` prescribes the output for every
//! choice pair. This crate synthesizes the cheapest single-round control sets
//! realizing `H`, verifies them by direct simulation of the Heisenberg plant,
//! and quantifies how much control energy communication between the agents
//! can save via monochromatic matrix partitions and two-phase protocols that
//! signal through the plant itself.
//!
//! Module map:
//! - [`linalg`]: dense matrices, SVD, symmetric eigensolver, polar, rank.
//! - [`controls`]: Fourier-coefficient controls and the bilinear pairing.
//! - [`bh`]: RK4 simulators for the plant and its rotation-group cousin.
//! - [`synthesis`]: feasibility, closed-form optimal cost, constructive
//!   minimum-energy solutions, cost comparisons.
//! - [`partition`]: monochromatic partitions, protocol trees, cost bounds.
//! - [`protocol`]: round-based execution, low-energy bit signaling,
//!   two-phase runs.

pub mod bh;
pub mod controls;
pub mod error;
pub mod linalg;
pub mod partition;
pub mod protocol;
pub mod synthesis;

pub use bh::{simulate_bh, Trajectory};
pub use controls::{pair_output, BilinearMap, ControlSignal, Role};
pub use error::{Error, Result};
pub use linalg::{svd, Matrix, SvdResult};
pub use partition::{MatrixPartition, PartitionBlock, ProtocolTree, Speaker};
pub use protocol::{RoundConfig, RunOutcome};
pub use synthesis::{ProtocolSolution, TargetMatrix};
