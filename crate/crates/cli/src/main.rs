//! `ccx`: synthesize, verify, and price minimum-energy distributed control
//! protocols for the Heisenberg plant (and generic bilinear maps).
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible target or map,
//! 4 decode or tree-construction failure.

mod io;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccx_core::controls::BilinearMap;
use ccx_core::error::Error;
use ccx_core::partition::{
    build_protocol_tree, min_monochromatic_partition, protocol_complexity, MatrixPartition,
    ProtocolTree,
};
use ccx_core::protocol::{average_two_phase_cost, run_single_round, run_two_phase, RoundConfig};
use ccx_core::synthesis::{
    cost_report, shared_info_cost, synthesize_single_round, TargetMatrix,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "ccx",
    version,
    about = "Minimum-energy distributed control protocols over bilinear plants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the no-communication optimum against full information sharing.
    Cost {
        /// Matrix file (CSV rows or JSON {"rows","cols","data"}).
        matrix: PathBuf,
        /// Bilinear map: "bh" or a matrix file with a square truncation.
        #[arg(long, default_value = "bh")]
        map: String,
        /// Cost weight for the row agent (defaults to the row count).
        #[arg(long)]
        p: Option<u32>,
        /// Cost weight for the column agent (defaults to the column count).
        #[arg(long)]
        q: Option<u32>,
    },
    /// Synthesize a minimum-energy single-round protocol.
    Synth {
        matrix: PathBuf,
        /// Output path for the solution document.
        #[arg(long, default_value = "sol.json")]
        out: PathBuf,
        /// Residual tolerance on realized entries.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "bh")]
        map: String,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        q: Option<u32>,
    },
    /// Run one choice pair of a solution through the simulated plant.
    Simulate {
        /// Solution document written by `synth`.
        solution: PathBuf,
        /// 1-based row and column choice.
        #[arg(long, num_args = 2, value_names = ["I", "J"], required = true)]
        pair: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Write the trajectory as CSV `t,x,y,z`.
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Decompose a target into monochromatic blocks and build its bit tree.
    Partition {
        matrix: PathBuf,
        /// Force the exact branch-and-bound search.
        #[arg(long, conflicts_with = "greedy")]
        exact: bool,
        /// Force the greedy strip cover.
        #[arg(long)]
        greedy: bool,
        /// Node budget for the exact search.
        #[arg(long, default_value_t = 500_000)]
        budget: usize,
        /// Write the communication tree in DOT format.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Write the partition document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute two-phase protocols (signaling plus per-block realization).
    Twophase {
        matrix: PathBuf,
        /// Per-bit signaling energy budget (must be positive).
        #[arg(long)]
        epsilon: f64,
        /// Average the cost over every choice pair.
        #[arg(long, conflicts_with = "pair")]
        all_pairs: bool,
        /// 1-based row and column choice for a single run.
        #[arg(long, num_args = 2, value_names = ["I", "J"])]
        pair: Option<Vec<usize>>,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Write per-round transcript JSON lines (single-pair runs).
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Write the trajectory as CSV (single-pair runs).
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

/// A failed command: message plus process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) => 2,
            Error::Infeasible(_)
            | Error::UnsupportedRepresentation(_)
            | Error::SingularMap(_)
            | Error::ConvergenceFailure(_) => 3,
            Error::DecodeFailure(_) | Error::TreeConstruction(_) => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure::input(message)
    }
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes instead of panicking.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Cost { matrix, map, p, q } => cmd_cost(&matrix, &map, p, q),
        Command::Synth { matrix, out, tol, map, p, q } => {
            cmd_synth(&matrix, &out, tol, &map, p, q)
        }
        Command::Simulate { solution, pair, steps, traj, tol } => {
            cmd_simulate(&solution, &pair, steps, traj.as_deref(), tol)
        }
        Command::Partition { matrix, exact, greedy, budget, tree, out } => {
            cmd_partition(&matrix, exact, greedy, budget, tree.as_deref(), out.as_deref())
        }
        Command::Twophase { matrix, epsilon, all_pairs, pair, steps, transcript, traj, tol } => {
            cmd_twophase(
                &matrix,
                epsilon,
                all_pairs,
                pair.as_deref(),
                steps,
                transcript.as_deref(),
                traj.as_deref(),
                tol,
            )
        }
    }
}

fn load_target(path: &Path) -> Result<TargetMatrix, Failure> {
    Ok(TargetMatrix::new(io::read_matrix(path)?))
}

/// Resolve `--map`: the plant map at a truncation covering the target, or a
/// square matrix file.
fn load_map(spec: &str, h: &TargetMatrix) -> Result<BilinearMap, Failure> {
    if spec == "bh" {
        Ok(BilinearMap::fb(2 * h.rows().max(h.cols())))
    } else {
        let m = io::read_matrix(Path::new(spec))?;
        Ok(BilinearMap::new_generic(m, None)?)
    }
}

fn in_pi(v: f64) -> String {
    format!("{v:.12} ({:.6} pi)", v / PI)
}

fn cmd_cost(matrix: &Path, map: &str, p: Option<u32>, q: Option<u32>) -> Result<(), Failure> {
    let h = load_target(matrix)?;
    let f = load_map(map, &h)?;
    let p = p.unwrap_or(h.rows() as u32);
    let q = q.unwrap_or(h.cols() as u32);
    let report = cost_report(&h, &f, p, q)?;
    println!("target: {}x{}", h.rows(), h.cols());
    println!("single_round_cost: {}", in_pi(report.single_round_cost));
    println!("shared_info_cost:  {}", in_pi(report.shared_info_cost));
    println!("gap:               {}", in_pi(report.gap));
    match report.gap_lower_bound {
        Some(bound) => println!("gap_lower_bound:   {}", in_pi(bound)),
        None => println!("gap_lower_bound:   n/a (square targets over the plant map only)"),
    }
    println!("per_pair_costs:");
    for i in 0..report.per_pair_costs.rows() {
        let row: Vec<String> = (0..report.per_pair_costs.cols())
            .map(|j| format!("{:.6}", report.per_pair_costs[(i, j)]))
            .collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}

fn cmd_synth(
    matrix: &Path,
    out: &Path,
    tol: f64,
    map: &str,
    p: Option<u32>,
    q: Option<u32>,
) -> Result<(), Failure> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Failure::input("tolerance must be positive"));
    }
    let h = load_target(matrix)?;
    let f = load_map(map, &h)?;
    let p = p.unwrap_or(h.rows() as u32);
    let q = q.unwrap_or(h.cols() as u32);
    let sol = synthesize_single_round(&h, &f, p, q, tol)?;
    let doc = io::solution_to_file(&sol);
    let text = serde_json::to_string_pretty(&doc).expect("serializable");
    std::fs::write(out, text)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {}", out.display());
    println!("cost:     {}", in_pi(sol.cost));
    println!("residual: {:.3e}", sol.residual);
    Ok(())
}

fn cmd_simulate(
    solution: &Path,
    pair: &[usize],
    steps: usize,
    traj: Option<&Path>,
    tol: f64,
) -> Result<(), Failure> {
    let sol = io::read_solution(solution)?;
    let (i, j) = one_based_pair(pair)?;
    let cfg = RoundConfig { steps_per_round: steps, tolerance: tol, ..RoundConfig::default() };
    let outcome = run_single_round(&sol, i, j, &cfg)?;
    if let Some(path) = traj {
        io::write_trajectory(path, &outcome.trajectory)?;
    }
    let doc = io::outcome_doc(&outcome, Some((sol.cost, sol.recompute_cost())));
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    Ok(())
}

fn one_based_pair(pair: &[usize]) -> Result<(usize, usize), Failure> {
    if pair.len() != 2 || pair[0] == 0 || pair[1] == 0 {
        return Err(Failure::input("--pair takes two 1-based indices"));
    }
    Ok((pair[0] - 1, pair[1] - 1))
}

/// Shared by `partition` and `twophase`: decompose and build the tree.
fn decompose(
    h: &TargetMatrix,
    exact: bool,
    greedy: bool,
    budget: usize,
) -> (ccx_core::partition::PartitionSearch, Result<ProtocolTree, Error>) {
    let cells = h.rows() * h.cols();
    let effective_budget = if greedy {
        0
    } else if exact || cells <= 64 {
        budget.max(1)
    } else {
        0
    };
    let search = min_monochromatic_partition(h, effective_budget);
    let tree = build_protocol_tree(&search.partition, h);
    (search, tree)
}

fn cmd_partition(
    matrix: &Path,
    exact: bool,
    greedy: bool,
    budget: usize,
    tree_out: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let h = load_target(matrix)?;
    if exact && h.rows() * h.cols() > 64 {
        eprintln!("note: grid exceeds 64 cells; falling back to the greedy cover");
    }
    let (search, tree) = decompose(&h, exact, greedy, budget);
    let doc = io::partition_doc(&h, &search.partition, search.exact, tree.as_ref().ok());
    let text = serde_json::to_string_pretty(&doc).expect("serializable");
    match out {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    match tree {
        Ok(tree) => {
            if let Some(path) = tree_out {
                std::fs::write(path, io::tree_to_dot(&tree, &h, &search.partition)).map_err(
                    |e| Failure::input(format!("cannot write {}: {e}", path.display())),
                )?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Err(e) => Err(Failure::from(e)),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_twophase(
    matrix: &Path,
    epsilon: f64,
    all_pairs: bool,
    pair: Option<&[usize]>,
    steps: usize,
    transcript: Option<&Path>,
    traj: Option<&Path>,
    tol: f64,
) -> Result<(), Failure> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Failure::input("--epsilon must be positive"));
    }
    if !all_pairs && pair.is_none() {
        return Err(Failure::input("choose either --all-pairs or --pair I J"));
    }
    let h = load_target(matrix)?;
    let (search, tree) = decompose(&h, false, false, 500_000);
    let tree = tree.map_err(Failure::from)?;
    let partition: &MatrixPartition = &search.partition;
    let cfg = RoundConfig { steps_per_round: steps, tolerance: tol, ..RoundConfig::default() };

    if all_pairs {
        let mean = average_two_phase_cost(&tree, partition, &h, epsilon, &cfg)?;
        let bound = shared_info_cost(&h, &BilinearMap::fb(1))?;
        println!("pairs: {}", h.rows() * h.cols());
        println!("epsilon: {epsilon:e}");
        println!("blocks: {} (exact: {})", partition.blocks.len(), search.exact);
        println!("complexity: {}", protocol_complexity(&tree));
        println!("mean_cost:        {}", in_pi(mean));
        println!("shared_info_cost: {}", in_pi(bound));
        println!("excess:           {:.6e}", mean - bound);
        Ok(())
    } else {
        let (i, j) = one_based_pair(pair.expect("validated above"))?;
        let outcome = run_two_phase(&tree, partition, &h, i, j, epsilon, &cfg)?;
        if let Some(path) = transcript {
            io::write_transcript(path, &outcome)?;
        }
        if let Some(path) = traj {
            io::write_trajectory(path, &outcome.trajectory)?;
        }
        let doc = io::outcome_doc(&outcome, None);
        println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        Ok(())
    }
}
