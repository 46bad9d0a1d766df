//! File formats: matrix input (CSV or JSON), solution documents, partition
//! and tree documents, DOT rendering, trajectory CSV, and run transcripts.

use std::path::Path;

use ccx_core::bh::Trajectory;
use ccx_core::controls::{ControlSignal, Role};
use ccx_core::linalg::Matrix;
use ccx_core::partition::{MatrixPartition, ProtocolTree, TreeNode};
use ccx_core::protocol::RunOutcome;
use ccx_core::synthesis::{ProtocolSolution, TargetMatrix};
use serde::{Deserialize, Serialize};

/// JSON form of a matrix file: `{"rows": m, "cols": n, "data": [[..], ..]}`.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f64>>,
}

/// Read a matrix from CSV (rows of comma-separated reals) or JSON.
pub fn read_matrix(path: &Path) -> Result<Matrix, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let looks_json = path.extension().map(|e| e == "json").unwrap_or(false)
        || text.trim_start().starts_with('{');
    if looks_json {
        let file: MatrixFile =
            serde_json::from_str(&text).map_err(|e| format!("bad matrix JSON: {e}"))?;
        if file.data.len() != file.rows || file.data.iter().any(|r| r.len() != file.cols) {
            return Err("matrix JSON dimensions do not match the data".into());
        }
        Matrix::from_rows(&file.data).map_err(|e| e.to_string())
    } else {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<f64>, _> = line
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect();
            rows.push(row.map_err(|e| format!("line {}: {e}", lineno + 1))?);
        }
        if rows.is_empty() {
            return Err("matrix file holds no rows".into());
        }
        Matrix::from_rows(&rows).map_err(|e| e.to_string())
    }
}

/// On-disk protocol solution document (`schema` 1). Coefficient rows are the
/// agents' Fourier vectors.
#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema: u32,
    pub p: u32,
    pub q: u32,
    pub alice: Vec<Vec<f64>>,
    pub bob: Vec<Vec<f64>>,
    pub cost: f64,
    pub residual: f64,
}

pub fn solution_to_file(sol: &ProtocolSolution) -> SolutionFile {
    SolutionFile {
        schema: 1,
        p: sol.weights.0,
        q: sol.weights.1,
        alice: sol.alice.iter().map(|s| s.coeffs().to_vec()).collect(),
        bob: sol.bob.iter().map(|s| s.coeffs().to_vec()).collect(),
        cost: sol.cost,
        residual: sol.residual,
    }
}

pub fn solution_from_file(file: SolutionFile) -> Result<ProtocolSolution, String> {
    if file.schema != 1 {
        return Err(format!("unsupported solution schema {}", file.schema));
    }
    if file.alice.is_empty() || file.bob.is_empty() {
        return Err("solution must hold at least one control per agent".into());
    }
    let alice: Result<Vec<_>, _> = file
        .alice
        .into_iter()
        .map(|c| ControlSignal::new(Role::Alice, c).map_err(|e| e.to_string()))
        .collect();
    let bob: Result<Vec<_>, _> = file
        .bob
        .into_iter()
        .map(|c| ControlSignal::new(Role::Bob, c).map_err(|e| e.to_string()))
        .collect();
    Ok(ProtocolSolution {
        alice: alice?,
        bob: bob?,
        cost: file.cost,
        residual: file.residual,
        weights: (file.p.max(1), file.q.max(1)),
    })
}

pub fn read_solution(path: &Path) -> Result<ProtocolSolution, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: SolutionFile =
        serde_json::from_str(&text).map_err(|e| format!("bad solution JSON: {e}"))?;
    solution_from_file(file)
}

/// Partition document: 1-based indices, one entry per block.
#[derive(Debug, Serialize)]
pub struct PartitionDoc {
    pub schema: u32,
    pub rows: usize,
    pub cols: usize,
    pub exact: bool,
    pub block_count: usize,
    pub blocks: Vec<BlockDoc>,
    /// Twice the tree depth; absent when no tree exists for the partition.
    pub complexity: Option<usize>,
    /// The bit-exchange tree, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeDoc>,
}

/// JSON form of a tree node: leaves carry the 1-based block number, internal
/// nodes the speaker, bit semantics, and both children.
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum TreeDoc {
    Leaf {
        block: usize,
    },
    Internal {
        speaker: String,
        bit0: Vec<usize>,
        bit1: Vec<usize>,
        semantics: String,
        zero: Box<TreeDoc>,
        one: Box<TreeDoc>,
    },
}

fn tree_doc(node: &TreeNode) -> TreeDoc {
    match node {
        TreeNode::Leaf { block } => TreeDoc::Leaf { block: block + 1 },
        TreeNode::Internal { speaker, bit0, bit1, semantics, zero, one } => TreeDoc::Internal {
            speaker: speaker.to_string(),
            bit0: bit0.iter().map(|&x| x + 1).collect(),
            bit1: bit1.iter().map(|&x| x + 1).collect(),
            semantics: semantics.clone(),
            zero: Box::new(tree_doc(zero)),
            one: Box::new(tree_doc(one)),
        },
    }
}

#[derive(Debug, Serialize)]
pub struct BlockDoc {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Common value for monochromatic blocks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

pub fn partition_doc(
    h: &TargetMatrix,
    p: &MatrixPartition,
    exact: bool,
    tree: Option<&ProtocolTree>,
) -> PartitionDoc {
    let blocks = p
        .blocks
        .iter()
        .map(|b| BlockDoc {
            rows: b.rows().iter().map(|&r| r + 1).collect(),
            cols: b.cols().iter().map(|&c| c + 1).collect(),
            value: ccx_core::partition::is_monochromatic(h, b)
                .then(|| ccx_core::partition::block_value(h, b)),
        })
        .collect();
    PartitionDoc {
        schema: 1,
        rows: h.rows(),
        cols: h.cols(),
        exact,
        block_count: p.blocks.len(),
        blocks,
        complexity: tree.map(ccx_core::partition::protocol_complexity),
        tree: tree.map(|t| tree_doc(t.root())),
    }
}

/// Render a tree in DOT for graph viewers. Internal nodes carry the speaker,
/// edges the bit, leaves the block (1-based) and its value when available.
pub fn tree_to_dot(tree: &ProtocolTree, h: &TargetMatrix, p: &MatrixPartition) -> String {
    let mut out = String::from("digraph protocol {\n");
    let mut counter = 0usize;
    fn visit(
        node: &TreeNode,
        out: &mut String,
        counter: &mut usize,
        h: &TargetMatrix,
        p: &MatrixPartition,
    ) -> usize {
        let id = *counter;
        *counter += 1;
        match node {
            TreeNode::Leaf { block } => {
                let b = &p.blocks[*block];
                let label = if ccx_core::partition::is_monochromatic(h, b) {
                    format!("B{} = {}", block + 1, ccx_core::partition::block_value(h, b))
                } else {
                    format!("B{}", block + 1)
                };
                out.push_str(&format!("  n{id} [shape=box, label=\"{label}\"];\n"));
            }
            TreeNode::Internal { speaker, semantics, zero, one, .. } => {
                out.push_str(&format!(
                    "  n{id} [shape=ellipse, label=\"{speaker}\", tooltip=\"{semantics}\"];\n"
                ));
                let zid = visit(zero, out, counter, h, p);
                out.push_str(&format!("  n{id} -> n{zid} [label=\"0\"];\n"));
                let oid = visit(one, out, counter, h, p);
                out.push_str(&format!("  n{id} -> n{oid} [label=\"1\"];\n"));
            }
        }
        id
    }
    visit(tree.root(), &mut out, &mut counter, h, p);
    out.push_str("}\n");
    out
}

/// Run outcome document printed by `simulate` and `twophase --pair`.
#[derive(Debug, Serialize)]
pub struct OutcomeDoc {
    pub schema: u32,
    /// 1-based `(row, column)` choice pair.
    pub choice: [usize; 2],
    pub final_output: f64,
    pub target: f64,
    pub bits_exchanged: usize,
    pub control_energy: f64,
    pub rounds_used: usize,
    pub realized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recomputed_cost: Option<f64>,
}

pub fn outcome_doc(out: &RunOutcome, costs: Option<(f64, f64)>) -> OutcomeDoc {
    OutcomeDoc {
        schema: 1,
        choice: [out.choice.0 + 1, out.choice.1 + 1],
        final_output: out.final_output,
        target: out.target,
        bits_exchanged: out.bits_exchanged,
        control_energy: out.control_energy,
        rounds_used: out.rounds_used,
        realized: out.realized,
        declared_cost: costs.map(|c| c.0),
        recomputed_cost: costs.map(|c| c.1),
    }
}

/// One transcript line per round, as JSON lines.
#[derive(Debug, Serialize)]
struct TranscriptLine {
    round: usize,
    phase: u8,
    speaker: Option<String>,
    bit: Option<u8>,
    z_mid: f64,
    z_end: f64,
    cumulative_energy: f64,
}

pub fn write_transcript(path: &Path, outcome: &RunOutcome) -> Result<(), String> {
    let mut lines = String::new();
    for rec in &outcome.transcript {
        let line = TranscriptLine {
            round: rec.round,
            phase: rec.phase,
            speaker: rec.speaker.map(|s| s.to_string()),
            bit: rec.bit,
            z_mid: rec.z_mid,
            z_end: rec.z_end,
            cumulative_energy: rec.cumulative_energy,
        };
        lines.push_str(&serde_json::to_string(&line).expect("serializable"));
        lines.push('\n');
    }
    std::fs::write(path, lines).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Trajectory CSV: header `t,x,y,z`, one row per sample.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), String> {
    let mut out = String::from("t,x,y,z\n");
    for (t, s) in traj.times.iter().zip(&traj.states) {
        out.push_str(&format!("{t},{},{},{}\n", s[0], s[1], s[2]));
    }
    std::fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
