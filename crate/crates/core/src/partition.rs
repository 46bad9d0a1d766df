//! Monochromatic sub-matrix partitions of a target, deterministic bit-exchange
//! trees over them, and the averaged cost of solving a target block by block.
//!
//! A block is a combinatorial rectangle: an arbitrary set of row indices
//! crossed with an arbitrary set of column indices. A partition covers every
//! cell exactly once. When all blocks carry a single value, applying the
//! per-block single-round optimum drives the averaged cost down to the
//! full-information bound `J(H)`.

use crate::controls::BilinearMap;
use crate::error::{Error, Result};
use crate::synthesis::{optimal_cost, shared_info_cost, TargetMatrix};

/// Absolute tolerance for "entries carry the same value". Entries are user
/// data, not computed quantities.
pub const VALUE_EQ_TOL: f64 = 1e-12;

/// One combinatorial rectangle: strictly increasing row and column index sets
/// (0-based).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartitionBlock {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl PartitionBlock {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::InvalidInput("block index sets must be nonempty".into()));
        }
        if rows.windows(2).any(|w| w[0] >= w[1]) || cols.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "block index sets must be strictly increasing".into(),
            ));
        }
        Ok(PartitionBlock { rows, cols })
    }

    #[inline]
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    #[inline]
    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows.binary_search(&i).is_ok() && self.cols.binary_search(&j).is_ok()
    }

    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    fn in_range(&self, m: usize, n: usize) -> bool {
        self.rows.last().map(|&r| r < m).unwrap_or(false)
            && self.cols.last().map(|&c| c < n).unwrap_or(false)
    }
}

/// A list of blocks intended to cover a target's grid exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixPartition {
    pub blocks: Vec<PartitionBlock>,
}

impl MatrixPartition {
    pub fn new(blocks: Vec<PartitionBlock>) -> Self {
        MatrixPartition { blocks }
    }

    /// Index of the block containing cell `(i, j)`, if any.
    pub fn block_of(&self, i: usize, j: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(i, j))
    }
}

/// All covered entries equal within [`VALUE_EQ_TOL`] (absolute).
pub fn is_monochromatic(h: &TargetMatrix, block: &PartitionBlock) -> bool {
    assert!(block.in_range(h.rows(), h.cols()), "block exceeds target dimensions");
    let first = h.mat[(block.rows[0], block.cols[0])];
    block
        .rows
        .iter()
        .all(|&i| block.cols.iter().all(|&j| (h.mat[(i, j)] - first).abs() <= VALUE_EQ_TOL))
}

/// Representative value of a monochromatic block.
pub fn block_value(h: &TargetMatrix, block: &PartitionBlock) -> f64 {
    h.mat[(block.rows[0], block.cols[0])]
}

/// Every cell of the grid covered by exactly one block, all indices in range.
pub fn validate_partition(h: &TargetMatrix, p: &MatrixPartition) -> bool {
    let (m, n) = (h.rows(), h.cols());
    let mut counts = vec![0u32; m * n];
    for block in &p.blocks {
        if !block.in_range(m, n) {
            return false;
        }
        for &i in &block.rows {
            for &j in &block.cols {
                counts[i * n + j] += 1;
            }
        }
    }
    counts.iter().all(|&c| c == 1)
}

/// Outcome of [`min_monochromatic_partition`].
#[derive(Debug, Clone)]
pub struct PartitionSearch {
    pub partition: MatrixPartition,
    /// Whether the returned block count is provably minimal.
    pub exact: bool,
    /// Branch-and-bound nodes explored (0 in pure greedy mode).
    pub nodes_explored: usize,
}

/// Cells a grid may have before exact search is refused outright.
const EXACT_CELL_LIMIT: usize = 64;
/// Compatible index sets wider than this are not enumerated exhaustively;
/// hitting the cap downgrades the result to non-exact.
const ENUM_WIDTH_CAP: usize = 16;

/// Minimal partitions kept for the tie-break pass.
const MINIMA_CAP: usize = 256;

/// Decompose the target into monochromatic blocks.
///
/// With a positive node `budget` (and at most 64 cells) a branch-and-bound
/// search over candidate rectangles anchored at the first uncovered cell
/// proves the minimum block count. Minimal decompositions are not unique;
/// among them this prefers one admitting the shallowest deterministic
/// bit-exchange tree (unrealizable ones last), then the lexicographically
/// smallest block list. A zero budget, larger grids, or budget exhaustion
/// fall back to a largest-strip-first greedy pass; the result is then a
/// valid partition with `exact = false`.
pub fn min_monochromatic_partition(h: &TargetMatrix, budget: usize) -> PartitionSearch {
    let cells = h.rows() * h.cols();
    if budget == 0 || cells > EXACT_CELL_LIMIT {
        return PartitionSearch { partition: greedy_partition(h), exact: false, nodes_explored: 0 };
    }
    let mut search = ExactSearch {
        h,
        m: h.rows(),
        n: h.cols(),
        full: if cells == 64 { u64::MAX } else { (1u64 << cells) - 1 },
        budget,
        nodes: 0,
        exhausted: false,
        capped: false,
        best_count: usize::MAX,
        minima: Vec::new(),
    };
    let mut chosen = Vec::new();
    search.run(0, &mut chosen);
    let nodes_explored = search.nodes;
    let complete = !search.exhausted && !search.capped;
    let pick = pick_among_minima(h, search.minima);
    match pick {
        Some(partition) if complete => {
            PartitionSearch { partition, exact: true, nodes_explored }
        }
        pick => {
            // Keep whichever of best-found / greedy has fewer blocks.
            let greedy = greedy_partition(h);
            let partition = match pick {
                Some(p) if p.blocks.len() < greedy.blocks.len() => p,
                _ => greedy,
            };
            PartitionSearch { partition, exact: false, nodes_explored }
        }
    }
}

/// Order tied minima by (tree depth, block list); unrealizable trees sort
/// last.
fn pick_among_minima(
    h: &TargetMatrix,
    minima: Vec<Vec<PartitionBlock>>,
) -> Option<MatrixPartition> {
    let mut best: Option<(usize, MatrixPartition)> = None;
    for mut blocks in minima {
        canonical_sort(&mut blocks);
        let candidate = MatrixPartition::new(blocks);
        let depth = build_protocol_tree(&candidate, h)
            .map(|t| t.depth())
            .unwrap_or(usize::MAX);
        let better = match &best {
            None => true,
            Some((d, p)) => depth < *d || (depth == *d && candidate.blocks < p.blocks),
        };
        if better {
            best = Some((depth, candidate));
        }
    }
    best.map(|(_, p)| p)
}

fn canonical_sort(blocks: &mut [PartitionBlock]) {
    blocks.sort_by(|a, b| (a.rows[0], a.cols[0]).cmp(&(b.rows[0], b.cols[0])));
}

struct ExactSearch<'a> {
    h: &'a TargetMatrix,
    m: usize,
    n: usize,
    full: u64,
    budget: usize,
    nodes: usize,
    exhausted: bool,
    capped: bool,
    best_count: usize,
    minima: Vec<Vec<PartitionBlock>>,
}

impl ExactSearch<'_> {
    fn run(&mut self, covered: u64, chosen: &mut Vec<PartitionBlock>) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if covered == self.full {
            if chosen.len() < self.best_count {
                self.best_count = chosen.len();
                self.minima.clear();
            }
            if chosen.len() == self.best_count && self.minima.len() < MINIMA_CAP {
                self.minima.push(chosen.clone());
            }
            return;
        }
        // Lower bound: one block per distinct remaining value. Ties with the
        // incumbent stay open so every minimal partition is collected.
        if chosen.len() + self.distinct_remaining(covered) > self.best_count {
            return;
        }
        let anchor = (covered.trailing_ones()) as usize;
        let (i, j) = (anchor / self.n, anchor % self.n);
        let candidates = self.candidate_blocks(covered, i, j);
        for (mask, block) in candidates {
            chosen.push(block);
            self.run(covered | mask, chosen);
            chosen.pop();
            if self.exhausted {
                return;
            }
        }
    }

    fn distinct_remaining(&self, covered: u64) -> usize {
        let mut values: Vec<f64> = Vec::new();
        for cell in 0..(self.m * self.n) {
            if covered & (1u64 << cell) == 0 {
                values.push(self.h.mat[(cell / self.n, cell % self.n)]);
            }
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut count = 0;
        let mut last = f64::NEG_INFINITY;
        for v in values {
            if v - last > VALUE_EQ_TOL {
                count += 1;
                last = v;
            }
        }
        count
    }

    #[inline]
    fn uncovered(&self, covered: u64, i: usize, j: usize) -> bool {
        covered & (1u64 << (i * self.n + j)) == 0
    }

    /// Every monochromatic rectangle within the uncovered region that contains
    /// the anchor cell, largest first.
    fn candidate_blocks(
        &mut self,
        covered: u64,
        i: usize,
        j: usize,
    ) -> Vec<(u64, PartitionBlock)> {
        let v = self.h.mat[(i, j)];
        let same = |a: f64| (a - v).abs() <= VALUE_EQ_TOL;
        let compat_cols: Vec<usize> = (0..self.n)
            .filter(|&c| self.uncovered(covered, i, c) && same(self.h.mat[(i, c)]))
            .collect();
        let compat_rows: Vec<usize> = (0..self.m)
            .filter(|&r| self.uncovered(covered, r, j) && same(self.h.mat[(r, j)]))
            .collect();

        // Enumerate subsets of the narrower side first; for each, the other
        // side's compatible set is refined and enumerated in turn.
        let cols_outer = compat_cols.len() <= compat_rows.len();
        let (outer, outer_anchor) = if cols_outer { (&compat_cols, j) } else { (&compat_rows, i) };
        if outer.len() > ENUM_WIDTH_CAP {
            self.capped = true;
            return Vec::new();
        }

        let mut out: Vec<(u64, PartitionBlock)> = Vec::new();
        let anchor_pos = outer.iter().position(|&x| x == outer_anchor).unwrap();
        let free: Vec<usize> =
            (0..outer.len()).filter(|&p| p != anchor_pos).map(|p| outer[p]).collect();
        for pick in 0..(1u32 << free.len()) {
            let mut outer_set = vec![outer_anchor];
            for (bit, &idx) in free.iter().enumerate() {
                if pick & (1 << bit) != 0 {
                    outer_set.push(idx);
                }
            }
            outer_set.sort_unstable();
            // Maximal compatible inner set for this outer choice.
            let inner_max: Vec<usize> = if cols_outer {
                compat_rows
                    .iter()
                    .copied()
                    .filter(|&r| {
                        outer_set
                            .iter()
                            .all(|&c| self.uncovered(covered, r, c) && same(self.h.mat[(r, c)]))
                    })
                    .collect()
            } else {
                compat_cols
                    .iter()
                    .copied()
                    .filter(|&c| {
                        outer_set
                            .iter()
                            .all(|&r| self.uncovered(covered, r, c) && same(self.h.mat[(r, c)]))
                    })
                    .collect()
            };
            if inner_max.len() > ENUM_WIDTH_CAP {
                self.capped = true;
                continue;
            }
            let inner_anchor = if cols_outer { i } else { j };
            let inner_free: Vec<usize> =
                inner_max.iter().copied().filter(|&x| x != inner_anchor).collect();
            for inner_pick in 0..(1u32 << inner_free.len()) {
                let mut inner_set = vec![inner_anchor];
                for (bit, &idx) in inner_free.iter().enumerate() {
                    if inner_pick & (1 << bit) != 0 {
                        inner_set.push(idx);
                    }
                }
                inner_set.sort_unstable();
                let (rows, cols) = if cols_outer {
                    (inner_set, outer_set.clone())
                } else {
                    (outer_set.clone(), inner_set)
                };
                let mut mask = 0u64;
                for &r in &rows {
                    for &c in &cols {
                        mask |= 1u64 << (r * self.n + c);
                    }
                }
                out.push((mask, PartitionBlock { rows, cols }));
            }
        }
        out.sort_by(|a, b| {
            b.1.cell_count()
                .cmp(&a.1.cell_count())
                .then_with(|| (a.1.rows.clone(), a.1.cols.clone()).cmp(&(b.1.rows.clone(), b.1.cols.clone())))
        });
        out
    }
}

/// Anchor at the first uncovered cell and take the larger of its two maximal
/// monochromatic strips: the anchor row crossed with every compatible column,
/// or every compatible row crossed with the anchor column. Ties break toward
/// the row strip. Strips keep the block count predictable (at most `m + n`
/// for a grid whose rows and columns each need one pass, e.g. `2n` on the
/// `n x n` identity).
fn greedy_partition(h: &TargetMatrix) -> MatrixPartition {
    let (m, n) = (h.rows(), h.cols());
    let mut covered = vec![false; m * n];
    let mut blocks: Vec<PartitionBlock> = Vec::new();
    while let Some(anchor) = covered.iter().position(|&c| !c) {
        let (i, j) = (anchor / n, anchor % n);
        let v = h.mat[(i, j)];
        let same = |a: f64| (a - v).abs() <= VALUE_EQ_TOL;
        let row_strip: Vec<usize> =
            (0..n).filter(|&c| !covered[i * n + c] && same(h.mat[(i, c)])).collect();
        let col_strip: Vec<usize> =
            (0..m).filter(|&r| !covered[r * n + j] && same(h.mat[(r, j)])).collect();
        let block = if row_strip.len() >= col_strip.len() {
            PartitionBlock { rows: vec![i], cols: row_strip }
        } else {
            PartitionBlock { rows: col_strip, cols: vec![j] }
        };
        for &r in &block.rows {
            for &c in &block.cols {
                covered[r * n + c] = true;
            }
        }
        blocks.push(block);
    }
    canonical_sort(&mut blocks);
    MatrixPartition::new(blocks)
}

/// Averaged per-block single-round cost and its information-sharing bound.
#[derive(Debug, Clone, Copy)]
pub struct PartitionCost {
    /// `(1/mn) sum_k m_k n_k C(H_k)`.
    pub average: f64,
    /// `J(H)`; never exceeds `average`, with equality for all-monochromatic
    /// partitions.
    pub lower_bound: f64,
}

/// Cost of running the per-block single-round optimum, averaged over all
/// choice pairs.
pub fn partition_cost_a(
    h: &TargetMatrix,
    p: &MatrixPartition,
    f: &BilinearMap,
) -> Result<PartitionCost> {
    if !validate_partition(h, p) {
        return Err(Error::InvalidInput("blocks do not partition the target grid".into()));
    }
    let mut acc = 0.0;
    for (k, block) in p.blocks.iter().enumerate() {
        let sub = TargetMatrix::new(h.mat.submatrix(&block.rows, &block.cols));
        let cost = optimal_cost(&sub, f, block.rows.len() as u32, block.cols.len() as u32)
            .map_err(|e| Error::Infeasible(format!("block {k}: {e}")))?;
        acc += block.cell_count() as f64 * cost;
    }
    let average = acc / (h.rows() * h.cols()) as f64;
    let lower_bound = shared_info_cost(h, f)?;
    if average < lower_bound - 1e-9 {
        return Err(Error::ConvergenceFailure(format!(
            "averaged block cost {average} undercuts its lower bound {lower_bound}"
        )));
    }
    Ok(PartitionCost { average, lower_bound })
}

/// Which agent announces a bit: `Alice` owns the column choice, `Bob` the row
/// choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speaker {
    Alice,
    Bob,
}

impl std::fmt::Display for Speaker {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Speaker::Alice => write!(f, "Alice"),
            Speaker::Bob => write!(f, "Bob"),
        }
    }
}

/// Node of a deterministic bit-exchange tree. At an internal node the speaker
/// sends 0 when their own choice lies in `bit0`, 1 when in `bit1`.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        /// Index into the partition's block list.
        block: usize,
    },
    Internal {
        speaker: Speaker,
        bit0: Vec<usize>,
        bit1: Vec<usize>,
        /// Human-readable bit semantics (1-based indices).
        semantics: String,
        zero: Box<TreeNode>,
        one: Box<TreeNode>,
    },
}

/// Binary communication tree whose leaves are the blocks of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTree {
    root: TreeNode,
}

/// Result of walking a tree for a concrete choice pair.
#[derive(Debug, Clone)]
pub struct ReplayPath {
    pub block: usize,
    /// Bits in transmission order, with their speakers.
    pub bits: Vec<(Speaker, u8)>,
}

impl ProtocolTree {
    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn depth(&self) -> usize {
        fn depth(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { zero, one, .. } => 1 + depth(zero).max(depth(one)),
            }
        }
        depth(&self.root)
    }

    pub fn leaf_count(&self) -> usize {
        fn count(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Internal { zero, one, .. } => count(zero) + count(one),
            }
        }
        count(&self.root)
    }

    /// Walk the tree for the choice pair `(i, j)` (0-based row, column).
    pub fn replay(&self, i: usize, j: usize) -> Result<ReplayPath> {
        let mut bits = Vec::new();
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { block } => return Ok(ReplayPath { block: *block, bits }),
                TreeNode::Internal { speaker, bit0, bit1, zero, one, .. } => {
                    let choice = match speaker {
                        Speaker::Bob => i,
                        Speaker::Alice => j,
                    };
                    if bit0.contains(&choice) {
                        bits.push((*speaker, 0));
                        node = zero;
                    } else if bit1.contains(&choice) {
                        bits.push((*speaker, 1));
                        node = one;
                    } else {
                        return Err(Error::InvalidInput(format!(
                            "choice {choice} not covered at a {speaker} node"
                        )));
                    }
                }
            }
        }
    }
}

/// Twice the tree depth: every bit crosses agent -> plant -> agent.
pub fn protocol_complexity(tree: &ProtocolTree) -> usize {
    2 * tree.depth()
}

/// Build a deterministic bit-exchange tree whose leaves biject with the
/// partition's blocks.
///
/// At each node the rows (and columns) of the live region are grouped into
/// connected components under "some live block uses both"; a component
/// grouping on either axis yields a bit the owning agent can announce without
/// cutting any block. Components are packed into two halves balancing the
/// block count. Regions whose both axes are inseparable while still holding
/// several blocks admit no deterministic protocol over these blocks, and the
/// construction reports that.
pub fn build_protocol_tree(p: &MatrixPartition, h: &TargetMatrix) -> Result<ProtocolTree> {
    if !validate_partition(h, p) {
        return Err(Error::InvalidInput("blocks do not partition the target grid".into()));
    }
    let all_rows: Vec<usize> = (0..h.rows()).collect();
    let all_cols: Vec<usize> = (0..h.cols()).collect();
    let all_blocks: Vec<usize> = (0..p.blocks.len()).collect();
    let root = split_region(p, &all_rows, &all_cols, &all_blocks)?;
    Ok(ProtocolTree { root })
}

fn split_region(
    p: &MatrixPartition,
    rows: &[usize],
    cols: &[usize],
    live: &[usize],
) -> Result<TreeNode> {
    if live.len() == 1 {
        return Ok(TreeNode::Leaf { block: live[0] });
    }

    let row_groups = axis_components(p, live, rows, true);
    let col_groups = axis_components(p, live, cols, false);

    // Prefer the axis whose balanced two-way packing splits the live blocks
    // most evenly; a single component on an axis means that agent cannot
    // speak without cutting a block.
    let row_split = (row_groups.len() > 1).then(|| pack_components(&row_groups, live, p, true));
    let col_split = (col_groups.len() > 1).then(|| pack_components(&col_groups, live, p, false));
    let (speaker, side0, side1) = match (row_split, col_split) {
        (Some(r), Some(c)) => {
            if r.imbalance <= c.imbalance {
                (Speaker::Bob, r.side0, r.side1)
            } else {
                (Speaker::Alice, c.side0, c.side1)
            }
        }
        (Some(r), None) => (Speaker::Bob, r.side0, r.side1),
        (None, Some(c)) => (Speaker::Alice, c.side0, c.side1),
        (None, None) => {
            return Err(Error::TreeConstruction(format!(
                "{} blocks share every row and column of a region; no agent can \
                 announce a separating bit",
                live.len()
            )))
        }
    };

    // Bit 0 goes to the half containing the smallest index.
    let (bit0, bit1) =
        if side0.first() < side1.first() { (side0, side1) } else { (side1, side0) };
    let (sub0, sub1): (Vec<usize>, Vec<usize>) = match speaker {
        Speaker::Bob => (
            live.iter().copied().filter(|&b| touches(&p.blocks[b].rows, &bit0)).collect(),
            live.iter().copied().filter(|&b| touches(&p.blocks[b].rows, &bit1)).collect(),
        ),
        Speaker::Alice => (
            live.iter().copied().filter(|&b| touches(&p.blocks[b].cols, &bit0)).collect(),
            live.iter().copied().filter(|&b| touches(&p.blocks[b].cols, &bit1)).collect(),
        ),
    };
    debug_assert_eq!(sub0.len() + sub1.len(), live.len(), "components never cut a block");

    let axis_name = match speaker {
        Speaker::Bob => "rows",
        Speaker::Alice => "columns",
    };
    let semantics = format!(
        "{speaker} sends 0 for {axis_name} {} and 1 for {axis_name} {}",
        fmt_one_based(&bit0),
        fmt_one_based(&bit1)
    );

    let (zero, one) = match speaker {
        Speaker::Bob => (
            split_region(p, &bit0, cols, &sub0)?,
            split_region(p, &bit1, cols, &sub1)?,
        ),
        Speaker::Alice => (
            split_region(p, rows, &bit0, &sub0)?,
            split_region(p, rows, &bit1, &sub1)?,
        ),
    };
    Ok(TreeNode::Internal {
        speaker,
        bit0,
        bit1,
        semantics,
        zero: Box::new(zero),
        one: Box::new(one),
    })
}

fn touches(block_axis: &[usize], side: &[usize]) -> bool {
    block_axis.iter().any(|x| side.contains(x))
}

fn fmt_one_based(idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Group the live axis indices into connected components, where two indices
/// connect when one live block uses both. Every live block's axis set lies
/// entirely inside one component.
fn axis_components(
    p: &MatrixPartition,
    live: &[usize],
    axis: &[usize],
    row_axis: bool,
) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..axis.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let pos_of = |idx: usize| axis.iter().position(|&a| a == idx);
    for &b in live {
        let block_axis = if row_axis { p.blocks[b].rows() } else { p.blocks[b].cols() };
        let present: Vec<usize> = block_axis.iter().filter_map(|&x| pos_of(x)).collect();
        for w in present.windows(2) {
            let (ra, rb) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group: Vec<Option<usize>> = vec![None; axis.len()];
    for (pos, &idx) in axis.iter().enumerate() {
        let root = find(&mut parent, pos);
        match root_to_group[root] {
            Some(g) => groups[g].push(idx),
            None => {
                root_to_group[root] = Some(groups.len());
                groups.push(vec![idx]);
            }
        }
    }
    for g in groups.iter_mut() {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

#[derive(Debug)]
struct Packed {
    side0: Vec<usize>,
    side1: Vec<usize>,
    imbalance: usize,
}

/// Pack axis components into two nonempty halves, balancing live-block counts
/// (greedy largest-first). Each live block touches exactly one component, so
/// the component weights sum to the live count.
fn pack_components(
    groups: &[Vec<usize>],
    live: &[usize],
    p: &MatrixPartition,
    row_axis: bool,
) -> Packed {
    debug_assert!(groups.len() >= 2);
    let weights: Vec<usize> = groups
        .iter()
        .map(|group| {
            live.iter()
                .filter(|&&b| {
                    let axis = if row_axis { p.blocks[b].rows() } else { p.blocks[b].cols() };
                    touches(axis, group)
                })
                .count()
        })
        .collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let mut side0: Vec<usize> = Vec::new();
    let mut side1: Vec<usize> = Vec::new();
    let (mut w0, mut w1) = (0usize, 0usize);
    for &g in &order {
        if w0 <= w1 {
            side0.extend(&groups[g]);
            w0 += weights[g];
        } else {
            side1.extend(&groups[g]);
            w1 += weights[g];
        }
    }
    side0.sort_unstable();
    side1.sort_unstable();
    Packed { side0, side1, imbalance: w0.abs_diff(w1) }
}

/// Energy saved per communicated bit, with its components.
#[derive(Debug, Clone, Copy)]
pub struct BitValueReport {
    /// No-communication optimum `C(H)`.
    pub single_round_cost: f64,
    /// Averaged per-block cost `A` of the partition.
    pub average_cost: f64,
    /// Worst-case bits through the plant, `2 * depth`.
    pub complexity: usize,
    /// `(C - A) / complexity`; absent for trees that never communicate.
    pub per_bit: Option<f64>,
}

/// `(C(H) - A) / protocol_complexity` for a monochromatic partition and its
/// tree.
pub fn value_of_bit(
    h: &TargetMatrix,
    f: &BilinearMap,
    tree: &ProtocolTree,
    p: &MatrixPartition,
) -> Result<BitValueReport> {
    if !p.blocks.iter().all(|b| is_monochromatic(h, b)) {
        return Err(Error::InvalidInput("all blocks must be monochromatic".into()));
    }
    let single_round_cost = optimal_cost(h, f, h.rows() as u32, h.cols() as u32)?;
    let average_cost = partition_cost_a(h, p, f)?.average;
    let complexity = protocol_complexity(tree);
    let per_bit =
        (complexity > 0).then(|| (single_round_cost - average_cost) / complexity as f64);
    Ok(BitValueReport { single_round_cost, average_cost, complexity, per_bit })
}

/// Check `sum_k sum_l sigma_l(H_k)^2 = tr(H H^T)` for a valid partition.
/// The per-block squared singular values always redistribute the target's
/// squared Frobenius mass.
pub fn partition_preserves_frobenius(h: &TargetMatrix, p: &MatrixPartition) -> Result<bool> {
    if !validate_partition(h, p) {
        return Err(Error::InvalidInput("blocks do not partition the target grid".into()));
    }
    let mut acc = 0.0;
    for block in &p.blocks {
        let sub = h.mat.submatrix(&block.rows, &block.cols);
        for s in crate::linalg::svd(&sub)?.singular_values {
            acc += s * s;
        }
    }
    let total = h.mat.frobenius_norm().powi(2);
    Ok((acc - total).abs() <= 1e-9 * total.max(1.0))
}

/// The worked 4x4 example target used throughout tests and documentation:
/// five monochromatic blocks, protocol complexity six.
pub fn worked_example_target() -> TargetMatrix {
    TargetMatrix::new(
        crate::linalg::Matrix::from_rows(&[
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, 1.0, 5.0, 5.0],
            vec![2.0, 3.0, 5.0, 5.0],
            vec![2.0, 3.0, 5.0, 5.0],
        ])
        .expect("static data"),
    )
}
