use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{CanonicalKey, Cell, DiagramError, GridDiagram, MarkKind, Marking};
use crate::laurent::LaurentPoly;
use crate::metrics::{complexity, scr, Complexity};
use crate::moves::{self, CommuteClass, Move, MoveError, MoveRecord, Sign, SkeinCrossing};
use crate::trivial::{self, IndexSet, Normalization, TrivialError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
    #[error("markings at {0} and {1} share neither a row nor a column")]
    NotAligned(Cell, Cell),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Trivial(#[from] TrivialError),
    #[error(transparent)]
    Move(#[from] MoveError),
}

fn violation(msg: impl Into<String>) -> EngineError {
    EngineError::InternalInvariantViolation(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Along {
    Row,
    Column,
}

/// Number of cells between two markings along the shorter arc of their
/// common row or column.
pub fn len(d: &GridDiagram, a: Cell, b: Cell, along: Along) -> Result<usize, EngineError> {
    let m = d.strips();
    let dist = match along {
        Along::Row if a.row == b.row => (b.strip + m - a.strip) % m,
        Along::Column if d.column_of(a) == d.column_of(b) => (d.height(b) + m - d.height(a)) % m,
        _ => return Err(EngineError::NotAligned(a, b)),
    };
    Ok(dist.min(m - dist))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReduceCase {
    /// The moved column reached the column of O1.
    Adjacent,
    /// Blocked by X3; the O2 row travels towards X2.
    BlockedTowardsX2,
    /// Blocked by X3; the O2 row travels until X3 meets O3.
    BlockedTowardsO3,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducePlan {
    pub case: ReduceCase,
    /// Commutations ending in one destabilization.
    pub moves: Vec<Move>,
    /// Positions in `moves` of interleaving column commutations.
    pub branch_events: Vec<usize>,
}

fn col_len(d: &GridDiagram, a: Cell, b: Cell) -> usize {
    len(d, a, b, Along::Column).expect("same column")
}

/// Moves the row holding the `kind` marking of column `col` until that
/// marking is vertically adjacent to the other marking of its column.
fn approach(cur: &mut GridDiagram, moves: &mut Vec<Move>, kind: MarkKind, col: usize) -> Result<(), EngineError> {
    let m = cur.strips();
    let n = cur.n();
    loop {
        let mover = cur.marks(kind)[col];
        let target = cur.marks(kind.other())[col];
        let up = (cur.height(target) + m - cur.height(mover)) % m;
        if up == 1 || up == m - 1 {
            return Ok(());
        }
        let row = if up < m - up {
            mover.row
        } else {
            (mover.row + n - 1) % n
        };
        match moves::classify_row_commutation(cur, row)? {
            CommuteClass::NonInterleaving => {}
            class => {
                return Err(violation(format!(
                    "row commutation {row} during reduction is {class:?}"
                )))
            }
        }
        let mv = Move::RowCommute { row };
        *cur = moves::apply(cur, &mv)?;
        moves.push(mv);
    }
}

/// One round of the grid number reduction, or `None` when every component
/// already has grid number one.
pub fn reduce_grid_number_step(d: &GridDiagram) -> Result<Option<ReducePlan>, EngineError> {
    let comps = d.components();
    let n = d.n();
    let m = d.strips();
    let mut best: Option<(usize, usize)> = None;
    for c in 0..n {
        if comps.components[comps.of_o[c]].grid_number < 2 {
            continue;
        }
        let l = col_len(d, d.o_marks()[c], d.x_marks()[c]);
        if best.is_none_or(|(bl, _)| l < bl) {
            best = Some((l, c));
        }
    }
    let Some((_, c1)) = best else { return Ok(None) };
    let r1 = d.o_marks()[c1].row;
    let mut cur = d.clone();
    let mut mv = Vec::new();
    let mut branch_events = Vec::new();
    let blocked = loop {
        let o1 = cur.o_marks()[cur.o_in_row(r1)];
        let x2 = cur.x_marks()[cur.x_in_row(r1)];
        let c2 = cur.column_of(x2);
        let right = (x2.strip + m - o1.strip) % m;
        if right == 1 || right == m - 1 {
            break None;
        }
        let leftward = right <= m - right;
        let j = if leftward { (c2 + n - 1) % n } else { c2 };
        match moves::classify_column_commutation(&cur, j)? {
            CommuteClass::Illegal => {
                let o2 = cur.o_marks()[c2];
                let x3 = cur.x_marks()[cur.x_in_row(o2.row)];
                let beside = cur.shift_strip(o2.strip, if leftward { -1 } else { 1 });
                if x3.strip != beside {
                    return Err(violation(format!(
                        "column {c2} blocked by a marking other than X3 at {x3}"
                    )));
                }
                break Some((c2, cur.column_of(x3)));
            }
            class => {
                if class == CommuteClass::Interleaving {
                    branch_events.push(mv.len());
                }
                let step = Move::ColumnCommute { column: j };
                cur = moves::apply(&cur, &step)?;
                mv.push(step);
            }
        }
    };
    let case = match blocked {
        None => {
            let c1 = cur.column_of(cur.o_marks()[cur.o_in_row(r1)]);
            approach(&mut cur, &mut mv, MarkKind::O, c1)?;
            let o1 = cur.o_marks()[c1];
            let (a, c) = (cur.x_marks()[c1], cur.x_marks()[cur.x_in_row(o1.row)]);
            mv.push(Move::Destabilize {
                a: Marking::new(MarkKind::X, a),
                b: Marking::new(MarkKind::O, o1),
                c: Marking::new(MarkKind::X, c),
            });
            ReduceCase::Adjacent
        }
        Some((c2, c3)) => {
            let x2o2 = col_len(&cur, cur.x_marks()[c2], cur.o_marks()[c2]);
            let x3o3 = col_len(&cur, cur.x_marks()[c3], cur.o_marks()[c3]);
            if x3o3 >= x2o2 {
                approach(&mut cur, &mut mv, MarkKind::O, c2)?;
                let o2 = cur.o_marks()[c2];
                mv.push(Move::Destabilize {
                    a: Marking::new(MarkKind::X, cur.x_marks()[c2]),
                    b: Marking::new(MarkKind::O, o2),
                    c: Marking::new(MarkKind::X, cur.x_marks()[cur.x_in_row(o2.row)]),
                });
                ReduceCase::BlockedTowardsX2
            } else {
                approach(&mut cur, &mut mv, MarkKind::X, c3)?;
                let x3 = cur.x_marks()[c3];
                mv.push(Move::Destabilize {
                    a: Marking::new(MarkKind::O, cur.o_marks()[cur.o_in_row(x3.row)]),
                    b: Marking::new(MarkKind::X, x3),
                    c: Marking::new(MarkKind::O, cur.o_marks()[c3]),
                });
                ReduceCase::BlockedTowardsO3
            }
        }
    };
    Ok(Some(ReducePlan {
        case,
        moves: mv,
        branch_events,
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortStep {
    /// Column sort, wrap alignment and row sort moves.
    pub moves: Vec<Move>,
    /// Positions in `moves` of interleaving column commutations.
    pub branch_events: Vec<usize>,
    pub index: IndexSet,
}

pub fn sort_columns_step(d: &GridDiagram) -> Result<SortStep, EngineError> {
    let plan = trivial::sorted_trivial_form(d)?;
    let mut cur = d.clone();
    let mut branch_events = Vec::new();
    for (i, mv) in plan.moves.iter().enumerate() {
        if let Move::ColumnCommute { column } = *mv {
            if moves::classify_column_commutation(&cur, column)? == CommuteClass::Interleaving {
                branch_events.push(i);
            }
        }
        cur = moves::apply(&cur, mv)?;
    }
    Ok(SortStep {
        moves: plan.moves,
        branch_events,
        index: trivial::index_set_of(d)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRole {
    Internal,
    Leaf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Isotopy moves: commutations that are not branch events,
    /// destabilizations and translations.
    Moves,
    /// The crossing change at a branch.
    Change,
    /// The resolution at a branch.
    Resolve,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub record: MoveRecord,
    pub complexity: Complexity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub key: String,
    pub diagram: GridDiagram,
    pub role: NodeRole,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub node: usize,
    pub crossing: SkeinCrossing,
    pub changed: usize,
    pub resolved: usize,
    pub measure: Complexity,
    pub changed_measure: Complexity,
    pub resolved_measure: Complexity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub node: usize,
    pub index: IndexSet,
    pub value: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeinTree {
    pub root: usize,
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
    pub branches: Vec<BranchRecord>,
    pub leaves: Vec<LeafRecord>,
}

/// Moves along the principal path: every branch follows the crossing
/// change.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
    pub u_bound: usize,
}

#[derive(Clone, Debug, Default)]
pub struct EvalConfig {
    pub normalization: Option<Normalization>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: LaurentPoly,
    pub tree: SkeinTree,
}

impl Evaluation {
    pub fn u_bound(&self) -> usize {
        self.tree.principal_path().u_bound
    }
    pub fn trace(&self) -> ReductionTrace {
        self.tree.principal_path()
    }
}

/// Skein coefficients `(on the changed diagram, on the resolution)`.
pub fn skein_coefficients(sign: Sign, p: u32) -> (LaurentPoly, LaurentPoly) {
    let p = p as i64;
    match sign {
        Sign::Positive => (LaurentPoly::a_pow(2 * p), LaurentPoly::monomial(1, p, 1)),
        Sign::Negative => (LaurentPoly::a_pow(-2 * p), LaurentPoly::monomial(-1, -p, 1)),
    }
}

enum Phase {
    Reduce(Vec<Move>),
    Sort(Vec<Move>),
}

impl Phase {
    fn moves(&self) -> &[Move] {
        match self {
            Phase::Reduce(m) | Phase::Sort(m) => m,
        }
    }
}

struct Evaluator<'a> {
    norm: Option<&'a Normalization>,
    memo: HashMap<CanonicalKey, (usize, LaurentPoly)>,
    active: HashSet<CanonicalKey>,
    tree: SkeinTree,
}

/// A translation taking `from` onto `to`, when they differ.
fn alignment(from: &GridDiagram, to: &GridDiagram) -> Option<Move> {
    if from == to {
        return None;
    }
    for v in 0..from.n() as i64 {
        for h in 0..from.strips() as i64 {
            if from.translate(h, v) == *to {
                return Some(Move::Translate { h, v });
            }
        }
    }
    None
}

fn record(d: &GridDiagram, mv: &Move, plan_remaining: usize) -> Result<(GridDiagram, TraceStep), EngineError> {
    let (next, record) = moves::apply_recorded(d, mv)?;
    let complexity = complexity(&next, plan_remaining);
    Ok((next, TraceStep { record, complexity }))
}

impl<'a> Evaluator<'a> {
    fn node(&mut self, d: &GridDiagram) -> usize {
        let id = self.tree.nodes.len();
        self.tree.nodes.push(TreeNode {
            id,
            key: d.canonical_key().to_hex(),
            diagram: d.clone(),
            role: NodeRole::Internal,
            value: String::new(),
        });
        id
    }

    fn edge(&mut self, from: usize, to: usize, kind: EdgeKind, steps: Vec<TraceStep>) {
        self.tree.edges.push(TreeEdge { from, to, kind, steps });
    }

    fn set_value(&mut self, id: usize, v: &LaurentPoly) {
        self.tree.nodes[id].value = v.to_string();
    }

    /// Evaluates `d`, returning its node and value. `steps` lead into `d`
    /// from `from` and are extended by an alignment translation when the
    /// memoized node is a translate of `d`.
    fn eval_into(
        &mut self,
        from: usize,
        kind: EdgeKind,
        mut steps: Vec<TraceStep>,
        d: &GridDiagram,
    ) -> Result<(usize, LaurentPoly), EngineError> {
        let (id, value) = self.eval(d)?;
        let stored = self.tree.nodes[id].diagram.clone();
        if let Some(mv) = alignment(d, &stored) {
            let (_, step) = record(d, &mv, 0)?;
            steps.push(step);
        }
        self.edge(from, id, kind, steps);
        Ok((id, value))
    }

    fn eval(&mut self, d: &GridDiagram) -> Result<(usize, LaurentPoly), EngineError> {
        let key = d.canonical_key();
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        if !self.active.insert(key.clone()) {
            return Err(violation("evaluation revisited a diagram still being evaluated"));
        }
        let id = self.node(d);
        let phase = match reduce_grid_number_step(d)? {
            Some(plan) => Phase::Reduce(plan.moves),
            None => Phase::Sort(trivial::sorted_trivial_form(d)?.moves),
        };
        let value = self.walk(id, d, &phase, 0)?;
        self.set_value(id, &value);
        self.active.remove(&key);
        self.memo.insert(key, (id, value.clone()));
        Ok((id, value))
    }

    fn walk(
        &mut self,
        start: usize,
        d: &GridDiagram,
        phase: &Phase,
        from_step: usize,
    ) -> Result<LaurentPoly, EngineError> {
        let plan = phase.moves();
        let mut cur = d.clone();
        let node = start;
        let mut pending: Vec<TraceStep> = Vec::new();
        for i in from_step..plan.len() {
            let mv = plan[i];
            let remaining = plan.len() - i;
            if let Move::ColumnCommute { column } = mv {
                if let Some(crossing) = moves::crossing_at(&cur, column)? {
                    let branch = if pending.is_empty() {
                        node
                    } else {
                        let b = self.node(&cur);
                        self.edge(node, b, EdgeKind::Moves, std::mem::take(&mut pending));
                        b
                    };
                    let value = self.branch(branch, &cur, crossing, phase, i, remaining)?;
                    if branch != start {
                        self.set_value(branch, &value);
                    }
                    return Ok(value);
                }
            }
            let (next, step) = record(&cur, &mv, remaining - 1)?;
            if let Move::RowCommute { row } = mv {
                if step.record.class != Some(CommuteClass::NonInterleaving) {
                    return Err(violation(format!("row commutation {row} is {:?}", step.record.class)));
                }
            }
            pending.push(step);
            cur = next;
        }
        match phase {
            Phase::Reduce(_) => {
                if cur.n() >= d.n() {
                    return Err(violation("reduction round did not lower the grid number"));
                }
                let (_, value) = self.eval_into(node, EdgeKind::Moves, pending, &cur)?;
                Ok(value)
            }
            Phase::Sort(_) => {
                let index = trivial::index_set_of(&cur)?;
                if trivial::build_trivial_diagram(&index)? != cur {
                    return Err(violation(format!(
                        "sorting ended away from the trivial diagram of {index}"
                    )));
                }
                let value = trivial::trivial_value(&index, self.norm)?;
                let leaf = if pending.is_empty() {
                    node
                } else {
                    let l = self.node(&cur);
                    self.edge(node, l, EdgeKind::Moves, pending);
                    l
                };
                self.tree.nodes[leaf].role = NodeRole::Leaf;
                self.set_value(leaf, &value);
                self.tree.leaves.push(LeafRecord {
                    node: leaf,
                    index,
                    value: value.to_string(),
                });
                Ok(value)
            }
        }
    }

    fn branch(
        &mut self,
        at: usize,
        cur: &GridDiagram,
        crossing: SkeinCrossing,
        phase: &Phase,
        i: usize,
        remaining: usize,
    ) -> Result<LaurentPoly, EngineError> {
        let p = cur.p();
        let measure = complexity(cur, remaining);
        let (changed, step) = record(cur, &phase.moves()[i], remaining - 1)?;
        let changed_measure = step.complexity;
        if changed_measure >= measure {
            return Err(violation(format!(
                "crossing change does not decrease {measure:?} (got {changed_measure:?})"
            )));
        }
        let c_node = self.node(&changed);
        self.edge(at, c_node, EdgeKind::Change, vec![step]);
        let changed_value = self.walk(c_node, &changed, phase, i + 1)?;
        self.set_value(c_node, &changed_value);

        let resolved = moves::resolve(cur, &crossing)?;
        let resolved_scr = scr(&resolved);
        if resolved.n() != cur.n() || resolved_scr + p as usize > measure.scr {
            return Err(violation(format!(
                "resolution scr {resolved_scr} exceeds {} - {p}",
                measure.scr
            )));
        }
        let column = crossing.left_column;
        let rec = MoveRecord {
            mv: Move::Resolve { column },
            class: Some(CommuteClass::Interleaving),
            sign: Some(crossing.sign),
            key_after: resolved.canonical_key().to_hex(),
        };
        let res_step = TraceStep {
            record: rec,
            complexity: complexity(&resolved, 0),
        };
        let (r_node, resolved_value) = self.eval_into(at, EdgeKind::Resolve, vec![res_step], &resolved)?;
        let resolved_measure = Complexity {
            gn: resolved.n(),
            scr: resolved_scr,
            plan_remaining: plan_len(&resolved)?,
        };
        let (c1, c2) = skein_coefficients(crossing.sign, p);
        let value = c1 * changed_value + c2 * resolved_value;
        self.tree.branches.push(BranchRecord {
            node: at,
            crossing,
            changed: c_node,
            resolved: r_node,
            measure,
            changed_measure,
            resolved_measure,
        });
        Ok(value)
    }
}

fn plan_len(d: &GridDiagram) -> Result<usize, EngineError> {
    Ok(match reduce_grid_number_step(d)? {
        Some(plan) => plan.moves.len(),
        None => trivial::sorted_trivial_form(d)?.moves.len(),
    })
}

const STACK_BYTES: usize = 512 << 20;

/// Evaluates the invariant by skein recursion down to trivial links.
pub fn evaluate(d: &GridDiagram, config: &EvalConfig) -> Result<Evaluation, EngineError> {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(s, || {
                let mut ev = Evaluator {
                    norm: config.normalization.as_ref(),
                    memo: HashMap::new(),
                    active: HashSet::new(),
                    tree: SkeinTree::default(),
                };
                let (root, value) = ev.eval(d)?;
                ev.tree.root = root;
                Ok(Evaluation { value, tree: ev.tree })
            })
            .expect("spawn evaluator thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

impl SkeinTree {
    fn outgoing(&self, node: usize) -> impl Iterator<Item = &TreeEdge> {
        self.edges.iter().filter(move |e| e.from == node)
    }

    pub fn principal_path(&self) -> ReductionTrace {
        let mut steps = Vec::new();
        let mut u_bound = 0;
        let mut node = self.root;
        while let Some(e) = self.outgoing(node).find(|e| e.kind != EdgeKind::Resolve) {
            if e.kind == EdgeKind::Change {
                u_bound += 1;
            }
            steps.extend(e.steps.iter().cloned());
            node = e.to;
        }
        ReductionTrace { steps, u_bound }
    }

    pub fn value(&self) -> Result<LaurentPoly, String> {
        LaurentPoly::parse(&self.nodes[self.root].value).map_err(|e| e.to_string())
    }

    /// Replays every edge and rechecks every skein relation and leaf value.
    pub fn verify(&self, norm: Option<&Normalization>) -> Result<(), String> {
        let value = |id: usize| LaurentPoly::parse(&self.nodes[id].value).map_err(|e| format!("node {id}: {e}"));
        for e in &self.edges {
            let from = &self.nodes[e.from];
            let mut cur = from.diagram.clone();
            for s in &e.steps {
                cur = match s.record.mv {
                    Move::Resolve { column } => {
                        let c = moves::crossing_at(&cur, column)
                            .map_err(|x| x.to_string())?
                            .ok_or("no crossing to resolve")?;
                        moves::resolve(&cur, &c).map_err(|x| x.to_string())?
                    }
                    mv => moves::apply(&cur, &mv).map_err(|x| x.to_string())?,
                };
                if cur.canonical_key().to_hex() != s.record.key_after {
                    return Err(format!("edge {}->{}: key mismatch after {}", e.from, e.to, s.record.mv));
                }
            }
            if cur != self.nodes[e.to].diagram {
                return Err(format!("edge {}->{} does not reach its target", e.from, e.to));
            }
            if e.kind == EdgeKind::Moves && value(e.from)? != value(e.to)? {
                return Err(format!("isotopy edge {}->{} changes the value", e.from, e.to));
            }
        }
        for b in &self.branches {
            let p = self.nodes[b.node].diagram.p();
            let (c1, c2) = skein_coefficients(b.crossing.sign, p);
            if value(b.node)? != c1 * value(b.changed)? + c2 * value(b.resolved)? {
                return Err(format!("skein relation fails at node {}", b.node));
            }
            if b.changed_measure >= b.measure || b.resolved_measure >= b.measure {
                return Err(format!("termination measure does not decrease at node {}", b.node));
            }
        }
        for l in &self.leaves {
            let d = &self.nodes[l.node].diagram;
            let built = trivial::build_trivial_diagram(&l.index).map_err(|e| e.to_string())?;
            if built.canonical_key() != d.canonical_key() {
                return Err(format!("leaf {} is not the trivial diagram of {}", l.node, l.index));
            }
            let v = trivial::trivial_value(&l.index, norm).map_err(|e| e.to_string())?;
            if v != value(l.node)? {
                return Err(format!("leaf {} has the wrong value", l.node));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph skein {\n  node [shape=box, fontname=monospace];\n");
        for n in &self.nodes {
            let shape = if n.role == NodeRole::Leaf {
                ", style=rounded"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  n{} [label=\"#{} n={}\\n{}\"{shape}];",
                n.id,
                n.id,
                n.diagram.n(),
                n.value
            );
        }
        for e in &self.edges {
            let label = match e.kind {
                EdgeKind::Moves => format!("{} moves", e.steps.len()),
                EdgeKind::Change => "change".to_string(),
                EdgeKind::Resolve => "resolve".to_string(),
            };
            let style = if e.kind == EdgeKind::Resolve {
                ", style=dashed"
            } else {
                ""
            };
            let _ = writeln!(out, "  n{} -> n{} [label=\"{label}\"{style}];", e.from, e.to);
        }
        out.push_str("}\n");
        out
    }
}
