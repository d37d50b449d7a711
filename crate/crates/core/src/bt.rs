//! Behaviour trees from a solved schedule and its temporal network, plus a
//! small tick simulator used to check execution order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::model::Level;
use crate::schedule::{check_stn, Schedule, ScheduleModel, Stn, StnNode, StnVerdict};
use crate::term::Compact;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionLeaf {
    pub id: String,
    pub name: String,
    /// `(parameter, value)` pairs in head order.
    pub params: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BtNode {
    Sequence(Vec<BtNode>),
    Parallel(Vec<BtNode>),
    Action(ActionLeaf),
    /// Succeeds once every listed action has completed.
    WaitFor(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BtError {
    #[error("temporal network is inconsistent")]
    InconsistentInput,
    #[error("temporal network does not match the schedule model")]
    Mismatch,
}

impl BtNode {
    /// Action leaves in document order.
    pub fn leaves(&self) -> Vec<&ActionLeaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ActionLeaf>) {
        match self {
            BtNode::Sequence(c) | BtNode::Parallel(c) => c.iter().for_each(|n| n.collect_leaves(out)),
            BtNode::Action(a) => out.push(a),
            BtNode::WaitFor(_) => {}
        }
    }

    /// Indented text outline, one node per line.
    pub fn outline(&self) -> String {
        let mut out = String::new();
        self.write_outline(0, &mut out);
        out
    }

    fn write_outline(&self, depth: usize, out: &mut String) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        match self {
            BtNode::Sequence(c) | BtNode::Parallel(c) => {
                out.push_str(if matches!(self, BtNode::Sequence(_)) { "Sequence\n" } else { "Parallel\n" });
                for n in c {
                    n.write_outline(depth + 1, out);
                }
            }
            BtNode::Action(a) => {
                let params: Vec<String> = a.params.iter().map(|(k, v)| alloc::format!("{k}={v}")).collect();
                let _ = writeln!(out, "{} {}({})", a.id, a.name, params.join(", "));
            }
            BtNode::WaitFor(ids) => {
                let _ = writeln!(out, "WaitFor {}", ids.join(","));
            }
        }
    }
}

/// Leaf id of model action `i`.
pub fn leaf_id(i: usize) -> String {
    alloc::format!("a{i}")
}

/// Converts a consistent network into a tree over the low-level actions.
///
/// Action `a` precedes `b` when the network has a path from the end of `a`
/// to the start of `b`. On the transitive reduction of that order, each
/// action is placed after its last parent (in topological order); other
/// parents are awaited by a `WaitFor` in front of it. Several children of
/// one action, or several roots, run under a `Parallel`.
pub fn stn_to_bt(stn: &Stn, schedule: &Schedule, model: &ScheduleModel) -> Result<BtNode, BtError> {
    if stn.nodes.len() != model.events.len() + 2 {
        return Err(BtError::Mismatch);
    }
    if check_stn(stn) != StnVerdict::Consistent {
        return Err(BtError::InconsistentInput);
    }
    let leaves: Vec<usize> = (0..model.actions.len()).filter(|&i| model.actions[i].level == Level::Low).collect();
    if leaves.is_empty() {
        return Ok(BtNode::Sequence(Vec::new()));
    }

    let n = stn.nodes.len();
    let mut succ = alloc::vec![Vec::new(); n];
    for e in &stn.edges {
        if matches!(stn.nodes[e.from], StnNode::Event(_)) && matches!(stn.nodes[e.to], StnNode::Event(_)) {
            succ[e.from].push(e.to);
        }
    }
    let reach_from = |u: usize| {
        let mut seen = alloc::vec![false; n];
        let mut stack = alloc::vec![u];
        while let Some(x) = stack.pop() {
            for &y in &succ[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };
    let node = Stn::node_of_event;
    let k = leaves.len();
    // before[x][y]: leaf x precedes leaf y.
    let before: Vec<Vec<bool>> = leaves
        .iter()
        .map(|&a| {
            let r = reach_from(node(model.actions[a].end));
            leaves.iter().map(|&b| b != a && r[node(model.actions[b].start)]).collect()
        })
        .collect();
    let mut parents: Vec<Vec<usize>> = alloc::vec![Vec::new(); k];
    for y in 0..k {
        for x in 0..k {
            if before[x][y] && !(0..k).any(|z| before[x][z] && before[z][y]) {
                parents[y].push(x);
            }
        }
    }

    // Topological order, earliest start first.
    let start_of = |x: usize| schedule.start(model, leaves[x]);
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<(i64, usize)> = (0..k).filter(|&x| indeg[x] == 0).map(|x| (start_of(x), x)).collect();
    let mut rank = alloc::vec![0usize; k];
    let mut topo = Vec::with_capacity(k);
    while let Some(first) = ready.pop_first() {
        let x = first.1;
        rank[x] = topo.len();
        topo.push(x);
        for y in 0..k {
            if parents[y].contains(&x) {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    ready.insert((start_of(y), y));
                }
            }
        }
    }
    if topo.len() != k {
        return Err(BtError::InconsistentInput);
    }

    let mut owned: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut roots = Vec::new();
    for &y in &topo {
        match parents[y].iter().copied().max_by_key(|&x| rank[x]) {
            Some(owner) => owned.entry(owner).or_default().push(y),
            None => roots.push(y),
        }
    }

    let leaf = |x: usize| {
        let a = leaves[x];
        let act = &model.actions[a];
        let head = model.assigned_head(schedule, a);
        let params = act
            .param_names
            .iter()
            .zip(head.args())
            .map(|(p, v)| (p.as_str().to_lowercase(), Compact(v).to_string()))
            .collect();
        ActionLeaf { id: leaf_id(a), name: act.name.as_str().to_string(), params }
    };

    fn build(
        x: usize,
        parents: &[Vec<usize>],
        owned: &BTreeMap<usize, Vec<usize>>,
        leaf: &dyn Fn(usize) -> ActionLeaf,
        ids: &[String],
        out: &mut Vec<BtNode>,
    ) {
        if parents[x].len() > 1 {
            out.push(BtNode::WaitFor(parents[x].iter().map(|&p| ids[p].clone()).collect()));
        }
        out.push(BtNode::Action(leaf(x)));
        match owned.get(&x).map(Vec::as_slice) {
            None | Some([]) => {}
            Some([only]) => build(*only, parents, owned, leaf, ids, out),
            Some(many) => out.push(BtNode::Parallel(
                many.iter()
                    .map(|&c| {
                        let mut seq = Vec::new();
                        build(c, parents, owned, leaf, ids, &mut seq);
                        BtNode::Sequence(seq)
                    })
                    .collect(),
            )),
        }
    }

    let ids: Vec<String> = leaves.iter().map(|&a| leaf_id(a)).collect();
    let mut branches: Vec<BtNode> = roots
        .iter()
        .map(|&r| {
            let mut seq = Vec::new();
            build(r, &parents, &owned, &leaf, &ids, &mut seq);
            BtNode::Sequence(seq)
        })
        .collect();
    Ok(if branches.len() == 1 { branches.remove(0) } else { BtNode::Parallel(branches) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TickEvent {
    Started,
    Finished,
}

/// One entry of a simulated execution trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub tick: usize,
    pub id: String,
    pub event: TickEvent,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Running,
    Success,
}

enum Rt<'a> {
    Seq { idx: usize, children: Vec<Rt<'a>> },
    Par { children: Vec<(Rt<'a>, bool)> },
    Act { leaf: &'a ActionLeaf, started: bool, done: bool },
    Wait(&'a [String]),
}

impl<'a> Rt<'a> {
    fn new(n: &'a BtNode) -> Self {
        match n {
            BtNode::Sequence(c) => Rt::Seq { idx: 0, children: c.iter().map(Rt::new).collect() },
            BtNode::Parallel(c) => Rt::Par { children: c.iter().map(|x| (Rt::new(x), false)).collect() },
            BtNode::Action(leaf) => Rt::Act { leaf, started: false, done: false },
            BtNode::WaitFor(ids) => Rt::Wait(ids),
        }
    }

    fn tick(&mut self, t: usize, completed: &mut BTreeSet<String>, trace: &mut Vec<TraceEntry>) -> Status {
        match self {
            Rt::Seq { idx, children } => {
                while *idx < children.len() {
                    if children[*idx].tick(t, completed, trace) == Status::Running {
                        return Status::Running;
                    }
                    *idx += 1;
                }
                Status::Success
            }
            Rt::Par { children } => {
                for (c, ok) in children.iter_mut() {
                    if !*ok {
                        *ok = c.tick(t, completed, trace) == Status::Success;
                    }
                }
                if children.iter().all(|(_, ok)| *ok) {
                    Status::Success
                } else {
                    Status::Running
                }
            }
            Rt::Act { leaf, started, done } => {
                if *done {
                    return Status::Success;
                }
                let id = leaf.id.clone();
                if !*started {
                    *started = true;
                    trace.push(TraceEntry { tick: t, id, event: TickEvent::Started });
                    return Status::Running;
                }
                *done = true;
                completed.insert(id.clone());
                trace.push(TraceEntry { tick: t, id, event: TickEvent::Finished });
                Status::Success
            }
            Rt::Wait(ids) => {
                if ids.iter().all(|i| completed.contains(i)) {
                    Status::Success
                } else {
                    Status::Running
                }
            }
        }
    }
}

/// Ticks the tree from the root until it succeeds. Each action runs for
/// one tick: it starts on its first tick and succeeds on the next. Returns
/// `None` if the tree makes no progress for a full tick (a deadlock).
pub fn simulate(root: &BtNode) -> Option<Vec<TraceEntry>> {
    let mut rt = Rt::new(root);
    let mut completed = BTreeSet::new();
    let mut trace = Vec::new();
    for t in 0.. {
        let before = trace.len();
        if rt.tick(t, &mut completed, &mut trace) == Status::Success {
            return Some(trace);
        }
        if trace.len() == before {
            return None;
        }
    }
    unreachable!()
}
