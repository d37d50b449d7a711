//! Simple temporal network derived from a schedule.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Schedule, ScheduleModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StnNode {
    Source,
    Sink,
    /// A snap event, by event index.
    Event(usize),
}

/// `lower <= t(to) - t(from) <= upper`; `upper: None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StnEdge {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub upper: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stn {
    pub nodes: Vec<StnNode>,
    pub labels: Vec<String>,
    pub edges: Vec<StnEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StnVerdict {
    Consistent,
    /// Nodes of a negative cycle of the distance graph, in cycle order.
    NegativeCycle(Vec<usize>),
}

impl Stn {
    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// STN node of an event.
    pub fn node_of_event(event: usize) -> usize {
        event + 1
    }

    /// Distance-graph arcs `(u, v, w)` meaning `t(v) - t(u) <= w`.
    pub fn distance_edges(&self) -> Vec<(usize, usize, i64)> {
        let mut out = Vec::new();
        for e in &self.edges {
            if let Some(up) = e.upper {
                out.push((e.from, e.to, up));
            }
            out.push((e.to, e.from, -e.lower));
        }
        out
    }

    /// Longest source-to-sink path over lower bounds, i.e. the earliest
    /// completion time. `None` if the lower-bound graph has a cycle.
    pub fn longest_path(&self) -> Option<i64> {
        let n = self.nodes.len();
        let edges: Vec<(usize, usize, i64)> = self.edges.iter().map(|e| (e.from, e.to, e.lower)).collect();
        let t = super::solve::earliest_times(n, &edges)?;
        Some(t[self.sink()])
    }

    /// Adds an edge; used to inject extra constraints.
    pub fn add_edge(&mut self, from: usize, to: usize, lower: i64, upper: Option<i64>) {
        self.edges.push(StnEdge { from, to, lower, upper });
    }
}

/// Builds the network: one node per snap event plus source and sink;
/// `[d_min, d_max]` between the snaps of each action; `[0, inf)` for
/// enabler and resource-sequencing constraints, transitively reduced.
pub fn to_stn(s: &Schedule, m: &ScheduleModel) -> Stn {
    let e = m.events.len();
    let n = e + 2;
    let mut nodes = alloc::vec![StnNode::Source];
    let mut labels = alloc::vec![String::from("start")];
    for (i, ev) in m.events.iter().enumerate() {
        nodes.push(StnNode::Event(i));
        labels.push(alloc::format!("{}", ev.head));
    }
    nodes.push(StnNode::Sink);
    labels.push(String::from("end"));
    let sink = n - 1;

    if e == 0 {
        return Stn { nodes, labels, edges: alloc::vec![StnEdge { from: 0, to: sink, lower: 0, upper: Some(0) }] };
    }

    let node = Stn::node_of_event;
    let mut edges = Vec::new();
    let mut duration_pairs = BTreeSet::new();
    for a in &m.actions {
        if a.start != a.end {
            edges.push(StnEdge {
                from: node(a.start),
                to: node(a.end),
                lower: a.bounds.min as i64,
                upper: a.bounds.max.map(|x| x as i64),
            });
            duration_pairs.insert((a.start, a.end));
        }
    }

    let mut order: BTreeSet<(usize, usize)> = m.precedence.iter().copied().filter(|&(u, v)| u != v).collect();
    for &(a, b) in &s.resource_order {
        order.insert((m.actions[a].end, m.actions[b].start));
    }
    order.retain(|p| !duration_pairs.contains(p));

    // Adjacency over all ordering arcs (duration arcs included).
    let mut succ: Vec<Vec<usize>> = alloc::vec![Vec::new(); e];
    for &(u, v) in order.iter().chain(duration_pairs.iter()) {
        if !succ[u].contains(&v) {
            succ[u].push(v);
        }
    }
    let reach: Vec<Vec<bool>> = (0..e)
        .map(|u| {
            let mut seen = alloc::vec![false; e];
            let mut stack = succ[u].clone();
            while let Some(x) = stack.pop() {
                if !seen[x] {
                    seen[x] = true;
                    stack.extend(succ[x].iter().copied());
                }
            }
            seen
        })
        .collect();

    for &(u, v) in &order {
        let implied = succ[u].iter().any(|&w| w != v && reach[w][v]);
        if !implied {
            edges.push(StnEdge { from: node(u), to: node(v), lower: 0, upper: None });
        }
    }

    let mut has_in = alloc::vec![false; n];
    let mut has_out = alloc::vec![false; n];
    for edge in &edges {
        has_out[edge.from] = true;
        has_in[edge.to] = true;
    }
    for ev in 0..e {
        if !has_in[node(ev)] {
            edges.push(StnEdge { from: 0, to: node(ev), lower: 0, upper: None });
        }
    }
    for ev in 0..e {
        if !has_out[node(ev)] {
            edges.push(StnEdge { from: node(ev), to: sink, lower: 0, upper: None });
        }
    }
    Stn { nodes, labels, edges }
}

/// Negative-cycle detection on the distance graph (Bellman-Ford from a
/// virtual root connected to every node).
pub fn check_stn(stn: &Stn) -> StnVerdict {
    let n = stn.nodes.len();
    let arcs = stn.distance_edges();
    let mut dist = alloc::vec![0i64; n];
    let mut pred = alloc::vec![usize::MAX; n];
    let mut last = None;
    for _ in 0..n {
        last = None;
        for &(u, v, w) in &arcs {
            let cand = dist[u].saturating_add(w);
            if cand < dist[v] {
                dist[v] = cand;
                pred[v] = u;
                last = Some(v);
            }
        }
        if last.is_none() {
            return StnVerdict::Consistent;
        }
    }
    let Some(mut v) = last else { return StnVerdict::Consistent };
    for _ in 0..n {
        v = pred[v];
    }
    let mut cycle = alloc::vec![v];
    let mut x = pred[v];
    while x != v {
        cycle.push(x);
        x = pred[x];
    }
    cycle.reverse();
    StnVerdict::NegativeCycle(cycle)
}
