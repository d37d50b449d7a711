//! JSON views of schedules and temporal networks.

use mapplan_core::bt::leaf_id;
use mapplan_core::schedule::{Schedule, ScheduleModel, Stn, StnEdge, StnNode};
use mapplan_core::term::Compact;
use mapplan_core::{Level, Term};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub makespan: i64,
    pub optimal: bool,
    pub actions: Vec<ScheduledAction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledAction {
    pub id: String,
    /// Durative action with the assigned resources substituted.
    pub action: String,
    pub level: String,
    pub start: i64,
    pub duration: i64,
    pub min_duration: u64,
    pub max_duration: Option<u64>,
    /// Assigned resource instances, e.g. `agent(a1)`.
    pub resources: Vec<String>,
    pub parent: Option<String>,
}

impl ScheduleReport {
    pub fn new(m: &ScheduleModel, s: &Schedule) -> Self {
        let actions = m
            .actions
            .iter()
            .enumerate()
            .map(|(i, a)| ScheduledAction {
                id: leaf_id(i),
                action: Term::compound(a.name.clone(), m.assigned_head(s, i).args().to_vec()).to_string(),
                level: match a.level {
                    Level::High => "high".into(),
                    Level::Low => "low".into(),
                },
                start: s.start(m, i),
                duration: s.duration(m, i),
                min_duration: a.bounds.min,
                max_duration: a.bounds.max,
                resources: a
                    .slots
                    .iter()
                    .map(|sl| {
                        let g = &m.groups[sl.group];
                        let inst = &m.resources[g.resource_type].instances[s.assignment[sl.group]];
                        Compact(inst).to_string()
                    })
                    .collect(),
                parent: a.parent.map(leaf_id),
            })
            .collect();
        ScheduleReport { makespan: s.makespan, optimal: s.optimal, actions }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StnReport {
    pub nodes: Vec<NodeReport>,
    pub edges: Vec<EdgeReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeReport {
    pub id: usize,
    pub kind: String,
    pub event: Option<usize>,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    /// `null` is unbounded.
    pub upper: Option<i64>,
}

#[derive(Debug, thiserror::Error)]
#[error("unknown node kind `{0}`")]
pub struct UnknownKind(String);

impl StnReport {
    pub fn new(stn: &Stn) -> Self {
        let nodes = stn
            .nodes
            .iter()
            .zip(&stn.labels)
            .enumerate()
            .map(|(id, (n, label))| {
                let (kind, event) = match n {
                    StnNode::Source => ("source", None),
                    StnNode::Sink => ("sink", None),
                    StnNode::Event(e) => ("event", Some(*e)),
                };
                NodeReport { id, kind: kind.into(), event, label: label.clone() }
            })
            .collect();
        let edges = stn
            .edges
            .iter()
            .map(|e| EdgeReport { from: e.from, to: e.to, lower: e.lower, upper: e.upper })
            .collect();
        StnReport { nodes, edges }
    }

    pub fn to_stn(&self) -> Result<Stn, UnknownKind> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match (n.kind.as_str(), n.event) {
                ("source", _) => Ok(StnNode::Source),
                ("sink", _) => Ok(StnNode::Sink),
                ("event", Some(e)) => Ok(StnNode::Event(e)),
                (k, _) => Err(UnknownKind(k.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(Stn {
            nodes,
            labels: self.nodes.iter().map(|n| n.label.clone()).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| StnEdge { from: e.from, to: e.to, lower: e.lower, upper: e.upper })
                .collect(),
        })
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}
