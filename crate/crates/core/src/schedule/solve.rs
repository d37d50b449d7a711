//! Exact makespan minimisation: branch and bound over slot assignments and,
//! per assignment, over the orientation of resource conflicts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{Schedule, ScheduleError, ScheduleModel};

#[derive(Clone, Copy, Default)]
pub struct SolveOptions<'a> {
    /// Maximum number of search nodes; `None` is unbounded.
    pub max_nodes: Option<u64>,
    /// Polled once per node; returning true stops the search.
    pub stop: Option<&'a dyn Fn() -> bool>,
}

/// `t(v) >= t(u) + w`
type Edge = (usize, usize, i64);

/// Least event times satisfying the edges with all times `>= 0`, or `None`
/// if the constraints contain a positive cycle.
pub(crate) fn earliest_times(n: usize, edges: &[Edge]) -> Option<Vec<i64>> {
    let mut t = alloc::vec![0i64; n];
    for _ in 0..=n {
        let mut changed = false;
        for &(u, v, w) in edges {
            let cand = t[u].saturating_add(w);
            if cand > t[v] {
                t[v] = cand;
                changed = true;
            }
        }
        if !changed {
            return Some(t);
        }
    }
    None
}

pub(crate) fn base_edges(m: &ScheduleModel) -> Vec<Edge> {
    let mut edges: Vec<Edge> = m.precedence.iter().map(|&(u, v)| (u, v, 0)).collect();
    for a in &m.actions {
        if a.start == a.end {
            continue;
        }
        edges.push((a.start, a.end, a.bounds.min as i64));
        if let Some(max) = a.bounds.max {
            edges.push((a.end, a.start, -(max as i64)));
        }
    }
    edges
}

struct Best {
    makespan: i64,
    assignment: Vec<usize>,
    times: Vec<i64>,
}

struct Search<'m, 'o> {
    m: &'m ScheduleModel,
    opts: &'o SolveOptions<'o>,
    base: Vec<Edge>,
    critical_path: i64,
    has_children: Vec<bool>,
    best: Option<Best>,
    nodes: u64,
    stopped: bool,
}

impl Search<'_, '_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.opts.max_nodes.is_some_and(|max| self.nodes > max) || self.opts.stop.is_some_and(|f| f()) {
            self.stopped = true;
        }
        !self.stopped
    }

    fn bound(&self) -> i64 {
        self.best.as_ref().map_or(i64::MAX, |b| b.makespan)
    }

    fn holdings(&self, assignment: &[Option<usize>]) -> Vec<BTreeSet<(usize, usize)>> {
        search_holdings(self.m, assignment)
    }

    fn lower_bound(&self, assignment: &[Option<usize>]) -> i64 {
        let mut load: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for (i, held) in self.holdings(assignment).iter().enumerate() {
            // Parents overlap their children, so only innermost actions add up.
            if self.m.actions[i].is_instant() || self.has_children[i] {
                continue;
            }
            let d = self.m.actions[i].bounds.min as i64;
            for r in held {
                *load.entry(*r).or_default() += d;
            }
        }
        load.values().copied().max().unwrap_or(0).max(self.critical_path)
    }

    fn assign(&mut self, k: usize, assignment: &mut Vec<Option<usize>>) {
        if self.stopped || !self.tick() {
            return;
        }
        if k == self.m.groups.len() {
            let held = self.holdings(assignment);
            let mut pairs = Vec::new();
            for a in 0..held.len() {
                for b in a + 1..held.len() {
                    if !held[a].is_disjoint(&held[b]) && !self.m.nested(a, b) {
                        pairs.push((a, b));
                    }
                }
            }
            let mut extra = Vec::new();
            self.sequence(assignment, &pairs, &mut extra);
            return;
        }
        for ci in 0..self.m.groups[k].candidates.len() {
            assignment[k] = Some(self.m.groups[k].candidates[ci]);
            if self.lower_bound(assignment) < self.bound() {
                self.assign(k + 1, assignment);
            }
            if self.stopped {
                break;
            }
        }
        assignment[k] = None;
    }

    fn sequence(&mut self, assignment: &[Option<usize>], pairs: &[(usize, usize)], extra: &mut Vec<Edge>) {
        if self.stopped || !self.tick() {
            return;
        }
        let mut edges = self.base.clone();
        edges.extend_from_slice(extra);
        let Some(times) = earliest_times(self.m.events.len(), &edges) else { return };
        let makespan = times.iter().copied().max().unwrap_or(0);
        if makespan >= self.bound() {
            return;
        }
        let acts = &self.m.actions;
        let conflict = pairs.iter().copied().find(|&(a, b)| {
            let (sa, ea) = (times[acts[a].start], times[acts[a].end]);
            let (sb, eb) = (times[acts[b].start], times[acts[b].end]);
            sa < eb && sb < ea
        });
        match conflict {
            None => {
                self.best = Some(Best {
                    makespan,
                    assignment: assignment.iter().map(|c| c.expect("complete assignment")).collect(),
                    times,
                });
            }
            Some((a, b)) => {
                for (x, y) in [(a, b), (b, a)] {
                    extra.push((acts[x].end, acts[y].start, 0));
                    self.sequence(assignment, pairs, extra);
                    extra.pop();
                    if self.stopped {
                        return;
                    }
                }
            }
        }
    }
}

/// Optimal schedule with an unbounded search budget.
pub fn solve(m: &ScheduleModel) -> Result<Schedule, ScheduleError> {
    solve_with(m, &SolveOptions::default())
}

/// Branch and bound. Groups are assigned in index order with candidates in
/// instance declaration order; resource conflicts in the earliest-start
/// schedule are resolved by branching on the first overlapping pair, trying
/// plan order first. Only strictly better incumbents replace the current
/// one, so the result is deterministic. If the budget runs out after a
/// feasible schedule was found, that schedule is returned with
/// `optimal == false`.
pub fn solve_with(m: &ScheduleModel, opts: &SolveOptions<'_>) -> Result<Schedule, ScheduleError> {
    m.validate()?;
    let base = base_edges(m);
    let Some(cp_times) = earliest_times(m.events.len(), &base) else {
        return Err(ScheduleError::Infeasible);
    };
    let critical_path = cp_times.iter().copied().max().unwrap_or(0);
    let mut has_children = alloc::vec![false; m.actions.len()];
    for a in &m.actions {
        if let Some(p) = a.parent {
            has_children[p] = true;
        }
    }
    let mut search = Search {
        m,
        opts,
        base,
        critical_path,
        has_children,
        best: None,
        nodes: 0,
        stopped: false,
    };
    let mut assignment = alloc::vec![None; m.groups.len()];
    search.assign(0, &mut assignment);

    let optimal = !search.stopped;
    let nodes = search.nodes;
    let Some(best) = search.best else {
        return Err(if optimal { ScheduleError::Infeasible } else { ScheduleError::LimitExceeded });
    };

    let full: Vec<Option<usize>> = best.assignment.iter().map(|&c| Some(c)).collect();
    let held = search_holdings(m, &full);
    let mut users: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, h) in held.iter().enumerate() {
        for r in h {
            users.entry(*r).or_default().push(i);
        }
    }
    let mut order = BTreeSet::new();
    for list in users.values_mut() {
        list.sort_by_key(|&i| (best.times[m.actions[i].start], best.times[m.actions[i].end], i));
        for (x, &b) in list.iter().enumerate() {
            for &a in list[..x].iter().filter(|&&a| !m.nested(a, b)) {
                order.insert((a, b));
            }
        }
    }

    Ok(Schedule {
        assignment: best.assignment,
        event_times: best.times,
        makespan: best.makespan,
        resource_order: order.into_iter().collect(),
        optimal,
        nodes,
    })
}

/// Instances `(type, index)` held by each occupying action under a
/// possibly partial assignment.
fn search_holdings(m: &ScheduleModel, assignment: &[Option<usize>]) -> Vec<BTreeSet<(usize, usize)>> {
    m.actions
        .iter()
        .map(|a| {
            if !a.occupies {
                return BTreeSet::new();
            }
            a.slots
                .iter()
                .filter_map(|s| assignment[s.group].map(|c| (m.groups[s.group].resource_type, c)))
                .collect()
        })
        .collect()
}
