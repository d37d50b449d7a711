//! Independent validation of a solved schedule against the domain.
//!
//! Events are replayed in time order (ties broken by the ordering edges and
//! then by plan index) with every resource parameter replaced by its
//! assigned instance. Clobbering is judged against the partial order rather
//! than the replayed sequence, so a pass holds for every dispatch order the
//! ordering edges allow.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use super::{reassign, Schedule, ScheduleModel};
use crate::enablers::instance_value;
use crate::model::{Problem, TOPlan};
use crate::planner::{applicable, failing_literal, goal_holds, ground_effects};
use crate::term::{Literal, Term};
use crate::unify::{match_term, substitute, Bindings};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A precondition of an event does not hold when it is dispatched.
    Precondition { event: usize, head: Term, literal: Literal },
    /// `by` may run between the achievers of a condition of `event` and
    /// `event` itself, and undoes it.
    Clobber { event: usize, by: usize, fluent: Term },
    /// Two actions hold the same instance at overlapping times.
    Capacity { a: usize, b: usize, instance: Term },
    /// An ordering edge runs backwards in time.
    Precedence { before: usize, after: usize },
    Duration { action: usize, duration: i64 },
    Makespan { claimed: i64, actual: i64 },
    Goal,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Precondition { event, head, literal } => {
                write!(f, "event {event} `{head}`: precondition `{literal}` does not hold")
            }
            Violation::Clobber { event, by, fluent } => {
                write!(f, "event {by} may clobber `{fluent}` needed by event {event}")
            }
            Violation::Capacity { a, b, instance } => {
                write!(f, "actions {a} and {b} overlap on `{instance}`")
            }
            Violation::Precedence { before, after } => {
                write!(f, "event {before} must not start after event {after}")
            }
            Violation::Duration { action, duration } => {
                write!(f, "action {action} has duration {duration} outside its bounds")
            }
            Violation::Makespan { claimed, actual } => {
                write!(f, "makespan {claimed} differs from last event time {actual}")
            }
            Violation::Goal => f.write_str("goal does not hold after the last event"),
        }
    }
}

/// Ground view of one replayed event.
#[derive(Default)]
struct Ground {
    pos: Vec<Term>,
    neg: Vec<Term>,
    adds: Vec<Term>,
    dels: Vec<Term>,
}

/// Every violated constraint, empty for a valid schedule.
pub fn check_schedule(plan: &TOPlan, p: &Problem, m: &ScheduleModel, s: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    let e = m.events.len();
    if s.event_times.len() != e || plan.len() != e {
        out.push(Violation::Makespan { claimed: s.makespan, actual: -1 });
        return out;
    }
    let t = &s.event_times;

    // Ordering edges: precedence, resource sequencing and start before end.
    let mut edges: BTreeSet<(usize, usize)> = m.precedence.iter().copied().collect();
    for &(a, b) in &s.resource_order {
        edges.insert((m.actions[a].end, m.actions[b].start));
    }
    for a in &m.actions {
        edges.insert((a.start, a.end));
    }
    edges.retain(|&(u, v)| u != v);
    for &(u, v) in &edges {
        if t[u] > t[v] {
            out.push(Violation::Precedence { before: u, after: v });
        }
    }

    for (i, a) in m.actions.iter().enumerate() {
        let d = t[a.end] - t[a.start];
        if d < 0 || !a.bounds.contains(d as u64) {
            out.push(Violation::Duration { action: i, duration: d });
        }
    }
    let actual = t.iter().copied().max().unwrap_or(0);
    if actual != s.makespan {
        out.push(Violation::Makespan { claimed: s.makespan, actual });
    }

    capacity(m, s, &mut out);

    let Some(order) = linearize(e, &edges, t) else {
        return out;
    };
    let Some(ground) = replay(plan, p, m, s, &order, &mut out) else {
        return out;
    };
    clobbering(&ground, &edges, &mut out);
    out
}

fn capacity(m: &ScheduleModel, s: &Schedule, out: &mut Vec<Violation>) {
    let mut users: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, a) in m.actions.iter().enumerate() {
        if !a.occupies {
            continue;
        }
        let held: BTreeSet<(usize, usize)> = a
            .slots
            .iter()
            .map(|sl| (m.groups[sl.group].resource_type, s.assignment[sl.group]))
            .collect();
        for r in held {
            users.entry(r).or_default().push(i);
        }
    }
    for ((ty, inst), list) in &users {
        for (x, &a) in list.iter().enumerate() {
            for &b in list[x + 1..].iter().filter(|&&b| !m.nested(a, b)) {
                if s.start(m, a) < s.end(m, b) && s.start(m, b) < s.end(m, a) {
                    let instance = instance_value(&m.resources[*ty].instances[*inst]).clone();
                    out.push(Violation::Capacity { a, b, instance });
                }
            }
        }
    }
}

/// Kahn's algorithm keyed by `(time, index)`. `None` on a cycle.
fn linearize(e: usize, edges: &BTreeSet<(usize, usize)>, t: &[i64]) -> Option<Vec<usize>> {
    let mut indeg = alloc::vec![0usize; e];
    let mut succ = alloc::vec![Vec::new(); e];
    for &(u, v) in edges {
        indeg[v] += 1;
        succ[u].push(v);
    }
    let mut heap: BinaryHeap<Reverse<(i64, usize)>> =
        (0..e).filter(|&k| indeg[k] == 0).map(|k| Reverse((t[k], k))).collect();
    let mut order = Vec::with_capacity(e);
    while let Some(Reverse((_, k))) = heap.pop() {
        order.push(k);
        for &v in &succ[k] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse((t[v], v)));
            }
        }
    }
    (order.len() == e).then_some(order)
}

fn replay(
    plan: &TOPlan,
    p: &Problem,
    m: &ScheduleModel,
    s: &Schedule,
    order: &[usize],
    out: &mut Vec<Violation>,
) -> Option<Vec<Ground>> {
    let owner = m.event_owner();
    let is_resource = |v: &Term| m.resources.iter().any(|r| r.instances.iter().any(|x| instance_value(x) == v));
    let mut state = p.init.clone();
    let mut ground: Vec<Ground> = (0..order.len()).map(|_| Ground::default()).collect();
    for &k in order {
        let step = &plan.steps[k];
        let def = &p.actions(step.level)[step.action];
        let head = reassign(&step.head, &m.assigned_values(s, owner[k]));
        let fail = |literal| Violation::Precondition { event: k, head: head.clone(), literal };
        let Some(b0) = match_term(&def.head, &head, &Bindings::new()) else {
            out.push(fail(Literal::pos(head.clone())));
            return None;
        };
        // Keep the planned choice for variables outside the head where possible.
        let mut hinted = b0.clone();
        for (v, val) in step.bindings.iter() {
            if !hinted.is_bound(v) && !is_resource(val) {
                hinted.bind(v.clone(), val.clone());
            }
        }
        let b = applicable(def, &state, &p.general_kb, hinted)
            .next()
            .or_else(|| applicable(def, &state, &p.general_kb, b0.clone()).next());
        let Some(b) = b else {
            out.push(fail(failing_literal(def, &state, &p.general_kb, b0)));
            return None;
        };
        let Ok((adds, dels)) = ground_effects(def, &b) else {
            out.push(fail(Literal::pos(head.clone())));
            return None;
        };
        for d in &dels {
            state.remove(d);
        }
        for a in &adds {
            state.insert(a.clone());
        }
        ground[k] = Ground {
            pos: def.pos_pre.iter().map(|x| substitute(x, &b)).collect(),
            neg: def.neg_pre.iter().map(|x| substitute(x, &b)).collect(),
            adds,
            dels,
        };
    }
    if !goal_holds(&p.goal, &state) {
        out.push(Violation::Goal);
    }
    Some(ground)
}

fn clobbering(g: &[Ground], edges: &BTreeSet<(usize, usize)>, out: &mut Vec<Violation>) {
    let e = g.len();
    let mut succ = alloc::vec![Vec::new(); e];
    for &(u, v) in edges {
        succ[u].push(v);
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
    let matches = |pat: &Term, f: &Term| match_term(pat, f, &Bindings::new()).is_some();

    for i in 0..e {
        // A deleter of a needed fluent must follow `i`, or precede a
        // re-achiever that precedes `i`.
        for f in &g[i].pos {
            for k in (0..e).filter(|&k| k != i && g[k].dels.contains(f)) {
                let restored = (0..e).any(|a| a != k && g[a].adds.contains(f) && reach[k][a] && reach[a][i]);
                if !reach[i][k] && !restored {
                    out.push(Violation::Clobber { event: i, by: k, fluent: f.clone() });
                }
            }
        }
        // Dually, an adder of a forbidden fluent must follow `i`, or precede
        // a deleter of what it added that precedes `i`.
        for n in &g[i].neg {
            for k in (0..e).filter(|&k| k != i) {
                for f in g[k].adds.iter().filter(|f| matches(n, f)) {
                    let removed = (0..e).any(|d| d != k && g[d].dels.contains(f) && reach[k][d] && reach[d][i]);
                    if !reach[i][k] && !removed {
                        out.push(Violation::Clobber { event: i, by: k, fluent: f.clone() });
                    }
                }
            }
        }
    }
}
