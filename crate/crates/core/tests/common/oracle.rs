//! Exhaustive makespan oracles, independent of the branch and bound solver.

use std::collections::{BTreeMap, BTreeSet};

use mapplan_core::schedule::ScheduleModel;

fn assignments(m: &ScheduleModel) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for g in &m.groups {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                g.candidates.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

/// Flat models only: every assignment, every dispatch order consistent with
/// the precedence DAG, each action started as early as its predecessors and
/// the previous user of its instance allow.
pub fn flat_oracle(m: &ScheduleModel) -> i64 {
    let n = m.actions.len();
    let owner: BTreeMap<usize, usize> =
        m.actions.iter().enumerate().flat_map(|(i, a)| [(a.start, i), (a.end, i)]).collect();
    let mut preds = vec![Vec::new(); n];
    for &(u, v) in &m.precedence {
        preds[owner[&v]].push(owner[&u]);
    }
    let dur: Vec<i64> = m.actions.iter().map(|a| a.bounds.min as i64).collect();
    let mut best = i64::MAX;
    for asg in assignments(m) {
        let inst: Vec<Option<usize>> = m.actions.iter().map(|a| a.slots.first().map(|s| asg[s.group])).collect();
        let mut end = vec![None; n];
        let mut free = BTreeMap::new();
        dispatch(&preds, &dur, &inst, &mut end, &mut free, 0, &mut best);
    }
    best
}

fn dispatch(
    preds: &[Vec<usize>],
    dur: &[i64],
    inst: &[Option<usize>],
    end: &mut Vec<Option<i64>>,
    free: &mut BTreeMap<usize, i64>,
    makespan: i64,
    best: &mut i64,
) {
    if makespan >= *best {
        return;
    }
    if end.iter().all(Option::is_some) {
        *best = makespan;
        return;
    }
    for i in 0..end.len() {
        if end[i].is_some() || preds[i].iter().any(|&p| end[p].is_none()) {
            continue;
        }
        let mut start = preds[i].iter().map(|&p| end[p].unwrap()).max().unwrap_or(0);
        if let Some(r) = inst[i] {
            start = start.max(free.get(&r).copied().unwrap_or(0));
        }
        let e = start + dur[i];
        end[i] = Some(e);
        let saved = inst[i].map(|r| (r, free.insert(r, e)));
        dispatch(preds, dur, inst, end, free, makespan.max(e), best);
        if let Some((r, old)) = saved {
            match old {
                Some(t) => free.insert(r, t),
                None => free.remove(&r),
            };
        }
        end[i] = None;
    }
}

/// General oracle for models with nested actions: every assignment, every
/// linear extension of the event order in which no two conflicting actions
/// interleave, times by longest paths over the induced constraints.
pub fn event_oracle(m: &ScheduleModel) -> i64 {
    let e = m.events.len();
    let owner: Vec<usize> = {
        let mut o = vec![0; e];
        for (i, a) in m.actions.iter().enumerate() {
            o[a.start] = i;
            o[a.end] = i;
        }
        o
    };
    let ancestor = |mut x: usize, y: usize| {
        while let Some(p) = m.actions[x].parent {
            if p == y {
                return true;
            }
            x = p;
        }
        false
    };
    let mut preds = vec![BTreeSet::new(); e];
    for &(u, v) in &m.precedence {
        preds[v].insert(u);
    }
    for a in &m.actions {
        if a.start != a.end {
            preds[a.end].insert(a.start);
        }
    }
    let mut best = i64::MAX;
    for asg in assignments(m) {
        let held: Vec<BTreeSet<usize>> =
            m.actions.iter().map(|a| a.slots.iter().map(|s| asg[s.group]).collect()).collect();
        let n = m.actions.len();
        let mut conflict = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                conflict[a][b] =
                    a != b && !held[a].is_disjoint(&held[b]) && !ancestor(a, b) && !ancestor(b, a);
            }
        }
        let mut orientations = BTreeSet::new();
        let mut placed = vec![false; e];
        let mut first_start = vec![usize::MAX; n];
        extensions(m, &owner, &preds, &conflict, &mut placed, &mut first_start, 0, &mut orientations);
        for orient in orientations {
            let mut edges: Vec<(usize, usize, i64)> = m.precedence.iter().map(|&(u, v)| (u, v, 0)).collect();
            for a in &m.actions {
                edges.push((a.start, a.end, a.bounds.min as i64));
                if let Some(max) = a.bounds.max {
                    edges.push((a.end, a.start, -(max as i64)));
                }
            }
            for (a, b) in orient {
                edges.push((m.actions[a].end, m.actions[b].start, 0));
            }
            if let Some(t) = longest(e, &edges) {
                best = best.min(t.into_iter().max().unwrap_or(0));
            }
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn extensions(
    m: &ScheduleModel,
    owner: &[usize],
    preds: &[BTreeSet<usize>],
    conflict: &[Vec<bool>],
    placed: &mut Vec<bool>,
    order: &mut Vec<usize>,
    count: usize,
    out: &mut BTreeSet<Vec<(usize, usize)>>,
) {
    let e = placed.len();
    if count == e {
        let n = m.actions.len();
        let mut o = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if conflict[a][b] && order[a] < order[b] {
                    o.push((a, b));
                }
            }
        }
        out.insert(o);
        return;
    }
    for v in 0..e {
        if placed[v] || preds[v].iter().any(|&u| !placed[u]) {
            continue;
        }
        let a = owner[v];
        let is_start = m.actions[a].start == v;
        if is_start {
            // No conflicting action may be running.
            let running = (0..m.actions.len())
                .any(|b| conflict[a][b] && placed[m.actions[b].start] && !placed[m.actions[b].end]);
            if running {
                continue;
            }
            order[a] = count;
        }
        placed[v] = true;
        extensions(m, owner, preds, conflict, placed, order, count + 1, out);
        placed[v] = false;
    }
}

/// Least times with `t(v) >= t(u) + w`, or `None` on a positive cycle.
fn longest(n: usize, edges: &[(usize, usize, i64)]) -> Option<Vec<i64>> {
    let mut t = vec![0i64; n];
    for _ in 0..=n {
        let mut changed = false;
        for &(u, v, w) in edges {
            if t[u] + w > t[v] {
                t[v] = t[u] + w;
                changed = true;
            }
        }
        if !changed {
            return Some(t);
        }
    }
    None
}
