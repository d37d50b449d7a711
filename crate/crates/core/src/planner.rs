//! Forward state-space search for a high-level total-order plan and
//! expansion of mapped actions into low-level snap actions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{
    EffectOp, GroundingItem, KnowledgeBase, Level, Origin, PlanStep, Problem, SnapAction, SnapKind,
    State, TOPlan,
};
use crate::term::{Literal, Symbol, Term};
use crate::unify::{
    enumerate_groundings, enumerate_groundings_pruned, holds_any, holds_pos, match_term,
    substitute, Bindings,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Depth-bounded DFS with the bound raised one step at a time. Returns
    /// a shortest plan, ties broken by declaration order.
    IterativeDeepening,
    /// A single DFS bounded by `max_depth`; returns the first plan found.
    DepthFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_depth: usize,
    pub max_expansions: u64,
    pub visited_pruning: bool,
    pub strategy: Strategy,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_depth: 64,
            max_expansions: 2_000_000,
            visited_pruning: true,
            strategy: Strategy::IterativeDeepening,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("no plan exists: the reachable state space was exhausted")]
    Unsolvable,
    #[error("search limits exceeded (max depth {max_depth}, max expansions {max_expansions})")]
    LimitExceeded { max_depth: usize, max_expansions: u64 },
    #[error("effect `{effect}` of `{action}` is not ground")]
    EffectNotGround { action: Term, effect: Term },
    #[error("mapping step {step} `{action}` is inapplicable: `{literal}` fails")]
    MappingInapplicable { step: usize, action: Term, literal: Literal },
}

/// Precondition checks scheduled between grounding items.
#[derive(Clone, Copy)]
enum Check {
    Pos(usize),
    Neg(usize),
}

struct CheckPlan {
    before: Vec<Check>,
    after: Vec<Vec<Check>>,
}

impl CheckPlan {
    fn new(a: &SnapAction, b0: &Bindings) -> Self {
        let mut bound: Vec<Symbol> = b0.iter().map(|(v, _)| v.clone()).collect();
        let mut introduced: Vec<Vec<Symbol>> = Vec::with_capacity(a.grounding.len());
        for item in &a.grounding {
            let mut new = Vec::new();
            if let GroundingItem::Pattern(p) = item {
                for v in p.variables() {
                    if !bound.contains(&v) {
                        bound.push(v.clone());
                        new.push(v);
                    }
                }
            }
            introduced.push(new);
        }
        let bound_after = |k: usize, v: &Symbol| {
            b0.is_bound(v) || introduced[..=k].iter().any(|vs| vs.contains(v))
        };
        let mut before = Vec::new();
        let mut after = alloc::vec![Vec::new(); a.grounding.len()];
        for (i, p) in a.pos_pre.iter().enumerate() {
            let vars = p.variables();
            if vars.iter().all(|v| b0.is_bound(v)) {
                before.push(Check::Pos(i));
            }
            // Re-check each time the pattern gains a binding.
            for (k, new) in introduced.iter().enumerate() {
                if vars.iter().any(|v| new.contains(v)) {
                    after[k].push(Check::Pos(i));
                }
            }
        }
        for (i, n) in a.neg_pre.iter().enumerate() {
            let vars = n.variables();
            if vars.iter().all(|v| b0.is_bound(v)) {
                before.push(Check::Neg(i));
                continue;
            }
            if let Some(k) = (0..a.grounding.len()).find(|&k| vars.iter().all(|v| bound_after(k, v))) {
                after[k].push(Check::Neg(i));
            }
        }
        CheckPlan { before, after }
    }
}

fn check_ok(a: &SnapAction, c: Check, s: &State, b: &mut Bindings) -> bool {
    match c {
        Check::Pos(i) => holds_any(&a.pos_pre[i], s, b),
        Check::Neg(i) => !holds_any(&a.neg_pre[i], s, b),
    }
}

/// Bindings under which `a` is applicable in `s`, in grounding order.
///
/// `b0` pre-binds variables (the head parameters when applying a mapping).
/// Positive preconditions bind any remaining variables to their first match.
pub fn applicable<'a>(
    a: &'a SnapAction,
    s: &'a State,
    kb: &'a KnowledgeBase,
    b0: Bindings,
) -> impl Iterator<Item = Bindings> + 'a {
    let plan = CheckPlan::new(a, &b0);
    let mut scratch = b0.clone();
    let viable = plan.before.iter().all(|&c| check_ok(a, c, s, &mut scratch));
    let prune = move |k: usize, b: &Bindings| {
        let mut b = b.clone();
        plan.after[k].iter().all(|&c| check_ok(a, c, s, &mut b))
    };
    let items: &[GroundingItem] = if viable { &a.grounding } else { &[] };
    let stream = enumerate_groundings_pruned(items, kb, b0, prune);
    stream
        .take_while(move |_| viable)
        .filter_map(move |mut b| {
            for p in &a.pos_pre {
                if !holds_pos(p, s, &mut b) {
                    return None;
                }
            }
            for n in &a.neg_pre {
                if holds_any(n, s, &mut b) {
                    return None;
                }
            }
            Some(b)
        })
}

/// Ground add and delete lists of `a` under `b`.
pub fn ground_effects(a: &SnapAction, b: &Bindings) -> Result<(Vec<Term>, Vec<Term>), PlanError> {
    let (mut adds, mut dels) = (Vec::new(), Vec::new());
    for e in &a.effects {
        let g = substitute(&e.literal, b);
        if !g.is_ground() {
            return Err(PlanError::EffectNotGround { action: substitute(&a.head, b), effect: g });
        }
        match e.op {
            EffectOp::Add => adds.push(g),
            EffectOp::Del => dels.push(g),
        }
    }
    Ok((adds, dels))
}

/// `(s \ dels) ∪ adds`. The input state is not modified.
pub fn apply_action(a: &SnapAction, b: &Bindings, s: &State) -> Result<State, PlanError> {
    let (adds, dels) = ground_effects(a, b)?;
    let mut next = s.clone();
    for d in &dels {
        next.remove(d);
    }
    for add in adds {
        next.insert(add);
    }
    Ok(next)
}

/// Every goal pattern has a matching fluent.
pub fn goal_holds(goal: &[Term], s: &State) -> bool {
    let mut b = Bindings::new();
    goal.iter().all(|g| holds_any(g, s, &mut b))
}

/// A successor considered by the search.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub action: usize,
    pub bindings: Bindings,
    pub next: State,
}

/// Reorders the successors of a state before they are tried.
pub trait SuccessorOrder {
    fn order(&self, problem: &Problem, state: &State, candidates: &mut Vec<Candidate>);
}

/// Declaration order: actions as listed in the KB, groundings in stream order.
pub struct DeclarationOrder;

impl SuccessorOrder for DeclarationOrder {
    fn order(&self, _: &Problem, _: &State, _: &mut Vec<Candidate>) {}
}

/// Stable sort by the number of unsatisfied goal patterns in the successor.
pub struct GoalCountOrder;

impl SuccessorOrder for GoalCountOrder {
    fn order(&self, problem: &Problem, _: &State, candidates: &mut Vec<Candidate>) {
        let unmet = |s: &State| {
            let mut b = Bindings::new();
            problem.goal.iter().filter(|g| !holds_any(g, s, &mut b)).count()
        };
        candidates.sort_by_cached_key(|c| unmet(&c.next));
    }
}

/// Stable sort by the number of unsatisfied goal patterns once the
/// candidate's durative action has completed: a start is projected through
/// its paired end (when that end is applicable right away), anything else
/// is scored on its successor state.
pub struct ProjectedGoalOrder;

impl SuccessorOrder for ProjectedGoalOrder {
    fn order(&self, problem: &Problem, _: &State, candidates: &mut Vec<Candidate>) {
        let unmet = |s: &State| {
            let mut b = Bindings::new();
            problem.goal.iter().filter(|g| !holds_any(g, s, &mut b)).count()
        };
        let project = |c: &Candidate| {
            let a = &problem.hl_actions[c.action];
            if a.kind != SnapKind::Start {
                return unmet(&c.next);
            }
            let head = substitute(&a.head, &c.bindings);
            let end = problem
                .hl_actions
                .iter()
                .find(|e| e.kind == SnapKind::End && e.base_name() == a.base_name());
            let projected = end.and_then(|e| {
                // Start and end share their parameter list, not their functor.
                if e.head.args().len() != head.args().len() {
                    return None;
                }
                let mut b0 = Bindings::new();
                for (pat, val) in e.head.args().iter().zip(head.args()) {
                    b0 = match_term(pat, val, &b0)?;
                }
                let b = applicable(e, &c.next, &problem.general_kb, b0).next()?;
                apply_action(e, &b, &c.next).ok()
            });
            unmet(projected.as_ref().unwrap_or(&c.next))
        };
        candidates.sort_by_cached_key(project);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expansions: u64,
    pub iterations: usize,
}

/// High-level plan search.
pub struct Planner<'a> {
    problem: &'a Problem,
    limits: SearchLimits,
    order: &'a dyn SuccessorOrder,
    rejected: Vec<Vec<Term>>,
    stats: SearchStats,
}

struct Dfs<'a, 'p> {
    planner: &'p mut Planner<'a>,
    table: BTreeMap<State, usize>,
    path: Vec<(usize, Bindings, Term)>,
    // States met at the depth bound; a cutoff only counts if one of them
    // was never expanded in the iteration.
    frontier: alloc::collections::BTreeSet<State>,
    cutoff: bool,
}

impl<'a> Planner<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        Planner {
            problem,
            limits: SearchLimits::default(),
            order: &DeclarationOrder,
            rejected: Vec::new(),
            stats: SearchStats::default(),
        }
    }

    pub fn with_limits(mut self, limits: SearchLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_order(mut self, order: &'a dyn SuccessorOrder) -> Self {
        self.order = order;
        self
    }

    /// Excludes a plan (by its sequence of step heads) from future results,
    /// so the next call returns an alternative total order.
    pub fn reject(&mut self, heads: Vec<Term>) {
        self.rejected.push(heads);
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn plan(&mut self) -> Result<TOPlan, PlanError> {
        self.stats = SearchStats::default();
        let limits = self.limits;
        let exceeded = PlanError::LimitExceeded {
            max_depth: limits.max_depth,
            max_expansions: limits.max_expansions,
        };
        let bounds: Vec<usize> = match limits.strategy {
            Strategy::IterativeDeepening => (0..=limits.max_depth).collect(),
            Strategy::DepthFirst => alloc::vec![limits.max_depth],
        };
        let init = self.problem.init.clone();
        for bound in bounds {
            self.stats.iterations += 1;
            let mut dfs = Dfs {
                planner: self,
                table: BTreeMap::new(),
                path: Vec::new(),
                frontier: Default::default(),
                cutoff: false,
            };
            if dfs.run(&init, 0, bound)? {
                let path = core::mem::take(&mut dfs.path);
                return Ok(self.build_plan(path));
            }
            let cutoff = dfs.cutoff || dfs.frontier.iter().any(|s| !dfs.table.contains_key(s));
            if !cutoff {
                return Err(PlanError::Unsolvable);
            }
        }
        Err(exceeded)
    }

    fn build_plan(&self, path: Vec<(usize, Bindings, Term)>) -> TOPlan {
        let steps = path
            .into_iter()
            .map(|(action, bindings, head)| {
                let a = &self.problem.hl_actions[action];
                PlanStep { head, level: Level::High, kind: a.kind, action, bindings, origin: Origin::HighLevel }
            })
            .collect();
        TOPlan { steps }
    }
}

impl Dfs<'_, '_> {
    fn run(&mut self, s: &State, g: usize, bound: usize) -> Result<bool, PlanError> {
        let problem = self.planner.problem;
        if goal_holds(&problem.goal, s) {
            let rejected = self.planner.rejected.iter().any(|r| {
                r.len() == self.path.len() && r.iter().zip(&self.path).all(|(a, (_, _, h))| a == h)
            });
            return Ok(!rejected);
        }
        let limits = self.planner.limits;
        if limits.visited_pruning {
            if let Some(&d) = self.table.get(s) {
                if d <= g {
                    return Ok(false);
                }
            }
        }
        if g >= bound {
            if limits.visited_pruning {
                self.frontier.insert(s.clone());
            } else {
                self.cutoff = true;
            }
            return Ok(false);
        }
        if limits.visited_pruning {
            self.table.insert(s.clone(), g);
        }
        self.planner.stats.expansions += 1;
        if self.planner.stats.expansions > limits.max_expansions {
            return Err(PlanError::LimitExceeded {
                max_depth: limits.max_depth,
                max_expansions: limits.max_expansions,
            });
        }

        let mut candidates = Vec::new();
        for (i, a) in problem.hl_actions.iter().enumerate() {
            for b in applicable(a, s, &problem.general_kb, Bindings::new()) {
                let next = apply_action(a, &b, s)?;
                candidates.push(Candidate { action: i, bindings: b, next });
            }
        }
        self.planner.order.order(problem, s, &mut candidates);

        for c in candidates {
            let head = substitute(&problem.hl_actions[c.action].head, &c.bindings);
            self.path.push((c.action, c.bindings, head));
            if self.run(&c.next, g + 1, bound)? {
                return Ok(true);
            }
            self.path.pop();
        }
        Ok(false)
    }
}

/// Convenience wrapper: declaration-order search with the given limits.
pub fn plan_hl(p: &Problem, limits: SearchLimits) -> Result<TOPlan, PlanError> {
    Planner::new(p).with_limits(limits).plan()
}

/// Replays a high-level plan from the initial state, inserting the low-level
/// snap actions of every mapped start right after it. Each inserted action
/// must be applicable in the evolving state.
pub fn expand_mappings(hl: &TOPlan, p: &Problem) -> Result<TOPlan, PlanError> {
    let mut state = p.init.clone();
    let mut out: Vec<PlanStep> = Vec::with_capacity(hl.len());
    for step in &hl.steps {
        let a = &p.hl_actions[step.action];
        state = apply_action(a, &step.bindings, &state)?;
        let parent = out.len();
        out.push(PlanStep { origin: Origin::HighLevel, ..step.clone() });

        let Some(m) = p.mapping_for(a.name()) else { continue };
        let Some(mb) = match_term(&m.hl_start_head, &step.head, &Bindings::new()) else {
            return Err(PlanError::MappingInapplicable {
                step: parent,
                action: step.head.clone(),
                literal: Literal::pos(m.hl_start_head.clone()),
            });
        };
        for (position, target) in m.expansion.iter().enumerate() {
            let target = substitute(target, &mb);
            let fail = |literal| PlanError::MappingInapplicable {
                step: out.len(),
                action: target.clone(),
                literal,
            };
            let name = target.functor().cloned().unwrap_or_else(|| Symbol::new(""));
            let Some(idx) = p.ll_actions.iter().position(|l| *l.name() == name) else {
                return Err(fail(Literal::pos(target.clone())));
            };
            let ll = &p.ll_actions[idx];
            let Some(b0) = match_term(&ll.head, &target, &Bindings::new()) else {
                return Err(fail(Literal::pos(target.clone())));
            };
            let Some(b) = applicable(ll, &state, &p.general_kb, b0.clone()).next() else {
                return Err(fail(failing_literal(ll, &state, &p.general_kb, b0)));
            };
            state = apply_action(ll, &b, &state)?;
            out.push(PlanStep {
                head: substitute(&ll.head, &b),
                level: Level::Low,
                kind: ll.kind,
                action: idx,
                bindings: b,
                origin: Origin::Mapped { parent, position },
            });
        }
    }
    Ok(TOPlan { steps: out })
}

/// First precondition that fails under the first grounding, for error
/// reporting.
pub(crate) fn failing_literal(a: &SnapAction, s: &State, kb: &KnowledgeBase, b0: Bindings) -> Literal {
    let Some(mut b) = enumerate_groundings(&a.grounding, kb, b0.clone()).next() else {
        // Report the first grounding item that has no solution on its own.
        for (k, item) in a.grounding.iter().enumerate() {
            if enumerate_groundings(&a.grounding[..=k], kb, b0.clone()).next().is_none() {
                return match item {
                    GroundingItem::Pattern(t) => Literal::pos(substitute(t, &b0)),
                    GroundingItem::Distinct(x, y) => Literal::neg(Term::compound(
                        "=",
                        alloc::vec![Term::Var(x.clone()), Term::Var(y.clone())],
                    )),
                };
            }
        }
        return Literal::pos(substitute(&a.head, &b0));
    };
    for p in &a.pos_pre {
        if !holds_pos(p, s, &mut b) {
            return Literal::pos(substitute(p, &b));
        }
    }
    for n in &a.neg_pre {
        if holds_any(n, s, &mut b) {
            return Literal::neg(substitute(n, &b));
        }
    }
    Literal::pos(substitute(&a.head, &b))
}

/// JSON-free structured view of a step, for serializers.
pub fn origin_label(o: Origin) -> String {
    match o {
        Origin::HighLevel => String::from("hl"),
        Origin::Mapped { parent, .. } => alloc::format!("mapped-from({parent})"),
    }
}
