//! Causal enablers over an expanded total-order plan, mapping precedence,
//! and the resource catalog.
//!
//! Matrix indices: 0 is the virtual `init()` step, `1..=n` are the plan
//! steps in order and `n + 1` is the virtual `end()` step.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::model::{Level, Origin, Problem, SnapKind, TOPlan};
use crate::planner::ground_effects;
use crate::term::{Compact, Symbol, Term};
use crate::unify::{match_term, substitute, Bindings};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PoError {
    #[error("step {0} has no path to the end of the plan")]
    InconsistentMatrix(usize),
    #[error("effect `{effect}` of step {step} is not ground")]
    NonGroundEffect { step: usize, effect: Term },
}

/// One resource family and its instances (matching general KB facts).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceType {
    pub name: Symbol,
    pub pattern: Term,
    pub instances: Vec<Term>,
}

/// The value an instance fact contributes to action parameters: its first
/// argument, or the atom itself.
pub fn instance_value(instance: &Term) -> &Term {
    instance.args().first().unwrap_or(instance)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceCatalog {
    pub types: Vec<ResourceType>,
    /// Per matrix row: the resource type of each resource-valued head
    /// parameter, in parameter order.
    pub demands: Vec<Vec<usize>>,
}

impl ResourceCatalog {
    /// `(type, instance)` of a resource value.
    pub fn lookup(&self, value: &Term) -> Option<(usize, usize)> {
        self.types.iter().enumerate().find_map(|(ti, t)| {
            t.instances
                .iter()
                .position(|inst| instance_value(inst) == value)
                .map(|ii| (ti, ii))
        })
    }

    pub fn is_resource_value(&self, value: &Term) -> bool {
        self.lookup(value).is_some()
    }

    /// True if any argument of the fluent, at any depth, is a resource value.
    pub fn mentions_resource(&self, fluent: &Term) -> bool {
        fluent
            .args()
            .iter()
            .any(|a| self.is_resource_value(a) || self.mentions_resource(a))
    }

    /// Resource type names with instance counts, instance lists, and the
    /// per-action demand as runs of consecutive steps with equal demand.
    pub fn listing(&self) -> String {
        let mut out = String::from("Resources:\n");
        for (i, t) in self.types.iter().enumerate() {
            let _ = writeln!(out, "[{i}] {}-{}", t.name, t.instances.len());
        }
        out.push_str("Resources list:\n");
        for (i, t) in self.types.iter().enumerate() {
            let list: Vec<String> = t.instances.iter().map(|x| alloc::format!("{}", Compact(x))).collect();
            let _ = writeln!(out, "[{i}] {}-[{}]", t.name, list.join(","));
        }
        out.push_str("Resources required by action:\n");
        let mut row = 0;
        while row < self.demands.len() {
            let d = &self.demands[row];
            let mut end = row + 1;
            while end < self.demands.len() && self.demands[end] == *d {
                end += 1;
            }
            if !d.is_empty() {
                let names: Vec<&str> = d.iter().map(|&t| self.types[t].name.as_str()).collect();
                let _ = writeln!(out, "[{row}] {}-[{}]", end - row, names.join(","));
            }
            row = end;
        }
        out
    }
}

/// Resource types from the `resources/1` patterns and the per-step demand.
pub fn extract_resources(p: &Problem, plan: &TOPlan) -> ResourceCatalog {
    let mut types: Vec<ResourceType> = Vec::new();
    for r in &p.resources {
        let name = r.pattern.functor().cloned().unwrap_or_else(|| Symbol::new(""));
        let instances: Vec<Term> = p
            .general_kb
            .family_of(&r.pattern)
            .filter(|f| match_term(&r.pattern, f, &Bindings::new()).is_some())
            .cloned()
            .collect();
        if let Some(t) = types.iter_mut().find(|t| t.name == name) {
            for inst in instances {
                if !t.instances.contains(&inst) {
                    t.instances.push(inst);
                }
            }
        } else {
            types.push(ResourceType { name, pattern: r.pattern.clone(), instances });
        }
    }
    let mut cat = ResourceCatalog { types, demands: Vec::new() };
    let mut demands = alloc::vec![Vec::new()];
    for step in &plan.steps {
        demands.push(step.head.args().iter().filter_map(|a| cat.lookup(a).map(|(t, _)| t)).collect());
    }
    demands.push(Vec::new());
    cat.demands = demands;
    cat
}

/// Ground conditions and effects of one matrix row.
#[derive(Clone, Debug, Default)]
struct Row {
    pos: Vec<Term>,
    neg: Vec<Term>,
    adds: Vec<Term>,
    dels: Vec<Term>,
}

/// Precomputed data for enabler tests on one plan.
pub struct EnablerContext<'a> {
    catalog: &'a ResourceCatalog,
    rows: Vec<Row>,
    forced: BTreeSet<(usize, usize)>,
}

impl<'a> EnablerContext<'a> {
    pub fn new(plan: &TOPlan, p: &Problem, catalog: &'a ResourceCatalog) -> Result<Self, PoError> {
        let mut rows = Vec::with_capacity(plan.len() + 2);
        rows.push(Row { adds: p.init.iter().cloned().collect(), ..Row::default() });
        for (i, step) in plan.steps.iter().enumerate() {
            let a = &p.actions(step.level)[step.action];
            let (adds, dels) = ground_effects(a, &step.bindings).map_err(|e| match e {
                crate::planner::PlanError::EffectNotGround { effect, .. } => {
                    PoError::NonGroundEffect { step: i + 1, effect }
                }
                _ => unreachable!(),
            })?;
            rows.push(Row {
                pos: a.pos_pre.iter().map(|t| open(substitute(t, &step.bindings))).collect(),
                neg: a.neg_pre.iter().map(|t| open(substitute(t, &step.bindings))).collect(),
                adds,
                dels,
            });
        }
        rows.push(Row { pos: p.goal.clone(), ..Row::default() });
        Ok(EnablerContext { catalog, rows, forced: mapping_precedence(plan, p) })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Causal part of the enabler test: `j` adds a fluent matching a
    /// positive precondition of `i`, or deletes one matching a negative
    /// precondition, and that fluent mentions no resource instance.
    pub fn is_causal_enabler(&self, j: usize, i: usize) -> bool {
        if j >= i {
            return false;
        }
        let (rj, ri) = (&self.rows[j], &self.rows[i]);
        let hits = |effects: &[Term], conds: &[Term]| {
            effects.iter().any(|e| {
                !self.catalog.mentions_resource(e)
                    && conds.iter().any(|c| match_term(c, e, &Bindings::new()).is_some())
            })
        };
        hits(&rj.adds, &ri.pos) || hits(&rj.dels, &ri.neg)
    }

    pub fn is_enabler(&self, j: usize, i: usize) -> bool {
        let last = self.rows.len() - 1;
        if j >= i {
            return false;
        }
        j == 0 || i == last || self.forced.contains(&(j, i)) || self.is_causal_enabler(j, i)
    }
}

/// Unbound variables behave as `_` when matching conditions.
fn open(t: Term) -> Term {
    match t {
        Term::Var(_) => Term::Wildcard,
        Term::Compound(f, args) => Term::Compound(f, args.into_iter().map(open).collect()),
        other => other,
    }
}

/// Forced pairs `(enabler, enabled)` in matrix numbering for every expanded
/// mapping: the HL start precedes each mapped snap, mapped snaps follow each
/// other in expansion order, and every mapped snap (and the HL start)
/// precedes the HL end.
pub fn mapping_precedence(plan: &TOPlan, _p: &Problem) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    let mut used_ends = BTreeSet::new();
    for (s, step) in plan.steps.iter().enumerate() {
        let children: Vec<usize> = plan
            .steps
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c.origin, Origin::Mapped { parent, .. } if parent == s))
            .map(|(k, _)| k)
            .collect();
        if children.is_empty() {
            continue;
        }
        let end = (s + 1..plan.len()).find(|&k| {
            let e = &plan.steps[k];
            e.level == Level::High
                && e.kind == SnapKind::End
                && !used_ends.contains(&k)
                && crate::model::base_name(e.head.functor().map_or("", Symbol::as_str))
                    == crate::model::base_name(step.head.functor().map_or("", Symbol::as_str))
                && e.head.args() == step.head.args()
        });
        let m = |k: usize| k + 1;
        for (n, &c) in children.iter().enumerate() {
            out.insert((m(s), m(c)));
            for &later in &children[n + 1..] {
                out.insert((m(c), m(later)));
            }
        }
        if let Some(e) = end {
            used_ends.insert(e);
            out.insert((m(s), m(e)));
            for &c in &children {
                out.insert((m(c), m(e)));
            }
        }
    }
    out
}

/// Boolean enabler matrix with row labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnablerMatrix {
    n: usize,
    cells: Vec<bool>,
    labels: Vec<String>,
}

impl EnablerMatrix {
    /// Number of rows, including the virtual init and end rows.
    pub fn size(&self) -> usize {
        self.n
    }

    /// True if row `j` enables row `i`.
    pub fn get(&self, j: usize, i: usize) -> bool {
        self.cells[j * self.n + i]
    }

    pub fn set(&mut self, j: usize, i: usize, value: bool) {
        self.cells[j * self.n + i] = value;
    }

    pub fn enablers(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.get(j, i)).collect()
    }

    pub fn enabled_by(&self, j: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.get(j, i)).collect()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Every true cell points forward and every row reaches the end row.
    pub fn check(&self) -> Result<(), PoError> {
        let last = self.n - 1;
        let mut reaches = alloc::vec![false; self.n];
        reaches[last] = true;
        for j in (0..last).rev() {
            for i in 0..self.n {
                if self.get(j, i) {
                    if i <= j {
                        return Err(PoError::InconsistentMatrix(j));
                    }
                    if reaches[i] {
                        reaches[j] = true;
                    }
                }
            }
            if !reaches[j] {
                return Err(PoError::InconsistentMatrix(j));
            }
        }
        Ok(())
    }

    /// `[i] head, [enablers]` per row; the init row has no separator.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let list: Vec<String> = self.enablers(i).iter().map(|j| alloc::format!("{j}")).collect();
            if i == 0 {
                let _ = writeln!(out, "[0] {}[{}]", self.labels[0], list.join(","));
            } else {
                let _ = writeln!(out, "[{i}] {}, [{}]", self.labels[i], list.join(","));
            }
        }
        out
    }
}

/// Fills the enabler matrix for an expanded plan.
pub fn find_enablers(plan: &TOPlan, p: &Problem, cat: &ResourceCatalog) -> Result<EnablerMatrix, PoError> {
    let ctx = EnablerContext::new(plan, p, cat)?;
    let n = ctx.len();
    let mut labels = Vec::with_capacity(n);
    labels.push(String::from("init()"));
    labels.extend(plan.steps.iter().map(|s| alloc::format!("{}", s.head)));
    labels.push(String::from("end()"));
    let mut m = EnablerMatrix { n, cells: alloc::vec![false; n * n], labels };
    for i in 0..n {
        for j in 0..i {
            if ctx.is_enabler(j, i) {
                m.set(j, i, true);
            }
        }
    }
    m.check()?;
    Ok(m)
}

/// Single-pair enabler test; builds the context each call.
pub fn is_enabler(j: usize, i: usize, plan: &TOPlan, p: &Problem, cat: &ResourceCatalog) -> bool {
    EnablerContext::new(plan, p, cat).is_ok_and(|ctx| ctx.is_enabler(j, i))
}
