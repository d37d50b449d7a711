//! Resource allocation and makespan minimisation over the enabler partial
//! order, post-hoc validation, and the simple temporal network.

mod check;
mod solve;
mod stn;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::enablers::{instance_value, EnablerMatrix, ResourceCatalog, ResourceType};
use crate::model::{base_name, DurationBounds, Level, Origin, Problem, SnapKind, TOPlan};
use crate::term::{Symbol, Term};

pub use check::{check_schedule, Violation};
pub use solve::{solve, solve_with, SolveOptions};
pub use stn::{check_stn, to_stn, Stn, StnEdge, StnNode, StnVerdict};

/// A snap event: one step of the expanded plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub head: Term,
    /// Index into the plan's steps.
    pub step: usize,
}

/// A resource-valued head parameter of an action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub param: usize,
    pub group: usize,
}

/// Slots that must receive the same instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotGroup {
    pub resource_type: usize,
    /// Candidate instance indices into the type's instance list.
    pub candidates: Vec<usize>,
    /// Instance used by the total-order plan, if any.
    pub original: Option<usize>,
}

/// A durative action occurrence of the plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionInstance {
    pub name: Symbol,
    /// Head of the start snap as planned.
    pub head: Term,
    /// Names of the head parameters, from the action schema.
    pub param_names: Vec<Symbol>,
    pub level: Level,
    pub start: usize,
    pub end: usize,
    pub bounds: DurationBounds,
    /// False if the action holds none of its resources.
    pub occupies: bool,
    pub parent: Option<usize>,
    pub slots: Vec<Slot>,
}

impl ActionInstance {
    pub fn is_instant(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScheduleModel {
    pub events: Vec<Event>,
    pub actions: Vec<ActionInstance>,
    /// `(u, v)`: event `u` happens no later than event `v`.
    pub precedence: Vec<(usize, usize)>,
    pub resources: Vec<ResourceType>,
    pub groups: Vec<SlotGroup>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("enabler matrix is inconsistent at row {0}")]
    InconsistentMatrix(usize),
    #[error("plan step {0} has no matching start/end step")]
    UnpairedStep(usize),
    #[error("slot {param} of action {action} has no candidate instance")]
    UnsatisfiableSlot { action: usize, param: usize },
    #[error("no feasible schedule exists")]
    Infeasible,
    #[error("search budget exhausted before a feasible schedule was found")]
    LimitExceeded,
    #[error("model is malformed: {0}")]
    Malformed(&'static str),
}

impl ScheduleModel {
    /// Action owning each event.
    pub fn event_owner(&self) -> Vec<usize> {
        let mut owner = alloc::vec![usize::MAX; self.events.len()];
        for (i, a) in self.actions.iter().enumerate() {
            owner[a.start] = i;
            owner[a.end] = i;
        }
        owner
    }

    /// True if `a` is an ancestor of `b` or the other way round. Nested
    /// actions share their resources by construction and never conflict.
    pub fn nested(&self, a: usize, b: usize) -> bool {
        let above = |mut x: usize, y: usize| {
            while let Some(p) = self.actions[x].parent {
                if p == y {
                    return true;
                }
                x = p;
            }
            false
        };
        above(a, b) || above(b, a)
    }

    /// Structural sanity: indices in range, groups non-empty, every event
    /// owned by exactly one action.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        let e = self.events.len();
        let mut owned = alloc::vec![0u8; e];
        for (i, a) in self.actions.iter().enumerate() {
            if a.start >= e || a.end >= e {
                return Err(ScheduleError::Malformed("event index out of range"));
            }
            owned[a.start] += 1;
            if a.end != a.start {
                owned[a.end] += 1;
            }
            if !a.bounds.is_valid() {
                return Err(ScheduleError::Malformed("duration bounds"));
            }
            for s in &a.slots {
                let g = self.groups.get(s.group).ok_or(ScheduleError::Malformed("group index"))?;
                if g.candidates.is_empty() {
                    return Err(ScheduleError::UnsatisfiableSlot { action: i, param: s.param });
                }
            }
        }
        if owned.iter().any(|&c| c != 1) {
            return Err(ScheduleError::Malformed("event ownership"));
        }
        for &(u, v) in &self.precedence {
            if u >= e || v >= e {
                return Err(ScheduleError::Malformed("precedence index"));
            }
        }
        for g in &self.groups {
            let n = self.resources.get(g.resource_type).map_or(0, |t| t.instances.len());
            if g.candidates.iter().any(|&c| c >= n) {
                return Err(ScheduleError::Malformed("candidate index"));
            }
        }
        Ok(())
    }

    /// Instance value assigned to each slot of action `a`, paired with the
    /// parameter position.
    pub fn assigned_values(&self, schedule: &Schedule, a: usize) -> Vec<(usize, Term)> {
        self.actions[a]
            .slots
            .iter()
            .map(|s| {
                let g = &self.groups[s.group];
                let inst = &self.resources[g.resource_type].instances[schedule.assignment[s.group]];
                (s.param, instance_value(inst).clone())
            })
            .collect()
    }

    /// Head of action `a` with its resource parameters replaced by the
    /// assigned instances.
    pub fn assigned_head(&self, schedule: &Schedule, a: usize) -> Term {
        reassign(&self.actions[a].head, &self.assigned_values(schedule, a))
    }
}

pub(crate) fn reassign(head: &Term, values: &[(usize, Term)]) -> Term {
    match head {
        Term::Compound(f, args) => {
            let mut args = args.clone();
            for (p, v) in values {
                args[*p] = v.clone();
            }
            Term::Compound(f.clone(), args)
        }
        other => other.clone(),
    }
}

/// A timed, resource-assigned plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    /// Instance index per slot group.
    pub assignment: Vec<usize>,
    pub event_times: Vec<i64>,
    pub makespan: i64,
    /// `(a, b)`: non-nested users of a shared instance, `a` ending before
    /// `b` starts.
    pub resource_order: Vec<(usize, usize)>,
    /// False when the search budget ran out before optimality was proven.
    pub optimal: bool,
    pub nodes: u64,
}

impl Schedule {
    pub fn start(&self, m: &ScheduleModel, a: usize) -> i64 {
        self.event_times[m.actions[a].start]
    }

    pub fn end(&self, m: &ScheduleModel, a: usize) -> i64 {
        self.event_times[m.actions[a].end]
    }

    pub fn duration(&self, m: &ScheduleModel, a: usize) -> i64 {
        self.end(m, a) - self.start(m, a)
    }
}

/// Builds the scheduling model from an expanded plan and its enablers.
///
/// Every start/end pair (or plain step) becomes an action instance.
/// Durations come from the KB, defaulting to one unit, except mapped
/// high-level actions, which default to an unbounded envelope. Resource
/// parameters of mapped actions share the slot group of the parent
/// parameter they are bound to.
pub fn build_model(
    plan: &TOPlan,
    c: &EnablerMatrix,
    cat: &ResourceCatalog,
    p: &Problem,
) -> Result<ScheduleModel, ScheduleError> {
    c.check().map_err(|e| match e {
        crate::enablers::PoError::InconsistentMatrix(r) => ScheduleError::InconsistentMatrix(r),
        _ => ScheduleError::InconsistentMatrix(0),
    })?;
    if c.size() != plan.len() + 2 {
        return Err(ScheduleError::Malformed("matrix size differs from plan length"));
    }

    let events: Vec<Event> = plan
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| Event { head: s.head.clone(), step: i })
        .collect();

    let mapped_parents: alloc::collections::BTreeSet<usize> = plan
        .steps
        .iter()
        .filter_map(|s| match s.origin {
            Origin::Mapped { parent, .. } => Some(parent),
            Origin::HighLevel => None,
        })
        .collect();

    // Pair steps into action instances, in order of their first step.
    let mut matched = alloc::vec![false; plan.len()];
    let mut action_of_step: BTreeMap<usize, usize> = BTreeMap::new();
    let mut actions: Vec<ActionInstance> = Vec::new();
    let mut groups: Vec<SlotGroup> = Vec::new();
    let name_of = |t: &Term| t.functor().map_or("", Symbol::as_str).into();

    for (i, step) in plan.steps.iter().enumerate() {
        if matched[i] {
            continue;
        }
        let fname: alloc::string::String = name_of(&step.head);
        let end = match step.kind {
            SnapKind::Plain => i,
            SnapKind::End => return Err(ScheduleError::UnpairedStep(i)),
            SnapKind::Start => (i + 1..plan.len())
                .find(|&k| {
                    let e = &plan.steps[k];
                    !matched[k]
                        && e.kind == SnapKind::End
                        && e.level == step.level
                        && base_name(&name_of(&e.head)) == base_name(&fname)
                        && e.head.args() == step.head.args()
                })
                .ok_or(ScheduleError::UnpairedStep(i))?,
        };
        matched[i] = true;
        matched[end] = true;
        let base = Symbol::new(base_name(&fname));
        let schema = &p.actions(step.level)[step.action];
        let is_envelope = step.level == Level::High && mapped_parents.contains(&i);
        let bounds = p.durations.get(&base).copied().unwrap_or(if is_envelope {
            DurationBounds::ANY
        } else if step.kind == SnapKind::Plain {
            DurationBounds::INSTANT
        } else {
            DurationBounds::UNIT
        });
        let param_names = schema
            .params()
            .iter()
            .enumerate()
            .map(|(k, t)| match t {
                Term::Var(v) => v.clone(),
                _ => Symbol::from(alloc::format!("arg{k}")),
            })
            .collect();

        let parent = match step.origin {
            Origin::Mapped { parent, .. } => action_of_step.get(&parent).copied(),
            Origin::HighLevel => None,
        };
        let idx = actions.len();
        let mut slots = Vec::new();
        for (q, value) in step.head.args().iter().enumerate() {
            let Some((ty, inst)) = cat.lookup(value) else { continue };
            let inherited = match (step.origin, parent) {
                (Origin::Mapped { parent: ps, position }, Some(pa)) => {
                    let m = p
                        .mapping_for(plan.steps[ps].head.functor().expect("callable"))
                        .ok_or(ScheduleError::Malformed("mapping of parent step"))?;
                    match m.expansion.get(position).and_then(|t| t.args().get(q)) {
                        Some(Term::Var(v)) => m
                            .hl_start_head
                            .args()
                            .iter()
                            .position(|a| matches!(a, Term::Var(w) if w == v))
                            .and_then(|hq| actions[pa].slots.iter().find(|s| s.param == hq))
                            .map(|s| s.group),
                        // A constant in the mapping pins the instance.
                        Some(_) => {
                            groups.push(SlotGroup { resource_type: ty, candidates: alloc::vec![inst], original: Some(inst) });
                            Some(groups.len() - 1)
                        }
                        None => None,
                    }
                }
                _ => None,
            };
            let group = match inherited {
                Some(g) => g,
                None => {
                    let n = cat.types[ty].instances.len();
                    groups.push(SlotGroup { resource_type: ty, candidates: (0..n).collect(), original: Some(inst) });
                    groups.len() - 1
                }
            };
            slots.push(Slot { param: q, group });
        }
        actions.push(ActionInstance {
            name: base,
            head: step.head.clone(),
            param_names,
            level: step.level,
            start: i,
            end,
            bounds,
            occupies: true,
            parent,
            slots,
        });
        action_of_step.insert(i, idx);
    }

    let mut precedence = Vec::new();
    let n = plan.len();
    for i in 1..=n {
        for j in 1..i {
            if c.get(j, i) {
                precedence.push((j - 1, i - 1));
            }
        }
    }

    let model = ScheduleModel { events, actions, precedence, resources: cat.types.clone(), groups };
    model.validate()?;
    Ok(model)
}
