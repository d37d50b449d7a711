//! The mapped planning problem and plan artifacts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::term::{Symbol, Term};
use crate::unify::Bindings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    High,
    Low,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::High => "high",
            Level::Low => "low",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SnapKind {
    Start,
    End,
    Plain,
}

impl SnapKind {
    pub fn of(name: &str) -> SnapKind {
        if name.ends_with("_start") {
            SnapKind::Start
        } else if name.ends_with("_end") {
            SnapKind::End
        } else {
            SnapKind::Plain
        }
    }
}

/// Name with any `_start` / `_end` suffix removed.
pub fn base_name(name: &str) -> &str {
    name.strip_suffix("_start")
        .or_else(|| name.strip_suffix("_end"))
        .unwrap_or(name)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundingItem {
    Pattern(Term),
    /// `X \= Y`
    Distinct(Symbol, Symbol),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EffectOp {
    Add,
    Del,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Effect {
    pub op: EffectOp,
    pub literal: Term,
}

impl Effect {
    pub fn add(literal: Term) -> Self {
        Effect { op: EffectOp::Add, literal }
    }

    pub fn del(literal: Term) -> Self {
        Effect { op: EffectOp::Del, literal }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            EffectOp::Add => write!(f, "add({})", self.literal),
            EffectOp::Del => write!(f, "del({})", self.literal),
        }
    }
}

/// One `action(...)` or `ll_action(...)` clause.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SnapAction {
    pub head: Term,
    pub pos_pre: Vec<Term>,
    pub neg_pre: Vec<Term>,
    pub grounding: Vec<GroundingItem>,
    pub effects: Vec<Effect>,
    pub level: Level,
    pub kind: SnapKind,
    /// Written in the six-argument form with an (empty) end-condition list.
    pub end_condition_slot: bool,
}

impl SnapAction {
    pub fn new(
        head: Term,
        pos_pre: Vec<Term>,
        neg_pre: Vec<Term>,
        grounding: Vec<GroundingItem>,
        effects: Vec<Effect>,
        level: Level,
    ) -> Self {
        let kind = head.functor().map_or(SnapKind::Plain, |f| SnapKind::of(f.as_str()));
        SnapAction {
            head,
            pos_pre,
            neg_pre,
            grounding,
            effects,
            level,
            kind,
            end_condition_slot: false,
        }
    }

    pub fn name(&self) -> &Symbol {
        self.head.functor().expect("action head is callable")
    }

    pub fn base_name(&self) -> &str {
        base_name(self.name().as_str())
    }

    pub fn params(&self) -> &[Term] {
        self.head.args()
    }

    /// Variables of head and grounding list, in order of first appearance.
    pub fn variables(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.head.collect_variables(&mut out);
        for item in &self.grounding {
            match item {
                GroundingItem::Pattern(p) => p.collect_variables(&mut out),
                GroundingItem::Distinct(a, b) => {
                    for v in [a, b] {
                        if !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                }
            }
        }
        out
    }
}

/// Duration interval in integral time units; `max: None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DurationBounds {
    pub min: u64,
    pub max: Option<u64>,
}

impl DurationBounds {
    pub const UNIT: DurationBounds = DurationBounds { min: 1, max: Some(1) };
    pub const INSTANT: DurationBounds = DurationBounds { min: 0, max: Some(0) };
    pub const ANY: DurationBounds = DurationBounds { min: 0, max: None };

    pub fn new(min: u64, max: Option<u64>) -> Self {
        DurationBounds { min, max }
    }

    pub fn fixed(d: u64) -> Self {
        DurationBounds { min: d, max: Some(d) }
    }

    pub fn is_valid(&self) -> bool {
        self.max.is_none_or(|m| self.min <= m)
    }

    pub fn contains(&self, d: u64) -> bool {
        d >= self.min && self.max.is_none_or(|m| d <= m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DurativeAction {
    pub name: Symbol,
    pub start: SnapAction,
    pub end: SnapAction,
    pub bounds: DurationBounds,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("snap action `{0}` has no matching start/end counterpart")]
    UnpairedSnapAction(String),
    #[error("start and end of `{0}` have different parameter lists")]
    SignatureMismatch(String),
    #[error("snap action `{0}` is declared more than once")]
    DuplicateAction(String),
    #[error("fluent `{0}` is not ground")]
    NonGroundFluent(Term),
}

/// Pairs `_start`/`_end` snap actions by base name. Plain actions become
/// zero-duration durative actions with `start == end`. Output order follows
/// the first appearance of each durative action; bounds default to one unit.
pub fn pair_snap_actions(actions: &[SnapAction]) -> Result<Vec<DurativeAction>, ModelError> {
    pair_with_durations(actions, &BTreeMap::new())
}

pub(crate) fn pair_with_durations(
    actions: &[SnapAction],
    durations: &BTreeMap<Symbol, DurationBounds>,
) -> Result<Vec<DurativeAction>, ModelError> {
    let mut seen = BTreeSet::new();
    for a in actions {
        if !seen.insert(a.name().clone()) {
            return Err(ModelError::DuplicateAction(a.name().as_str().into()));
        }
    }
    let find = |name: &str| actions.iter().find(|a| a.name().as_str() == name);

    let mut out = Vec::new();
    let mut done = BTreeSet::new();
    for a in actions {
        let base = a.base_name();
        if !done.insert(String::from(base)) {
            continue;
        }
        let name = Symbol::new(base);
        match a.kind {
            SnapKind::Plain => out.push(DurativeAction {
                name: name.clone(),
                start: a.clone(),
                end: a.clone(),
                bounds: durations.get(&name).copied().unwrap_or(DurationBounds::INSTANT),
            }),
            SnapKind::Start | SnapKind::End => {
                let start = find(&alloc::format!("{base}_start"));
                let end = find(&alloc::format!("{base}_end"));
                let (Some(start), Some(end)) = (start, end) else {
                    return Err(ModelError::UnpairedSnapAction(a.name().as_str().into()));
                };
                if start.params() != end.params() {
                    return Err(ModelError::SignatureMismatch(base.into()));
                }
                out.push(DurativeAction {
                    name: name.clone(),
                    start: start.clone(),
                    end: end.clone(),
                    bounds: durations.get(&name).copied().unwrap_or(DurationBounds::UNIT),
                });
            }
        }
    }
    Ok(out)
}

/// A set of ground fluents in canonical (functor, arity, args) order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(BTreeSet<Term>);

impl State {
    pub fn new() -> Self {
        State(BTreeSet::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, fluent: &Term) -> bool {
        self.0.contains(fluent)
    }

    /// Inserts a ground fluent. Returns false if it was already present.
    pub fn insert(&mut self, fluent: Term) -> bool {
        debug_assert!(fluent.is_ground());
        self.0.insert(fluent)
    }

    pub fn remove(&mut self, fluent: &Term) -> bool {
        self.0.remove(fluent)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Term> + '_ {
        self.0.iter()
    }

    /// Fluents with the given functor and arity, in canonical order.
    pub fn family<'a>(&'a self, functor: &'a Symbol, arity: usize) -> impl Iterator<Item = &'a Term> + 'a {
        let probe = Term::family_lower_bound(functor, arity);
        self.0
            .range(probe..)
            .take_while(move |t| t.functor() == Some(functor) && t.arity() == arity)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a State {
    type Item = &'a Term;
    type IntoIter = alloc::collections::btree_set::Iter<'a, Term>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Builds a [`State`] from ground fluents, dropping duplicates.
pub fn canonical_state<I: IntoIterator<Item = Term>>(fluents: I) -> Result<State, ModelError> {
    let mut state = State::new();
    for fluent in fluents {
        if !fluent.is_ground() || fluent.functor().is_none() {
            return Err(ModelError::NonGroundFluent(fluent));
        }
        state.insert(fluent);
    }
    Ok(state)
}

/// The general KB: ground facts in declaration order with a family index.
#[derive(Clone, Default)]
pub struct KnowledgeBase {
    facts: Vec<Term>,
    index: BTreeMap<(Symbol, usize), Vec<usize>>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        KnowledgeBase::default()
    }

    /// Appends a ground fact unless already present.
    pub fn insert(&mut self, fact: Term) -> bool {
        let Some((f, n)) = fact.family().map(|(f, n)| (f.clone(), n)) else {
            return false;
        };
        let slot = self.index.entry((f, n)).or_default();
        if slot.iter().any(|&i| self.facts[i] == fact) {
            return false;
        }
        slot.push(self.facts.len());
        self.facts.push(fact);
        true
    }

    pub fn facts(&self) -> &[Term] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &Term) -> bool {
        self.family_of(fact).any(|f| f == fact)
    }

    /// Facts of the family, in declaration order.
    pub fn family<'a>(&'a self, functor: &Symbol, arity: usize) -> impl Iterator<Item = &'a Term> + 'a {
        let ids: &[usize] = self
            .index
            .get(&(functor.clone(), arity))
            .map_or(&[], |v| v.as_slice());
        ids.iter().map(move |&i| &self.facts[i])
    }

    pub(crate) fn family_of<'a>(&'a self, pattern: &Term) -> impl Iterator<Item = &'a Term> + 'a {
        let ids: &[usize] = match pattern.family() {
            Some((f, n)) => self.index.get(&(f.clone(), n)).map_or(&[], |v| v.as_slice()),
            None => &[],
        };
        ids.iter().map(move |&i| &self.facts[i])
    }
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
    }
}

impl Eq for KnowledgeBase {}

impl fmt::Debug for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.facts.iter()).finish()
    }
}

impl FromIterator<Term> for KnowledgeBase {
    fn from_iter<I: IntoIterator<Item = Term>>(iter: I) -> Self {
        let mut kb = KnowledgeBase::new();
        for t in iter {
            kb.insert(t);
        }
        kb
    }
}

/// `mapping(HlStartHead, [LlSnapHeads])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mapping {
    pub hl_start_head: Term,
    pub expansion: Vec<Term>,
}

/// `resources(Pattern)`, e.g. `agent(_)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResourcePattern {
    pub pattern: Term,
}

/// Clause locations, kept for diagnostics. Ignored by equality.
#[derive(Clone, Debug, Default)]
pub struct SourceMap {
    pub hl_actions: Vec<(usize, usize)>,
    pub ll_actions: Vec<(usize, usize)>,
    pub mappings: Vec<(usize, usize)>,
    pub resources: Vec<(usize, usize)>,
    pub goal: Option<(usize, usize)>,
    pub init: Option<(usize, usize)>,
    pub durations: BTreeMap<Symbol, (usize, usize)>,
}

#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub general_kb: KnowledgeBase,
    pub init: State,
    /// Goal fluents; wildcards are matched existentially.
    pub goal: Vec<Term>,
    pub hl_actions: Vec<SnapAction>,
    pub ll_actions: Vec<SnapAction>,
    pub mappings: Vec<Mapping>,
    pub resources: Vec<ResourcePattern>,
    pub durations: BTreeMap<Symbol, DurationBounds>,
    pub source: SourceMap,
}

impl PartialEq for Problem {
    fn eq(&self, other: &Self) -> bool {
        self.general_kb == other.general_kb
            && self.init == other.init
            && self.goal == other.goal
            && self.hl_actions == other.hl_actions
            && self.ll_actions == other.ll_actions
            && self.mappings == other.mappings
            && self.resources == other.resources
            && self.durations == other.durations
    }
}

impl Eq for Problem {}

impl Problem {
    pub fn actions(&self, level: Level) -> &[SnapAction] {
        match level {
            Level::High => &self.hl_actions,
            Level::Low => &self.ll_actions,
        }
    }

    pub fn find_action(&self, name: &str) -> Option<&SnapAction> {
        self.hl_actions
            .iter()
            .chain(&self.ll_actions)
            .find(|a| a.name().as_str() == name)
    }

    /// The mapping whose head names the given HL start action.
    pub fn mapping_for(&self, name: &Symbol) -> Option<&Mapping> {
        self.mappings
            .iter()
            .find(|m| m.hl_start_head.functor() == Some(name))
    }

    /// True if the durative action with this base name is refined by a mapping.
    pub fn is_mapped(&self, base: &str) -> bool {
        self.mappings.iter().any(|m| {
            m.hl_start_head
                .functor()
                .is_some_and(|f| base_name(f.as_str()) == base)
        })
    }

    /// Durative actions of both levels with declared or default bounds.
    pub fn durative_actions(&self) -> Result<Vec<DurativeAction>, ModelError> {
        let mut all = pair_with_durations(&self.hl_actions, &self.durations)?;
        all.extend(pair_with_durations(&self.ll_actions, &self.durations)?);
        Ok(all)
    }

    /// Union of two KB files, typically the HL and LL halves. Facts and
    /// fluents keep first-seen order; identical action clauses are kept once.
    pub fn merge(mut self, other: Problem) -> Problem {
        for fact in other.general_kb.facts() {
            self.general_kb.insert(fact.clone());
        }
        for fluent in other.init.iter() {
            self.init.insert(fluent.clone());
        }
        for g in other.goal {
            if !self.goal.contains(&g) {
                self.goal.push(g);
            }
        }
        for (a, pos) in other.hl_actions.into_iter().zip(other.source.hl_actions.iter().copied().chain(core::iter::repeat((0, 0)))) {
            if !self.hl_actions.contains(&a) {
                self.hl_actions.push(a);
                self.source.hl_actions.push(pos);
            }
        }
        for (a, pos) in other.ll_actions.into_iter().zip(other.source.ll_actions.iter().copied().chain(core::iter::repeat((0, 0)))) {
            if !self.ll_actions.contains(&a) {
                self.ll_actions.push(a);
                self.source.ll_actions.push(pos);
            }
        }
        for (m, pos) in other.mappings.into_iter().zip(other.source.mappings.iter().copied().chain(core::iter::repeat((0, 0)))) {
            if !self.mappings.contains(&m) {
                self.mappings.push(m);
                self.source.mappings.push(pos);
            }
        }
        for r in other.resources {
            if !self.resources.contains(&r) {
                self.resources.push(r);
            }
        }
        for (name, d) in other.durations {
            self.durations.entry(name).or_insert(d);
        }
        if self.source.init.is_none() {
            self.source.init = other.source.init;
        }
        if self.source.goal.is_none() {
            self.source.goal = other.source.goal;
        }
        self
    }
}

/// Where a plan step came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Chosen by the high-level search.
    HighLevel,
    /// Inserted by the mapping of the HL start at plan index `parent`;
    /// `position` is the index within the mapping's expansion list.
    Mapped { parent: usize, position: usize },
}

/// A ground snap action in a total-order plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanStep {
    pub head: Term,
    pub level: Level,
    pub kind: SnapKind,
    /// Index into `Problem::hl_actions` or `Problem::ll_actions` per `level`.
    pub action: usize,
    pub bindings: Bindings,
    pub origin: Origin,
}

/// A sequential plan. The virtual `init()`/`end()` steps are not stored;
/// they are added by enabler extraction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TOPlan {
    pub steps: Vec<PlanStep>,
}

impl TOPlan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn heads(&self) -> Vec<Term> {
        self.steps.iter().map(|s| s.head.clone()).collect()
    }

    /// Numbered listing, one `[i] head` line per step.
    pub fn listing(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "[{i}] {}", s.head);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;
    use alloc::vec;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn snap(head: &str) -> SnapAction {
        SnapAction::new(t(head), vec![], vec![], vec![], vec![], Level::Low)
    }

    #[test]
    fn pairs_move_arm() {
        let acts = [snap("move_arm_start(A,X,Y)"), snap("move_arm_end(A,X,Y)")];
        let da = pair_snap_actions(&acts).unwrap();
        assert_eq!(da.len(), 1);
        assert_eq!(da[0].name.as_str(), "move_arm");
        assert_eq!(da[0].bounds, DurationBounds::UNIT);
    }

    #[test]
    fn empty_pairs_to_empty() {
        assert!(pair_snap_actions(&[]).unwrap().is_empty());
    }

    #[test]
    fn unpaired_and_mismatch() {
        assert_eq!(
            pair_snap_actions(&[snap("grip_start(A)")]),
            Err(ModelError::UnpairedSnapAction("grip_start".into()))
        );
        assert_eq!(
            pair_snap_actions(&[snap("grip_start(A)"), snap("grip_end(B)")]),
            Err(ModelError::SignatureMismatch("grip".into()))
        );
    }

    #[test]
    fn plain_action_is_instant() {
        let da = pair_snap_actions(&[snap("beep(A)")]).unwrap();
        assert_eq!(da[0].start, da[0].end);
        assert_eq!(da[0].bounds, DurationBounds::INSTANT);
    }

    #[test]
    fn canonical_state_dedups_and_sorts() {
        let s = canonical_state([t("at(b1,1,1)"), t("at(b1,1,1)")]).unwrap();
        assert_eq!(s.len(), 1);
        let a = canonical_state([t("clear(b2)"), t("clear(b1)")]).unwrap();
        let b = canonical_state([t("clear(b1)"), t("clear(b2)")]).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            canonical_state([t("at(b1,X,1)")]),
            Err(ModelError::NonGroundFluent(_))
        ));
    }

    #[test]
    fn state_family_range() {
        let s = canonical_state([t("at(b1,1,1)"), t("at(b2,3,1)"), t("at(x)"), t("clear(b1)"), t("b")]).unwrap();
        let at = Symbol::new("at");
        let fam: Vec<_> = s.family(&at, 3).cloned().collect();
        assert_eq!(fam, vec![t("at(b1,1,1)"), t("at(b2,3,1)")]);
        assert_eq!(s.family(&Symbol::new("b"), 0).count(), 1);
    }

    #[test]
    fn kb_keeps_declaration_order() {
        let kb: KnowledgeBase = [t("pos(3,1)"), t("pos(1,1)"), t("pos(3,1)")].into_iter().collect();
        assert_eq!(kb.facts(), &[t("pos(3,1)"), t("pos(1,1)")]);
    }
}
