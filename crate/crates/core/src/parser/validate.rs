use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::diagnostic::{Diagnostic, DiagnosticCode as Code};
use crate::model::{pair_with_durations, base_name, EffectOp, GroundingItem, Level, ModelError, Problem, SnapAction, SnapKind};
use crate::term::Symbol;

/// Static checks over a parsed problem. Errors make the problem unusable for
/// planning; warnings flag likely modelling mistakes.
pub fn validate_kb(p: &Problem) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let hl_pos = |i: usize| p.source.hl_actions.get(i).copied().unwrap_or((0, 0));
    let ll_pos = |i: usize| p.source.ll_actions.get(i).copied().unwrap_or((0, 0));
    let action_pos = |a: &SnapAction| {
        let (list, pos): (&[SnapAction], &dyn Fn(usize) -> (usize, usize)) = match a.level {
            Level::High => (&p.hl_actions, &hl_pos),
            Level::Low => (&p.ll_actions, &ll_pos),
        };
        list.iter().position(|b| b == a).map_or((0, 0), pos)
    };
    let by_name = |level: Level, name: &str| p.actions(level).iter().find(|a| a.name().as_str() == name);

    // Snap pairing per level.
    for level in [Level::High, Level::Low] {
        if let Err(e) = pair_with_durations(p.actions(level), &p.durations) {
            let (code, name) = match &e {
                ModelError::UnpairedSnapAction(n) => (Code::UnpairedSnapAction, n.clone()),
                ModelError::SignatureMismatch(n) => (Code::SignatureMismatch, format!("{n}_start")),
                ModelError::DuplicateAction(n) => (Code::DuplicateAction, n.clone()),
                ModelError::NonGroundFluent(_) => unreachable!(),
            };
            let pos = by_name(level, &name).map_or((0, 0), action_pos);
            out.push(Diagnostic::error(code, pos.0, pos.1, format!("{e}")));
        }
    }

    // Level disjointness, compared on durative base names.
    let hl_bases: BTreeSet<&str> = p.hl_actions.iter().map(SnapAction::base_name).collect();
    for (i, a) in p.ll_actions.iter().enumerate() {
        if hl_bases.contains(a.base_name()) {
            let pos = ll_pos(i);
            out.push(Diagnostic::error(
                Code::DuplicateAction,
                pos.0,
                pos.1,
                format!("`{}` is declared as both a high-level and a low-level action", a.base_name()),
            ));
        }
    }

    // Mappings.
    for (i, m) in p.mappings.iter().enumerate() {
        let pos = p.source.mappings.get(i).copied().unwrap_or((0, 0));
        let name = m.hl_start_head.functor().map(Symbol::as_str).unwrap_or("");
        match by_name(Level::High, name) {
            Some(a) if a.kind == SnapKind::Start && a.params().len() == m.hl_start_head.arity() => {}
            _ => out.push(Diagnostic::error(
                Code::UnknownMappingSource,
                pos.0,
                pos.1,
                format!("mapping head `{}` is not a declared high-level start action", m.hl_start_head),
            )),
        }
        if p.mappings[..i].iter().any(|o| o.hl_start_head.functor() == m.hl_start_head.functor()) {
            out.push(Diagnostic::error(
                Code::DuplicateAction,
                pos.0,
                pos.1,
                format!("second mapping for `{name}`"),
            ));
        }
        let head_vars = m.hl_start_head.variables();
        for target in &m.expansion {
            let tname = target.functor().map(Symbol::as_str).unwrap_or("");
            match by_name(Level::Low, tname) {
                Some(a) if a.params().len() == target.arity() => {}
                _ => out.push(Diagnostic::error(
                    Code::UnknownMappingTarget,
                    pos.0,
                    pos.1,
                    format!("mapping target `{target}` is not a declared low-level action"),
                )),
            }
            for v in target.variables() {
                if !head_vars.contains(&v) {
                    out.push(Diagnostic::error(
                        Code::MappingVariables,
                        pos.0,
                        pos.1,
                        format!("variable `{v}` of `{target}` does not occur in the mapping head"),
                    ));
                }
            }
            if target.has_wildcard() {
                out.push(Diagnostic::error(
                    Code::MappingVariables,
                    pos.0,
                    pos.1,
                    format!("mapping target `{target}` contains `_`"),
                ));
            }
        }
    }

    // Per-action variable checks.
    for a in p.hl_actions.iter().chain(&p.ll_actions) {
        let pos = action_pos(a);
        let mut bound: Vec<Symbol> = Vec::new();
        // Low-level heads are bound by the mapping before grounding runs.
        if a.level == Level::Low {
            a.head.collect_variables(&mut bound);
        }
        for item in &a.grounding {
            match item {
                GroundingItem::Pattern(t) => t.collect_variables(&mut bound),
                GroundingItem::Distinct(x, y) => {
                    for v in [x, y] {
                        if !bound.contains(v) {
                            out.push(Diagnostic::error(
                                Code::UnboundDisequality,
                                pos.0,
                                pos.1,
                                format!("`{x} \\= {y}` in `{}`: `{v}` is not bound by an earlier grounding predicate", a.name()),
                            ));
                        }
                    }
                }
            }
        }
        let known = a.variables();
        let mut pos_vars = known.clone();
        for t in &a.pos_pre {
            for v in t.variables() {
                if !known.contains(&v) {
                    out.push(Diagnostic::warning(
                        Code::FreePreconditionVariable,
                        pos.0,
                        pos.1,
                        format!("variable `{v}` of precondition `{t}` in `{}` is bound only by the state", a.name()),
                    ));
                }
                if !pos_vars.contains(&v) {
                    pos_vars.push(v);
                }
            }
        }
        for t in &a.neg_pre {
            for v in t.variables() {
                if !pos_vars.contains(&v) {
                    out.push(Diagnostic::warning(
                        Code::FreePreconditionVariable,
                        pos.0,
                        pos.1,
                        format!("variable `{v}` of negative precondition `{t}` in `{}` is never bound and acts as `_`", a.name()),
                    ));
                }
            }
        }
    }

    // Durations.
    let all_bases: BTreeSet<&str> = p
        .hl_actions
        .iter()
        .chain(&p.ll_actions)
        .map(|a| base_name(a.name().as_str()))
        .collect();
    for (name, d) in &p.durations {
        let pos = p.source.durations.get(name).copied().unwrap_or((0, 0));
        if !d.is_valid() {
            out.push(Diagnostic::error(
                Code::InvalidDuration,
                pos.0,
                pos.1,
                format!("duration of `{name}` has minimum greater than maximum"),
            ));
        }
        if !all_bases.contains(name.as_str()) {
            out.push(Diagnostic::error(
                Code::InvalidDuration,
                pos.0,
                pos.1,
                format!("duration given for unknown action `{name}`"),
            ));
        }
    }

    // Fluent functors that the dynamics can produce or remove.
    let mut added: BTreeSet<&str> = BTreeSet::new();
    let mut touched: BTreeSet<&str> = BTreeSet::new();
    for a in p.hl_actions.iter().chain(&p.ll_actions) {
        for e in &a.effects {
            let f = e.literal.functor().map(Symbol::as_str).unwrap_or("");
            touched.insert(f);
            if e.op == EffectOp::Add {
                added.insert(f);
            }
        }
    }
    let in_init: BTreeSet<&str> = p.init.iter().filter_map(|t| t.functor().map(Symbol::as_str)).collect();

    let gpos = p.source.goal.unwrap_or((0, 0));
    for g in &p.goal {
        let f = g.functor().map(Symbol::as_str).unwrap_or("");
        if !added.contains(f) && !in_init.contains(f) {
            out.push(Diagnostic::warning(
                Code::UnreachableGoalFluent,
                gpos.0,
                gpos.1,
                format!("goal fluent `{g}`: no action adds `{f}` and it is not in the initial state"),
            ));
        }
    }

    for a in p.hl_actions.iter().chain(&p.ll_actions) {
        let pos = action_pos(a);
        for n in &a.neg_pre {
            let f = n.functor().map(Symbol::as_str).unwrap_or("");
            if !touched.contains(f) && !in_init.contains(f) {
                out.push(Diagnostic::warning(
                    Code::UnusedNegativePrecondition,
                    pos.0,
                    pos.1,
                    format!("negative precondition `{n}` of `{}` can never be present", a.name()),
                ));
            }
        }
    }

    for (i, r) in p.resources.iter().enumerate() {
        if p.general_kb.family_of(&r.pattern).all(|f| crate::unify::match_term(&r.pattern, f, &crate::Bindings::new()).is_none()) {
            let pos = p.source.resources.get(i).copied().unwrap_or((0, 0));
            out.push(Diagnostic::warning(
                Code::EmptyResourceType,
                pos.0,
                pos.1,
                format!("resource pattern `{}` matches no general KB fact", r.pattern),
            ));
        }
    }

    out.sort_by_key(|d| (d.line, d.column, d.code));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_kb;

    fn codes(src: &str) -> Vec<Code> {
        validate_kb(&parse_kb(src).unwrap()).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn unknown_mapping_target() {
        let c = codes("action(foo_start(A), [], [], [agent(A)], []).\naction(foo_end(A), [], [], [agent(A)], []).\nagent(a1).\nmapping(foo_start(A), [bar_start(A)]).");
        assert_eq!(c, [Code::UnknownMappingTarget]);
    }

    #[test]
    fn unpaired_and_unbound_diseq() {
        let c = codes("block(b).\naction(grip_start(A), [], [], [block(A), A \\= B], []).");
        assert!(c.contains(&Code::UnpairedSnapAction));
        assert!(c.contains(&Code::UnboundDisequality));
    }

    #[test]
    fn unreachable_goal_and_empty_resource() {
        let c = codes("resources(agent(_)).\ngoal_state([on(b2,b1)]).");
        assert_eq!(c, [Code::EmptyResourceType, Code::UnreachableGoalFluent]);
    }

    #[test]
    fn bad_duration() {
        let c = codes("action(go_start(A), [], [], [p(A)], []). action(go_end(A), [], [], [p(A)], []). p(a). duration(go, 3, 1).");
        assert_eq!(c, [Code::InvalidDuration]);
    }
}
