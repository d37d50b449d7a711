//! One-way matching of patterns against ground terms, substitution and
//! grounding enumeration.

use alloc::vec::Vec;
use core::fmt;

use crate::model::{GroundingItem, KnowledgeBase, State};
use crate::term::{Literal, Symbol, Term};

/// Variable bindings, kept as an append-only trail so that backtracking is
/// a truncation.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bindings(Vec<(Symbol, Term)>);

impl Bindings {
    pub fn new() -> Self {
        Bindings(Vec::new())
    }

    pub fn get(&self, var: &Symbol) -> Option<&Term> {
        self.0.iter().find(|(v, _)| v == var).map(|(_, t)| t)
    }

    pub fn get_str(&self, var: &str) -> Option<&Term> {
        self.0.iter().find(|(v, _)| v.as_str() == var).map(|(_, t)| t)
    }

    pub fn is_bound(&self, var: &Symbol) -> bool {
        self.get(var).is_some()
    }

    /// Binds an unbound variable. Binding an already bound variable to a
    /// different value returns false and leaves the bindings unchanged.
    pub fn bind(&mut self, var: Symbol, value: Term) -> bool {
        match self.get(&var) {
            Some(existing) => *existing == value,
            None => {
                self.0.push((var, value));
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn mark(&self) -> usize {
        self.0.len()
    }

    pub(crate) fn undo(&mut self, mark: usize) {
        self.0.truncate(mark);
    }

    /// Bindings in the order they were made.
    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Term)> + '_ {
        self.0.iter().map(|(v, t)| (v, t))
    }
}

impl fmt::Debug for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter().map(|(v, t)| (v, t))).finish()
    }
}

impl<S: Into<Symbol>> FromIterator<(S, Term)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (S, Term)>>(iter: I) -> Self {
        let mut b = Bindings::new();
        for (v, t) in iter {
            b.bind(v.into(), t);
        }
        b
    }
}

/// Matches `pattern` against `ground`, extending `b`.
pub fn match_term(pattern: &Term, ground: &Term, b: &Bindings) -> Option<Bindings> {
    let mut out = b.clone();
    match_in_place(pattern, ground, &mut out).then_some(out)
}

/// Like [`match_term`] but in place; on failure `b` is restored.
pub fn match_in_place(pattern: &Term, ground: &Term, b: &mut Bindings) -> bool {
    let mark = b.mark();
    let ok = match_rec(pattern, ground, b);
    if !ok {
        b.undo(mark);
    }
    ok
}

fn match_rec(pattern: &Term, ground: &Term, b: &mut Bindings) -> bool {
    match pattern {
        Term::Wildcard => true,
        Term::Var(v) => match b.get(v) {
            Some(bound) => bound == ground,
            None => {
                b.0.push((v.clone(), ground.clone()));
                true
            }
        },
        Term::Int(_) | Term::Atom(_) => pattern == ground,
        Term::Compound(f, args) => match ground {
            Term::Compound(g, gargs) if f == g && args.len() == gargs.len() => {
                args.iter().zip(gargs).all(|(p, g)| match_rec(p, g, b))
            }
            _ => false,
        },
    }
}

/// Replaces bound variables; unbound variables and wildcards are kept.
pub fn substitute(t: &Term, b: &Bindings) -> Term {
    match t {
        Term::Var(v) => b.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Compound(f, args) => {
            Term::Compound(f.clone(), args.iter().map(|a| substitute(a, b)).collect())
        }
        _ => t.clone(),
    }
}

/// True if some element of `candidates` matches `pattern` under `b`.
pub(crate) fn any_match<'a>(
    pattern: &Term,
    candidates: impl Iterator<Item = &'a Term>,
    b: &mut Bindings,
) -> bool {
    for c in candidates {
        let mark = b.mark();
        if match_rec(pattern, c, b) {
            b.undo(mark);
            return true;
        }
        b.undo(mark);
    }
    false
}

/// Evaluates a literal in a state. A positive literal extends the bindings
/// with its first match in canonical order; a negative literal holds iff no
/// fluent matches and never binds.
pub fn holds(l: &Literal, s: &State, b: &Bindings) -> (bool, Bindings) {
    let mut out = b.clone();
    let ok = if l.positive {
        holds_pos(&l.term, s, &mut out)
    } else {
        !holds_any(&l.term, s, &mut out)
    };
    (ok, out)
}

/// Positive precondition: binds to the first matching fluent.
pub(crate) fn holds_pos(pattern: &Term, s: &State, b: &mut Bindings) -> bool {
    let Some((f, n)) = pattern.family() else { return false };
    for fluent in s.family(f, n) {
        if match_in_place(pattern, fluent, b) {
            return true;
        }
    }
    false
}

/// Existence of a matching fluent, without binding.
pub(crate) fn holds_any(pattern: &Term, s: &State, b: &mut Bindings) -> bool {
    let Some((f, n)) = pattern.family() else { return false };
    any_match(pattern, s.family(f, n), b)
}

/// Depth-first enumeration of the grounding product in list order, with
/// KB facts tried in declaration order. See [`enumerate_groundings`].
pub struct Groundings<'a, P> {
    items: &'a [GroundingItem],
    kb: &'a KnowledgeBase,
    bindings: Bindings,
    // Per depth: next candidate position and the trail mark on entry.
    stack: Vec<(usize, usize)>,
    prune: P,
    started: bool,
}

/// Lazily yields every extension of `b0` that satisfies all grounding items.
pub fn enumerate_groundings<'a>(
    items: &'a [GroundingItem],
    kb: &'a KnowledgeBase,
    b0: Bindings,
) -> Groundings<'a, fn(usize, &Bindings) -> bool> {
    fn keep(_: usize, _: &Bindings) -> bool {
        true
    }
    enumerate_groundings_pruned(items, kb, b0, keep)
}

/// As [`enumerate_groundings`], but after item `k` is satisfied the partial
/// bindings are passed to `prune(k, &b)`; returning false skips that subtree.
/// Pruning never changes the relative order of surviving results.
pub fn enumerate_groundings_pruned<'a, P: FnMut(usize, &Bindings) -> bool>(
    items: &'a [GroundingItem],
    kb: &'a KnowledgeBase,
    b0: Bindings,
    prune: P,
) -> Groundings<'a, P> {
    Groundings { items, kb, bindings: b0, stack: Vec::new(), prune, started: false }
}

impl<P: FnMut(usize, &Bindings) -> bool> Iterator for Groundings<'_, P> {
    type Item = Bindings;

    fn next(&mut self) -> Option<Bindings> {
        if !self.started {
            self.started = true;
            if self.items.is_empty() {
                return Some(self.bindings.clone());
            }
            self.stack.push((0, self.bindings.mark()));
        }
        while let Some(&(cursor, mark)) = self.stack.last() {
            let depth = self.stack.len() - 1;
            self.bindings.undo(mark);
            let mut found = None;
            match &self.items[depth] {
                GroundingItem::Pattern(p) => {
                    for (pos, fact) in self.kb.family_of(p).enumerate().skip(cursor) {
                        if match_in_place(p, fact, &mut self.bindings) {
                            if (self.prune)(depth, &self.bindings) {
                                found = Some(pos + 1);
                                break;
                            }
                            self.bindings.undo(mark);
                        }
                    }
                }
                GroundingItem::Distinct(x, y) => {
                    if cursor == 0 {
                        let ok = match (self.bindings.get(x), self.bindings.get(y)) {
                            (Some(a), Some(b)) => a != b,
                            // Unbound operands cannot be proven distinct.
                            _ => false,
                        };
                        if ok && (self.prune)(depth, &self.bindings) {
                            found = Some(1);
                        }
                    }
                }
            }
            match found {
                Some(next) => {
                    self.stack.last_mut().unwrap().0 = next;
                    if depth + 1 == self.items.len() {
                        return Some(self.bindings.clone());
                    }
                    let m = self.bindings.mark();
                    self.stack.push((0, m));
                }
                None => {
                    self.stack.pop();
                }
            }
        }
        None
    }
}
