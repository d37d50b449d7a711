//! Logic terms, symbols and literals.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// An interned-by-reference name: functors, atoms and variable names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(name: &str) -> Self {
        Symbol::new(name)
    }
}

impl From<String> for Symbol {
    fn from(name: String) -> Self {
        Symbol(Arc::from(name))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A first-order term.
///
/// Atoms are compounds of arity zero: [`Term::compound`] with no arguments
/// always produces [`Term::Atom`], so a functor/arity pair has exactly one
/// representation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Atom(Symbol),
    Var(Symbol),
    Wildcard,
    Compound(Symbol, Vec<Term>),
}

impl Term {
    pub fn int(value: i64) -> Self {
        Term::Int(value)
    }

    pub fn atom(name: &str) -> Self {
        Term::Atom(Symbol::new(name))
    }

    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    pub fn compound(functor: impl Into<Symbol>, args: Vec<Term>) -> Self {
        let functor = functor.into();
        if args.is_empty() {
            Term::Atom(functor)
        } else {
            Term::Compound(functor, args)
        }
    }

    /// Functor of an atom or compound; `None` for integers and variables.
    pub fn functor(&self) -> Option<&Symbol> {
        match self {
            Term::Atom(name) | Term::Compound(name, _) => Some(name),
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Term::Compound(_, args) => args.len(),
            _ => 0,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    /// `(functor, arity)` for callable terms.
    pub fn family(&self) -> Option<(&Symbol, usize)> {
        self.functor().map(|f| (f, self.arity()))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Int(_) | Term::Atom(_) => true,
            Term::Var(_) | Term::Wildcard => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn has_variables(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Compound(_, args) => args.iter().any(Term::has_variables),
            _ => false,
        }
    }

    /// Appends the variables of the term to `out` in order of first
    /// appearance, skipping names already present.
    pub fn collect_variables(&self, out: &mut Vec<Symbol>) {
        match self {
            Term::Var(name) => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            Term::Compound(_, args) => {
                for arg in args {
                    arg.collect_variables(out);
                }
            }
            _ => {}
        }
    }

    pub fn variables(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    /// Lowest-ranked term of the given family under [`Ord`]; used as a
    /// range probe into sorted fluent sets.
    pub(crate) fn family_lower_bound(functor: &Symbol, arity: usize) -> Term {
        if arity == 0 {
            Term::Atom(functor.clone())
        } else {
            Term::Compound(functor.clone(), alloc::vec![Term::Int(i64::MIN); arity])
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Term::Int(_) => 0,
            Term::Atom(_) | Term::Compound(_, _) => 1,
            Term::Var(_) => 2,
            Term::Wildcard => 3,
        }
    }
}

// Callable terms sort by (functor, arity, args) so a fluent family is a
// contiguous range of any sorted collection.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.rank().cmp(&other.rank()) {
            Ordering::Equal => {}
            unequal => return unequal,
        }
        match (self, other) {
            (Term::Int(a), Term::Int(b)) => a.cmp(b),
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Wildcard, Term::Wildcard) => Ordering::Equal,
            _ => {
                let (fa, fb) = (self.functor().unwrap(), other.functor().unwrap());
                fa.cmp(fb)
                    .then_with(|| self.arity().cmp(&other.arity()))
                    .then_with(|| self.args().cmp(other.args()))
            }
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Atom(name) | Term::Var(name) => f.write_str(name.as_str()),
            Term::Wildcard => f.write_str("_"),
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Renders a term without spaces after commas, e.g. `agent(a1)`.
pub struct Compact<'a>(pub &'a Term);

impl fmt::Display for Compact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", Compact(arg))?;
                }
                f.write_str(")")
            }
            other => write!(f, "{other}"),
        }
    }
}

/// A fluent or its negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub term: Term,
    pub positive: bool,
}

impl Literal {
    pub fn pos(term: Term) -> Self {
        Literal { term, positive: true }
    }

    pub fn neg(term: Term) -> Self {
        Literal { term, positive: false }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.term)
        } else {
            write!(f, "\\+{}", self.term)
        }
    }
}
