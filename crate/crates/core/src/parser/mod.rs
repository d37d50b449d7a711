//! The KB text format: a sequence of `.`-terminated clauses.
//!
//! ```text
//! pos(1,1).                       % general KB fact
//! resources(agent(_)).
//! duration(move_arm, 1, 3).       % optional, defaults to (1, 1)
//! init_state([ontable(b1), ...]).
//! goal_state([on(b2,b1), ...]).
//! action(Head, [Pos], [Neg], [Grounding], [Effects]).
//! ll_action(Head, [Pos], [Neg], [Grounding], [Effects]).
//! ll_action(Head, [Pos], [Neg], [], [Grounding], [Effects]).
//! mapping(HlStartHead, [LlSnapHeads]).
//! ```

mod lexer;
mod validate;
mod write;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diagnostic::{Diagnostic, DiagnosticCode as Code};
use crate::model::{
    DurationBounds, Effect, GroundingItem, Level, Mapping, Problem, ResourcePattern, SnapAction,
};
use crate::term::{Symbol, Term};
use lexer::{tokenize, Tok, Token};

pub use validate::validate_kb;
pub use write::serialize_kb;

type Pos = (usize, usize);

#[derive(Clone, Debug)]
enum Ast {
    Int(i64),
    Var(String),
    Wildcard,
    Atom(String),
    Compound(String, Vec<Node>),
    List(Vec<Node>),
    NotEq(Box<Node>, Box<Node>),
}

#[derive(Clone, Debug)]
struct Node {
    ast: Ast,
    pos: Pos,
}

struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    eof: Pos,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map_or(self.eof, |t| (t.line, t.col))
    }

    fn err(&self, msg: String) -> Diagnostic {
        let (l, c) = self.pos();
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(t) => describe(t),
        };
        Diagnostic::error(Code::Syntax, l, c, format!("{msg}, found {found}"))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), Diagnostic> {
        if self.peek() == Some(&want) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    /// item := term [ '\=' term ]
    fn item(&mut self, depth: usize) -> Result<Node, Diagnostic> {
        let lhs = self.term(depth)?;
        if self.peek() == Some(&Tok::NotEq) {
            self.i += 1;
            let rhs = self.term(depth)?;
            let pos = lhs.pos;
            return Ok(Node { ast: Ast::NotEq(Box::new(lhs), Box::new(rhs)), pos });
        }
        Ok(lhs)
    }

    fn term(&mut self, depth: usize) -> Result<Node, Diagnostic> {
        if depth > 64 {
            return Err(self.err("terms nested too deeply".into()));
        }
        let pos = self.pos();
        let Some(tok) = self.peek().cloned() else {
            return Err(self.err("expected a term".into()));
        };
        let ast = match tok {
            Tok::Int(n) => {
                self.i += 1;
                Ast::Int(n)
            }
            Tok::Var(v) => {
                self.i += 1;
                Ast::Var(v)
            }
            Tok::Wildcard => {
                self.i += 1;
                Ast::Wildcard
            }
            Tok::Atom(name) => {
                self.i += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.i += 1;
                    let args = self.seq(Tok::RParen, ")", depth)?;
                    if args.is_empty() {
                        Ast::Atom(name)
                    } else {
                        Ast::Compound(name, args)
                    }
                } else {
                    Ast::Atom(name)
                }
            }
            Tok::LBracket => {
                self.i += 1;
                Ast::List(self.seq(Tok::RBracket, "]", depth)?)
            }
            _ => return Err(self.err("expected a term".into())),
        };
        Ok(Node { ast, pos })
    }

    /// Comma-separated items up to `close`, which is consumed.
    fn seq(&mut self, close: Tok, what: &str, depth: usize) -> Result<Vec<Node>, Diagnostic> {
        let mut items = Vec::new();
        if self.peek() == Some(&close) {
            self.i += 1;
            return Ok(items);
        }
        loop {
            items.push(self.item(depth + 1)?);
            match self.peek() {
                Some(Tok::Comma) => self.i += 1,
                Some(t) if *t == close => {
                    self.i += 1;
                    return Ok(items);
                }
                _ => return Err(self.err(format!("expected `,` or `{what}`"))),
            }
        }
    }

    fn skip_clause(&mut self) {
        while let Some(t) = self.peek() {
            let dot = *t == Tok::Dot;
            self.i += 1;
            if dot {
                break;
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Atom(a) => format!("atom `{a}`"),
        Tok::Var(v) => format!("variable `{v}`"),
        Tok::Wildcard => "`_`".into(),
        Tok::Int(n) => format!("integer {n}"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::NotEq => "`\\=`".into(),
        Tok::Bad(s) if s == ":-" => "`:-` (rules are not supported)".into(),
        Tok::Bad(s) => format!("unexpected `{s}`"),
    }
}

fn err_at(code: Code, pos: Pos, msg: String) -> Diagnostic {
    Diagnostic::error(code, pos.0, pos.1, msg)
}

/// Converts an AST node to a term. Lists and `\=` are rejected.
fn to_term(n: &Node) -> Result<Term, Diagnostic> {
    Ok(match &n.ast {
        Ast::Int(v) => Term::Int(*v),
        Ast::Var(v) => Term::var(v),
        Ast::Wildcard => Term::Wildcard,
        Ast::Atom(a) => Term::atom(a),
        Ast::Compound(f, args) => {
            Term::compound(f.as_str(), args.iter().map(to_term).collect::<Result<_, _>>()?)
        }
        Ast::List(_) => return Err(err_at(Code::Syntax, n.pos, "a list is not allowed here".into())),
        Ast::NotEq(..) => {
            return Err(err_at(Code::Syntax, n.pos, "`\\=` is only allowed in grounding lists".into()))
        }
    })
}

fn callable(n: &Node, what: &str) -> Result<Term, Diagnostic> {
    let t = to_term(n)?;
    if t.functor().is_none() {
        return Err(err_at(Code::Syntax, n.pos, format!("{what} must be an atom or compound term, found `{t}`")));
    }
    Ok(t)
}

fn list<'a>(n: &'a Node, what: &str) -> Result<&'a [Node], Diagnostic> {
    match &n.ast {
        Ast::List(items) => Ok(items),
        _ => Err(err_at(Code::Syntax, n.pos, format!("expected a list of {what}"))),
    }
}

fn terms(n: &Node, what: &str) -> Result<Vec<Term>, Diagnostic> {
    list(n, what)?.iter().map(|i| callable(i, what)).collect()
}

fn effects(n: &Node) -> Result<Vec<Effect>, Diagnostic> {
    let mut out = Vec::new();
    for item in list(n, "effects")? {
        let t = to_term(item)?;
        let eff = match (t.functor().map(Symbol::as_str), t.args()) {
            (Some("add"), [l]) if l.functor().is_some() => Effect::add(l.clone()),
            (Some("del"), [l]) if l.functor().is_some() => Effect::del(l.clone()),
            _ => {
                return Err(err_at(Code::Syntax, item.pos, format!("expected `add(Fluent)` or `del(Fluent)`, found `{t}`")))
            }
        };
        out.push(eff);
    }
    Ok(out)
}

fn grounding(n: &Node) -> Result<Vec<GroundingItem>, Diagnostic> {
    let mut out = Vec::new();
    for item in list(n, "grounding predicates")? {
        match &item.ast {
            Ast::NotEq(a, b) => match (&a.ast, &b.ast) {
                (Ast::Var(x), Ast::Var(y)) => {
                    out.push(GroundingItem::Distinct(Symbol::new(x), Symbol::new(y)))
                }
                _ => {
                    return Err(err_at(Code::Syntax, item.pos, "`\\=` must relate two variables".into()))
                }
            },
            _ => out.push(GroundingItem::Pattern(callable(item, "grounding predicate")?)),
        }
    }
    Ok(out)
}

/// Checks that effect variables are bound by head, grounding or a positive
/// precondition.
fn check_effect_vars(a: &SnapAction, pos: Pos) -> Result<(), Diagnostic> {
    let mut known = a.variables();
    for p in &a.pos_pre {
        p.collect_variables(&mut known);
    }
    for e in &a.effects {
        if e.literal.has_wildcard() {
            return Err(err_at(Code::UnboundEffectVariable, pos, format!("effect `{e}` of `{}` contains `_`", a.name())));
        }
        for v in e.literal.variables() {
            if !known.contains(&v) {
                return Err(err_at(
                    Code::UnboundEffectVariable,
                    pos,
                    format!("variable `{v}` in effect `{e}` of `{}` is not bound by the head, grounding list or preconditions", a.name()),
                ));
            }
        }
    }
    Ok(())
}

struct Builder {
    problem: Problem,
    diags: Vec<Diagnostic>,
}

impl Builder {
    fn clause(&mut self, n: &Node) -> Result<(), Diagnostic> {
        let (name, args): (&str, &[Node]) = match &n.ast {
            Ast::Compound(f, args) => (f, args),
            Ast::Atom(a) => (a, &[]),
            _ => return Err(err_at(Code::Syntax, n.pos, "a clause must be an atom or compound term".into())),
        };
        let p = &mut self.problem;
        match (name, args.len()) {
            ("init_state", 1) => {
                if p.source.init.is_some() {
                    return Err(err_at(Code::DuplicateSection, n.pos, "second `init_state` clause".into()));
                }
                p.source.init = Some(n.pos);
                for item in list(&args[0], "fluents")? {
                    let t = callable(item, "fluent")?;
                    if !t.is_ground() {
                        return Err(err_at(Code::NonGroundFluent, item.pos, format!("initial fluent `{t}` is not ground")));
                    }
                    p.init.insert(t);
                }
            }
            ("goal_state", 1) => {
                if p.source.goal.is_some() {
                    return Err(err_at(Code::DuplicateSection, n.pos, "second `goal_state` clause".into()));
                }
                p.source.goal = Some(n.pos);
                for item in list(&args[0], "fluents")? {
                    let t = callable(item, "fluent")?;
                    if t.has_variables() {
                        return Err(err_at(Code::NonGroundFluent, item.pos, format!("goal fluent `{t}` contains a variable; use `_`")));
                    }
                    if !p.goal.contains(&t) {
                        p.goal.push(t);
                    }
                }
            }
            ("action", 5) | ("ll_action", 5) | ("ll_action", 6) => {
                let level = if name == "action" { Level::High } else { Level::Low };
                let head = callable(&args[0], "action head")?;
                if head.has_wildcard() {
                    return Err(err_at(Code::Syntax, args[0].pos, "action head may not contain `_`".into()));
                }
                let pos_pre = terms(&args[1], "preconditions")?;
                let neg_pre = terms(&args[2], "preconditions")?;
                let slot = args.len() == 6;
                if slot && !list(&args[3], "end conditions")?.is_empty() {
                    return Err(err_at(
                        Code::Syntax,
                        args[3].pos,
                        "end-condition list is not supported and must be empty".into(),
                    ));
                }
                let g = grounding(&args[args.len() - 2])?;
                let eff = effects(&args[args.len() - 1])?;
                let mut a = SnapAction::new(head, pos_pre, neg_pre, g, eff, level);
                a.end_condition_slot = slot;
                check_effect_vars(&a, n.pos)?;
                match level {
                    Level::High => {
                        p.hl_actions.push(a);
                        p.source.hl_actions.push(n.pos);
                    }
                    Level::Low => {
                        p.ll_actions.push(a);
                        p.source.ll_actions.push(n.pos);
                    }
                }
            }
            ("mapping", 2) => {
                let head = callable(&args[0], "mapping head")?;
                let expansion = terms(&args[1], "snap-action heads")?;
                p.mappings.push(Mapping { hl_start_head: head, expansion });
                p.source.mappings.push(n.pos);
            }
            ("resources", 1) | ("resource", 1) => {
                let pattern = callable(&args[0], "resource pattern")?;
                let r = ResourcePattern { pattern };
                if !p.resources.contains(&r) {
                    p.resources.push(r);
                    p.source.resources.push(n.pos);
                }
            }
            ("duration", 3) => {
                let name = match &args[0].ast {
                    Ast::Atom(a) => Symbol::new(a),
                    _ => return Err(err_at(Code::InvalidDuration, args[0].pos, "duration name must be an atom".into())),
                };
                let min = match args[1].ast {
                    Ast::Int(v) if v >= 0 => v as u64,
                    _ => return Err(err_at(Code::InvalidDuration, args[1].pos, "minimum duration must be a non-negative integer".into())),
                };
                let max = match &args[2].ast {
                    Ast::Int(v) if *v >= 0 => Some(*v as u64),
                    Ast::Atom(a) if a == "inf" => None,
                    _ => return Err(err_at(Code::InvalidDuration, args[2].pos, "maximum duration must be a non-negative integer or `inf`".into())),
                };
                if p.durations.contains_key(&name) {
                    return Err(err_at(Code::DuplicateSection, n.pos, format!("second duration for `{name}`")));
                }
                p.source.durations.insert(name.clone(), n.pos);
                p.durations.insert(name, DurationBounds::new(min, max));
            }
            ("init_state" | "goal_state" | "action" | "ll_action" | "mapping" | "resources" | "resource" | "duration", k) => {
                return Err(err_at(Code::UnknownClause, n.pos, format!("unknown clause `{name}/{k}`")));
            }
            _ => {
                let t = to_term(n)?;
                if !t.is_ground() {
                    return Err(err_at(Code::NonGroundFluent, n.pos, format!("general KB fact `{t}` is not ground")));
                }
                p.general_kb.insert(t);
            }
        }
        Ok(())
    }
}

/// Parses KB text. Errors prevent construction of the problem; parsing
/// recovers at the next `.` so that all errors are reported.
pub fn parse_kb(text: &str) -> Result<Problem, Vec<Diagnostic>> {
    let toks = tokenize(text);
    let eof = end_position(text);
    let mut parser = Parser { toks: &toks, i: 0, eof };
    let mut b = Builder { problem: Problem::default(), diags: Vec::new() };

    while parser.peek().is_some() {
        let start = parser.i;
        let res = parser.term(0).and_then(|n| {
            parser.expect(Tok::Dot, "`.` at end of clause")?;
            Ok(n)
        });
        match res {
            Ok(node) => {
                if let Err(d) = b.clause(&node) {
                    b.diags.push(d);
                }
            }
            Err(d) => {
                b.diags.push(d);
                if parser.i == start || parser.toks[parser.i.min(parser.toks.len() - 1)].tok != Tok::Dot {
                    parser.skip_clause();
                } else {
                    parser.i += 1;
                }
            }
        }
    }
    if b.diags.iter().any(Diagnostic::is_error) {
        b.diags.sort_by_key(|d| (d.line, d.column));
        return Err(b.diags);
    }
    Ok(b.problem)
}

fn end_position(text: &str) -> Pos {
    let line = 1 + text.matches('\n').count();
    let col = 1 + text.rsplit('\n').next().map_or(0, |l| l.chars().count());
    (line, col)
}

/// Parses a single term, without a trailing `.`.
pub fn parse_term(text: &str) -> Result<Term, Diagnostic> {
    let toks = tokenize(text);
    let mut parser = Parser { toks: &toks, i: 0, eof: end_position(text) };
    let node = parser.term(0)?;
    if parser.peek().is_some() {
        return Err(parser.err("expected end of term".into()));
    }
    to_term(&node)
}

impl Term {
    pub(crate) fn has_wildcard(&self) -> bool {
        match self {
            Term::Wildcard => true,
            Term::Compound(_, args) => args.iter().any(Term::has_wildcard),
            _ => false,
        }
    }
}
