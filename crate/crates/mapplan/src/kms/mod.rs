//! Knowledge-base generation and query validation through a chat model.
//!
//! Every model call goes through a [`Transport`]. [`ReplayTransport`]
//! answers from fixture files keyed by a digest of the message list, so the
//! whole pipeline runs offline and deterministically.

mod prompts;
mod transport;

use std::fmt::Write;

use mapplan_core::parser::{parse_kb, validate_kb};
use mapplan_core::{Diagnostic, Level};
use serde::{Deserialize, Serialize};

pub use transport::{
    digest, HttpTransport, RecordingTransport, ReplayTransport, ScriptedTransport, Transport, TransportError,
};

pub const DEFAULT_ACCEPT_MARKER: &str = "QUERIES CONSISTENT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Message { role, content: content.into() }
    }
}

/// System preamble, few-shot exchanges and the query, sent in that order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptBundle {
    pub system: String,
    /// `(user, assistant)` example pairs.
    pub exchanges: Vec<(String, String)>,
    pub query: String,
}

impl PromptBundle {
    pub fn messages(&self) -> Vec<Message> {
        let mut out = vec![Message::new(Role::System, &self.system)];
        for (q, a) in &self.exchanges {
            out.push(Message::new(Role::User, q));
            out.push(Message::new(Role::Assistant, a));
        }
        out.push(Message::new(Role::User, &self.query));
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum KmsError {
    #[error("the {0} query is empty")]
    EmptyQuery(&'static str),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("malformed completion: {0}")]
    MalformedCompletion(String),
    #[error("no fenced code block in the answer for the {0}")]
    Extraction(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    /// The model's explanation, verbatim.
    Rejected(String),
}

pub fn validate_queries(hl: &str, ll: &str, t: &dyn Transport) -> Result<Verdict, KmsError> {
    validate_queries_with(hl, ll, t, DEFAULT_ACCEPT_MARKER)
}

/// Asks the model whether the two task descriptions agree. Accepted iff
/// the last non-empty line of the answer is exactly `marker`.
pub fn validate_queries_with(hl: &str, ll: &str, t: &dyn Transport, marker: &str) -> Result<Verdict, KmsError> {
    if hl.trim().is_empty() {
        return Err(KmsError::EmptyQuery("high-level"));
    }
    if ll.trim().is_empty() {
        return Err(KmsError::EmptyQuery("low-level"));
    }
    let bundle = PromptBundle {
        system: prompts::VALIDATE_SYSTEM.replace("{MARKER}", marker),
        exchanges: vec![(
            prompts::VALIDATE_EXAMPLE_QUERY.to_string(),
            prompts::VALIDATE_EXAMPLE_ANSWER.replace("{MARKER}", marker),
        )],
        query: format!("Abstract description:\n{}\n\nLow-level description:\n{}", hl.trim_end(), ll.trim_end()),
    };
    let answer = t.complete(&bundle.messages())?;
    let text = answer.trim();
    if text.is_empty() {
        return Err(KmsError::MalformedCompletion("empty answer".into()));
    }
    let last = text.lines().rev().map(str::trim).find(|l| !l.is_empty()).unwrap_or_default();
    Ok(if last == marker { Verdict::Accepted } else { Verdict::Rejected(text.to_string()) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One request per level for the complete KB.
    Whole,
    /// One request per KB part, each seeing the parts before it.
    Stepwise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    General,
    InitGoal,
    Actions,
    Mappings,
    Whole,
}

impl Part {
    pub fn describe(self, level: Level) -> &'static str {
        match (self, level) {
            (Part::General, _) => "general knowledge base (the ground facts and resource declarations)",
            (Part::InitGoal, _) => "initial state and goal state",
            (Part::Actions, Level::High) => "high-level actions",
            (Part::Actions, Level::Low) => "low-level actions",
            (Part::Mappings, _) => "mappings from high-level start actions to low-level snap actions",
            (Part::Whole, Level::High) => "complete high-level knowledge base",
            (Part::Whole, Level::Low) => "complete low-level knowledge base, including the mappings",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Part::General => "general",
            Part::InitGoal => "init-goal",
            Part::Actions => "actions",
            Part::Mappings => "mappings",
            Part::Whole => "whole",
        }
    }

    pub fn sequence(mode: Mode, level: Level) -> &'static [Part] {
        match (mode, level) {
            (Mode::Whole, _) => &[Part::Whole],
            (Mode::Stepwise, Level::High) => &[Part::General, Part::InitGoal, Part::Actions],
            (Mode::Stepwise, Level::Low) => &[Part::General, Part::InitGoal, Part::Actions, Part::Mappings],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub level: Level,
    pub part: Part,
    pub text: String,
    /// Parse diagnostics of this fragment on its own.
    pub diagnostics: Vec<Diagnostic>,
}

impl Fragment {
    pub fn accepted(&self) -> bool {
        !self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationSession {
    pub mode: Mode,
    pub fragments: Vec<Fragment>,
    /// Validation of the assembled two-level KB; empty unless every
    /// fragment parsed.
    pub diagnostics: Vec<Diagnostic>,
}

impl GenerationSession {
    pub fn new(mode: Mode) -> Self {
        GenerationSession { mode, fragments: Vec::new(), diagnostics: Vec::new() }
    }

    pub fn kb_text(&self, level: Level) -> String {
        let parts: Vec<&str> = self.fragments.iter().filter(|f| f.level == level).map(|f| f.text.as_str()).collect();
        let mut out = parts.join("\n");
        if !out.is_empty() && !out.ends_with('\n') {
            out.push('\n');
        }
        out
    }

    /// True when every fragment parsed and the assembled KB has no errors.
    pub fn is_clean(&self) -> bool {
        self.fragments.iter().all(Fragment::accepted) && !self.diagnostics.iter().any(Diagnostic::is_error)
    }

    /// Plain-text account of the fragments and their diagnostics.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            Mode::Whole => "whole",
            Mode::Stepwise => "stepwise",
        };
        let _ = writeln!(out, "mode: {mode}");
        for f in &self.fragments {
            let status = if f.accepted() { "ok" } else { "rejected" };
            let _ = writeln!(out, "{}/{}: {} lines, {status}", f.level.as_str(), f.part.label(), f.text.lines().count());
            for d in &f.diagnostics {
                let _ = writeln!(out, "  {d}");
            }
        }
        let _ = writeln!(out, "assembled: {} diagnostics", self.diagnostics.len());
        for d in &self.diagnostics {
            let _ = writeln!(out, "  {d}");
        }
        out
    }
}

/// Text inside all fenced code blocks, in order. `None` if there are none.
pub fn extract_code(answer: &str) -> Option<String> {
    let mut out = String::new();
    let mut inside = false;
    let mut found = false;
    for line in answer.lines() {
        if line.trim_start().starts_with("```") {
            inside = !inside;
            found = true;
            continue;
        }
        if inside {
            out.push_str(line);
            out.push('\n');
        }
    }
    found.then_some(out)
}

/// Natural-language task descriptions for both levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Queries {
    pub hl: String,
    pub ll: String,
}

fn request(level: Level, part: Part, queries: &Queries, session: &GenerationSession) -> PromptBundle {
    let mut q = String::new();
    let (title, text) = match level {
        Level::High => ("Task description", &queries.hl),
        Level::Low => ("Low-level description", &queries.ll),
    };
    let _ = writeln!(q, "{title}:\n{}\n", text.trim_end());
    if level == Level::Low {
        let _ = writeln!(q, "High-level knowledge base:\n```prolog\n{}```\n", session.kb_text(Level::High));
    }
    let done = session.kb_text(level);
    if !done.is_empty() {
        let _ = writeln!(q, "Parts written so far:\n```prolog\n{done}```\n");
    }
    q.push_str(&prompts::part_request(part.describe(level)));
    PromptBundle {
        system: prompts::GENERATE_SYSTEM.to_string(),
        exchanges: vec![(prompts::EXAMPLE_QUERY.to_string(), prompts::EXAMPLE_ANSWER.to_string())],
        query: q,
    }
}

/// Runs the prompt sequence of `session.mode` for the high level, then the
/// low level. Fragments are parsed but never corrected; problems are left
/// in the diagnostics for a human to act on.
pub fn generate_kb(session: &mut GenerationSession, queries: &Queries, t: &dyn Transport) -> Result<(), KmsError> {
    if queries.hl.trim().is_empty() {
        return Err(KmsError::EmptyQuery("high-level"));
    }
    if queries.ll.trim().is_empty() {
        return Err(KmsError::EmptyQuery("low-level"));
    }
    for level in [Level::High, Level::Low] {
        for &part in Part::sequence(session.mode, level) {
            let bundle = request(level, part, queries, session);
            let answer = t.complete(&bundle.messages())?;
            let text = extract_code(&answer)
                .ok_or_else(|| KmsError::Extraction(format!("{} {}", level.as_str(), part.label())))?;
            let diagnostics = match parse_kb(&text) {
                Ok(_) => Vec::new(),
                Err(d) => d,
            };
            session.fragments.push(Fragment { level, part, text, diagnostics });
        }
    }
    session.diagnostics.clear();
    if session.fragments.iter().all(Fragment::accepted) {
        let hl = parse_kb(&session.kb_text(Level::High));
        let ll = parse_kb(&session.kb_text(Level::Low));
        match (hl, ll) {
            (Ok(h), Ok(l)) => session.diagnostics = validate_kb(&h.merge(l)),
            (Err(d), _) | (_, Err(d)) => session.diagnostics = d,
        }
    }
    Ok(())
}
