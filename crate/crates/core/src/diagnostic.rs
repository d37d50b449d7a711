//! Parser and validator diagnostics.

use alloc::string::String;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticCode {
    Syntax,
    UnknownClause,
    DuplicateSection,
    UnboundEffectVariable,
    NonGroundFluent,
    DuplicateAction,
    UnpairedSnapAction,
    SignatureMismatch,
    UnknownMappingSource,
    UnknownMappingTarget,
    MappingVariables,
    UnboundDisequality,
    InvalidDuration,
    UnreachableGoalFluent,
    UnusedNegativePrecondition,
    FreePreconditionVariable,
    EmptyResourceType,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Syntax => "Syntax",
            DiagnosticCode::UnknownClause => "UnknownClause",
            DiagnosticCode::DuplicateSection => "DuplicateSection",
            DiagnosticCode::UnboundEffectVariable => "UnboundEffectVariable",
            DiagnosticCode::NonGroundFluent => "NonGroundFluent",
            DiagnosticCode::DuplicateAction => "DuplicateAction",
            DiagnosticCode::UnpairedSnapAction => "UnpairedSnapAction",
            DiagnosticCode::SignatureMismatch => "SignatureMismatch",
            DiagnosticCode::UnknownMappingSource => "UnknownMappingSource",
            DiagnosticCode::UnknownMappingTarget => "UnknownMappingTarget",
            DiagnosticCode::MappingVariables => "MappingVariables",
            DiagnosticCode::UnboundDisequality => "UnboundDisequality",
            DiagnosticCode::InvalidDuration => "InvalidDuration",
            DiagnosticCode::UnreachableGoalFluent => "UnreachableGoalFluent",
            DiagnosticCode::UnusedNegativePrecondition => "UnusedNegativePrecondition",
            DiagnosticCode::FreePreconditionVariable => "FreePreconditionVariable",
            DiagnosticCode::EmptyResourceType => "EmptyResourceType",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A located message. Line and column are 1-based; 0 means unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub code: DiagnosticCode,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagnosticCode, line: usize, column: usize, message: String) -> Self {
        Diagnostic { severity: Severity::Error, line, column, code, message }
    }

    pub fn warning(code: DiagnosticCode, line: usize, column: usize, message: String) -> Self {
        Diagnostic { severity: Severity::Warning, line, column, code, message }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}:{}: {sev}[{}]: {}", self.line, self.column, self.code, self.message)
    }
}
