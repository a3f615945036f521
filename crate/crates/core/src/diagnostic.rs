use std::fmt;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: u32,
    pub column: u32,
}

impl Location {
    pub fn new(line: u32, column: u32) -> Location {
        Location { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Source range; `start <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub start: Location,
    pub end: Location,
}

impl SourceSpan {
    pub fn new(start: Location, end: Location) -> SourceSpan {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }

    pub fn to(self, other: SourceSpan) -> SourceSpan {
        SourceSpan::new(self.start, other.end.max(self.start))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Stable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Code {
    // lexing and parsing
    LexError,
    SyntaxError,
    DupModifier,
    // model validation
    BadIdent,
    DupName,
    UndeclaredRef,
    DupTransition,
    MultipleInitial,
    // rules
    DupRule,
    NestedRepl,
    MixedForm,
    UnboundRhsVar,
    AmbiguousCorrespondence,
    BadReplacement,
    // rewriting
    Dangling,
    NameCollision,
    InvalidResult,
    MaxIterExceeded,
    AllMatchesBlocked,
    // flattening and execution
    NoUniqueInitial,
    MultipleTopInitial,
    NoTopInitial,
    CompositeTarget,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::LexError => "LEX_ERROR",
            Code::SyntaxError => "SYNTAX_ERROR",
            Code::DupModifier => "DUP_MODIFIER",
            Code::BadIdent => "BAD_IDENT",
            Code::DupName => "DUP_NAME",
            Code::UndeclaredRef => "UNDECLARED_REF",
            Code::DupTransition => "DUP_TRANSITION",
            Code::MultipleInitial => "MULTIPLE_INITIAL",
            Code::DupRule => "DUP_RULE",
            Code::NestedRepl => "NESTED_REPL",
            Code::MixedForm => "MIXED_FORM",
            Code::UnboundRhsVar => "UNBOUND_RHS_VAR",
            Code::AmbiguousCorrespondence => "AMBIGUOUS_CORRESPONDENCE",
            Code::BadReplacement => "BAD_REPLACEMENT",
            Code::Dangling => "DANGLING",
            Code::NameCollision => "NAME_COLLISION",
            Code::InvalidResult => "INVALID_RESULT",
            Code::MaxIterExceeded => "MAX_ITER_EXCEEDED",
            Code::AllMatchesBlocked => "ALL_MATCHES_BLOCKED",
            Code::NoUniqueInitial => "NO_UNIQUE_INITIAL",
            Code::MultipleTopInitial => "MULTIPLE_TOP_INITIAL",
            Code::NoTopInitial => "NO_TOP_INITIAL",
            Code::CompositeTarget => "COMPOSITE_TARGET",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub location: Option<Location>,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>, location: Option<Location>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            location,
        }
    }

    pub fn warning(code: Code, message: impl Into<String>, location: Option<Location>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            location,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Renders as `<file>:<line>:<col>: <severity> <CODE>: <message>`.
    /// Without a location the position part is omitted.
    pub fn render(&self, file: &str) -> String {
        match self.location {
            Some(at) => format!(
                "{file}:{at}: {} {}: {}",
                self.severity, self.code, self.message
            ),
            None => format!("{file}: {} {}: {}", self.severity, self.code, self.message),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(at) = self.location {
            write!(f, "{at}: ")?;
        }
        write!(f, "{} {}: {}", self.severity, self.code, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
