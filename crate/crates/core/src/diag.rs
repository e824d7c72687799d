use std::fmt;

use crate::model::SourcePos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Static-semantics rule number (1-6) when the diagnostic comes from one.
    pub rule: Option<u8>,
    pub pos: SourcePos,
    pub message: String,
}

impl Diagnostic {
    pub fn error(pos: SourcePos, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, rule: None, pos, message: message.into() }
    }

    pub fn warning(pos: SourcePos, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, rule: None, pos, message: message.into() }
    }

    pub fn with_rule(mut self, rule: u8) -> Self {
        self.rule = Some(rule);
        self
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
        match self.rule {
            Some(r) => write!(f, "{sev} rule={r} at {}: {}", self.pos, self.message),
            None => write!(f, "{sev} at {}: {}", self.pos, self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
