use std::fmt;

/// Severity of a [`Diagnostic`]. The language only reports errors today.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
}

/// A user-facing error tied to a source line.
///
/// The rendered message already contains the line number, so `Display`
/// prints the message verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
}

impl Diagnostic {
    fn error(message: String, line: usize) -> Self {
        Self {
            severity: Severity::Error,
            message,
            line,
        }
    }

    pub fn syntax(line: usize) -> Self {
        Self::error(format!("syntax error at/near line {line}"), line)
    }

    pub fn undeclared(name: &str, line: usize) -> Self {
        Self::error(format!("undeclared variable '{name}' at line {line}"), line)
    }

    pub fn unsupported(what: &str, line: usize) -> Self {
        Self::error(format!("unsupported construct '{what}' at line {line}"), line)
    }

    pub fn division_by_zero(line: usize) -> Self {
        Self::error(format!("division by zero at line {line}"), line)
    }

    pub fn step_limit(limit: u64, line: usize) -> Self {
        Self::error(
            format!("step limit of {limit} exceeded at line {line}"),
            line,
        )
    }

    /// Resource exhaustion, e.g. a literal or intermediate value that no
    /// longer fits in a molecule count.
    pub fn insufficient_memory(line: usize) -> Self {
        Self::error(format!("insufficient memory at line {line}"), line)
    }

    /// An error not tied to a source line, e.g. a bad option value.
    pub fn other(message: impl fmt::Display) -> Self {
        Self::error(message.to_string(), 0)
    }

    pub fn internal(message: impl fmt::Display) -> Self {
        Self::error(format!("internal error: {message}"), 0)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Diagnostic {}
