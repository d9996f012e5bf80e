//! `.bbl` document buffer and `.blg` log.

use std::fmt;

use crate::diag::Severity;

/// Output of a style run. Text accumulates in `pending` until `newline$`
/// moves it into `lines`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BblDocument {
    pub lines: Vec<String>,
    pub pending: String,
}

impl BblDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, text: &str) {
        self.pending.push_str(text);
    }

    /// Moves the buffer into a new line. An empty buffer yields a blank line.
    pub fn flush_line(&mut self) {
        self.lines.push(std::mem::take(&mut self.pending));
    }

    /// Flushes any residue and renders the document with LF endings.
    pub fn finalize(&mut self) -> String {
        if !self.pending.is_empty() {
            self.flush_line();
        }
        self.render()
    }

    /// Text of the flushed lines only.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Warning => write!(f, "Warning--{}", self.message),
            Severity::Error => f.write_str(&self.message),
        }
    }
}

/// Run log in emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlgLog {
    pub records: Vec<LogRecord>,
}

impl BlgLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn log_warning(&mut self, message: impl Into<String>) {
        self.records.push(LogRecord {
            severity: Severity::Warning,
            message: message.into(),
        });
    }

    pub fn log_error(&mut self, message: impl Into<String>) {
        self.records.push(LogRecord {
            severity: Severity::Error,
            message: message.into(),
        });
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.records
            .iter()
            .filter(|r| r.severity == Severity::Warning)
            .map(|r| r.message.as_str())
    }

    pub fn errors(&self) -> impl Iterator<Item = &str> {
        self.records
            .iter()
            .filter(|r| r.severity == Severity::Error)
            .map(|r| r.message.as_str())
    }

    pub fn warning_count(&self) -> usize {
        self.warnings().count()
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    /// `.blg` text: one record per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_accumulates() {
        let mut doc = BblDocument::new();
        doc.append("a");
        doc.append("b");
        doc.append("");
        assert_eq!(doc.pending, "ab");
        assert!(doc.lines.is_empty());
    }

    #[test]
    fn flush_and_blank_lines() {
        let mut doc = BblDocument::new();
        doc.append("abc");
        doc.flush_line();
        assert_eq!(doc.lines, ["abc"]);
        doc.flush_line();
        doc.flush_line();
        assert_eq!(doc.lines, ["abc", "", ""]);
        assert!(doc.pending.is_empty());
    }

    #[test]
    fn finalize_flushes_residue() {
        assert_eq!(BblDocument::new().finalize(), "");
        let mut doc = BblDocument {
            lines: vec!["x".into()],
            pending: "y".into(),
        };
        assert_eq!(doc.finalize(), "x\ny\n");
        assert!(doc.pending.is_empty());
    }

    #[test]
    fn blg_rendering() {
        let mut log = BlgLog::new();
        log.log_warning("`number' is a missing field, not a string, for entry Ulam-1964");
        log.log_error("stack not empty at end of style: [3]");
        assert_eq!(log.warning_count(), 1);
        assert_eq!(log.error_count(), 1);
        assert_eq!(
            log.render(),
            "Warning--`number' is a missing field, not a string, for entry Ulam-1964\nstack not empty at end of style: [3]\n"
        );
    }
}
