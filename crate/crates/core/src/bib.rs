//! `.bib` database parsing.
//!
//! Only the core entry syntax is understood: `@type{key, name = value, ...}`
//! with `"..."`, `{...}` or bare-number values. Anything outside an entry is
//! treated as a comment. `@string`, `@preamble`, `@comment` and `#`
//! concatenation are reported and skipped.

use std::collections::HashMap;

use crate::diag::{LineIndex, ParseDiagnostic};

/// One bibliography entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    /// Always lowercase.
    pub entry_type: String,
    /// Lowercase field names in source order, with normalized values.
    pub fields: Vec<(String, String)>,
}

impl Entry {
    /// Looks up a field by name (case-insensitive). `None` is the missing marker.
    pub fn get_field(&self, name: &str) -> Option<&str> {
        let name = name.to_ascii_lowercase();
        self.fields.iter().find(|(n, _)| *n == name).map(|(_, v)| v.as_str())
    }
}

/// Free-function form of [`Entry::get_field`].
pub fn get_field<'a>(entry: &'a Entry, name: &str) -> Option<&'a str> {
    entry.get_field(name)
}

/// Ordered collection of entries with a key index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Database {
    entries: Vec<Entry>,
    index: HashMap<String, usize>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry unless its key is already present. Returns whether it was added.
    pub fn insert(&mut self, entry: Entry) -> bool {
        if self.index.contains_key(&entry.key) {
            return false;
        }
        self.index.insert(entry.key.clone(), self.entries.len());
        self.entries.push(entry);
        true
    }

    /// Exact, case-sensitive key lookup.
    pub fn lookup(&self, key: &str) -> Option<&Entry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Free-function form of [`Database::lookup`].
pub fn lookup<'a>(db: &'a Database, key: &str) -> Option<&'a Entry> {
    db.lookup(key)
}

/// Trims and collapses every whitespace run to one space.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses raw bytes, reporting invalid UTF-8 as an error.
pub fn parse_bib_bytes(bytes: &[u8], source_name: &str) -> (Database, Vec<ParseDiagnostic>) {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_bib(text, source_name),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = 1 + valid.iter().filter(|&&b| b == b'\n').count();
            let diag = ParseDiagnostic::error(source_name, line, format!("invalid UTF-8 at byte {}", e.valid_up_to()));
            (Database::new(), vec![diag])
        }
    }
}

pub fn parse_bib(text: &str, source_name: &str) -> (Database, Vec<ParseDiagnostic>) {
    let mut parser = BibParser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
        lines: LineIndex::new(text),
        source: source_name,
        diags: Vec::new(),
    };
    let mut db = Database::new();

    while let Some(at) = parser.find_from(parser.pos, b'@') {
        parser.pos = at + 1;
        let entry_line = parser.line();
        match parser.entry() {
            Ok(Some(entry)) => {
                let key = entry.key.clone();
                if !db.insert(entry) {
                    parser.warn(entry_line, format!("duplicate entry key `{key}', later entry dropped"));
                }
            }
            Ok(None) => {}
            Err(BibSyntax { offset, message }) => {
                let line = parser.lines.line_of(offset.min(text.len()));
                parser.diags.push(ParseDiagnostic::error(source_name, line, message));
                parser.pos = parser.resume_point(at + 1);
            }
        }
    }
    (db, parser.diags)
}

struct BibSyntax {
    offset: usize,
    message: String,
}

type PResult<T> = Result<T, BibSyntax>;

struct BibParser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    lines: LineIndex,
    source: &'a str,
    diags: Vec<ParseDiagnostic>,
}

fn is_name_byte(b: u8) -> bool {
    !b.is_ascii_whitespace() && !matches!(b, b'{' | b'}' | b'(' | b')' | b',' | b'=' | b'"' | b'#' | b'@' | b'%')
}

impl<'a> BibParser<'a> {
    fn line(&self) -> usize {
        self.lines.line_of(self.pos.min(self.text.len()))
    }

    fn warn(&mut self, line: usize, message: String) {
        self.diags.push(ParseDiagnostic::warning(self.source, line, message));
    }

    fn syntax<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(BibSyntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn find_from(&self, from: usize, b: u8) -> Option<usize> {
        self.bytes.get(from..)?.iter().position(|&c| c == b).map(|i| from + i)
    }

    /// Next `@` that starts a line (after optional indentation), or end of input.
    fn resume_point(&self, from: usize) -> usize {
        let mut i = from;
        while let Some(at) = self.find_from(i, b'@') {
            let line_start = self.bytes[..at].iter().rposition(|&c| c == b'\n').map_or(0, |p| p + 1);
            if self.bytes[line_start..at].iter().all(|c| c.is_ascii_whitespace()) {
                return at;
            }
            i = at + 1;
        }
        self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn name(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(is_name_byte) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    /// Parses after the `@`. `Ok(None)` means a construct that was skipped.
    fn entry(&mut self) -> PResult<Option<Entry>> {
        let line = self.line();
        self.skip_ws();
        let entry_type = self.name().to_ascii_lowercase();
        self.skip_ws();
        if entry_type.is_empty() || self.peek() != Some(b'{') {
            // An `@` inside comment text, e.g. an email address.
            return Ok(None);
        }
        if matches!(entry_type.as_str(), "string" | "preamble" | "comment") {
            self.warn(line, format!("`@{entry_type}' is not supported, block skipped"));
            self.braced()?;
            return Ok(None);
        }
        self.pos += 1;
        self.skip_ws();
        let key_start = self.pos;
        while self.peek().is_some_and(|b| b != b',' && b != b'}' && b != b'\n') {
            self.pos += 1;
        }
        let key = self.text[key_start..self.pos].trim();
        if key.is_empty() {
            return self.syntax(format!("missing citation key in `@{entry_type}' entry"));
        }
        if key.chars().any(|c| c.is_whitespace() || matches!(c, '{' | '}' | ',')) {
            return self.syntax(format!("invalid citation key `{key}'"));
        }
        let key = key.to_string();
        self.skip_ws();
        let mut fields: Vec<(String, String)> = Vec::new();
        match self.peek() {
            Some(b'}') => {
                self.pos += 1;
                return Ok(Some(Entry {
                    key,
                    entry_type,
                    fields,
                }));
            }
            Some(b',') => self.pos += 1,
            _ => return self.syntax(format!("expected `,' after key `{key}'")),
        }

        loop {
            self.skip_ws();
            match self.peek() {
                None => return self.syntax(format!("unterminated entry `{key}'")),
                Some(b'}') => {
                    self.pos += 1;
                    break;
                }
                _ => {}
            }
            let field_line = self.line();
            let name = self.name().to_ascii_lowercase();
            if name.is_empty() {
                return self.syntax(format!("expected a field name in entry `{key}'"));
            }
            self.skip_ws();
            if self.peek() != Some(b'=') {
                return self.syntax(format!("expected `=' after field `{name}' in entry `{key}'"));
            }
            self.pos += 1;
            self.skip_ws();
            let value = self.value(&key, &name, field_line)?;
            self.skip_ws();
            let mut concatenated = false;
            while self.peek() == Some(b'#') {
                self.pos += 1;
                self.skip_ws();
                self.value(&key, &name, field_line)?;
                self.skip_ws();
                concatenated = true;
            }
            if concatenated {
                self.warn(
                    field_line,
                    format!("`#' concatenation is not supported, field `{name}' of entry `{key}' dropped"),
                );
            } else if let Some(value) = value {
                if fields.iter().any(|(n, _)| *n == name) {
                    self.warn(
                        field_line,
                        format!("repeated field `{name}' in entry `{key}', later value dropped"),
                    );
                } else {
                    fields.push((name.clone(), value));
                }
            }
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {}
                None => return self.syntax(format!("unterminated entry `{key}'")),
                Some(_) => return self.syntax(format!("expected `,' or `}}' after field `{name}' in entry `{key}'")),
            }
        }
        Ok(Some(Entry {
            key,
            entry_type,
            fields,
        }))
    }

    /// One value piece. Bare macro names are reported and yield `None`.
    fn value(&mut self, key: &str, field: &str, line: usize) -> PResult<Option<String>> {
        match self.peek() {
            Some(b'"') => {
                let start = self.pos;
                self.pos += 1;
                let mut depth = 0usize;
                loop {
                    match self.peek() {
                        None => {
                            self.pos = start;
                            return self.syntax(format!(
                                "unterminated quoted value for field `{field}' in entry `{key}'"
                            ));
                        }
                        Some(b'{') => depth += 1,
                        Some(b'}') => {
                            if depth == 0 {
                                return self.syntax(format!("unbalanced `}}' in field `{field}' of entry `{key}'"));
                            }
                            depth -= 1;
                        }
                        Some(b'"') if depth == 0 => break,
                        _ => {}
                    }
                    self.pos += 1;
                }
                let raw = &self.text[start + 1..self.pos];
                self.pos += 1;
                Ok(Some(normalize_whitespace(raw)))
            }
            Some(b'{') => {
                let (inner_start, inner_end) = self.braced()?;
                Ok(Some(normalize_whitespace(&self.text[inner_start..inner_end])))
            }
            Some(b) if b.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
                Ok(Some(self.text[start..self.pos].to_string()))
            }
            Some(b) if is_name_byte(b) => {
                let macro_name = self.name();
                self.warn(
                    line,
                    format!("macro `{macro_name}' is not supported, field `{field}' of entry `{key}' dropped"),
                );
                Ok(None)
            }
            _ => self.syntax(format!("expected a value for field `{field}' in entry `{key}'")),
        }
    }

    /// Consumes a balanced `{...}` group starting at the current `{`.
    /// Returns the byte range of its contents.
    fn braced(&mut self) -> PResult<(usize, usize)> {
        let open = self.pos;
        debug_assert_eq!(self.peek(), Some(b'{'));
        self.pos += 1;
        let mut depth = 1usize;
        while let Some(b) = self.peek() {
            match b {
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return Ok((open + 1, self.pos - 1));
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        self.pos = open;
        self.syntax("unbalanced braces: `{' is never closed")
    }
}
