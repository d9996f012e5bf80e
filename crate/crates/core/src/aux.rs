//! The `.aux` handoff file between the LaTeX pass and the bibliography pass.

use std::fmt::Write as _;

use thiserror::Error;

/// Parsed `.aux` contents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuxFile {
    /// Citation keys in file order, repetitions kept.
    pub citations: Vec<String>,
    pub style: Option<String>,
    pub data: Vec<String>,
    /// Key to label, in first-definition order.
    pub bibcites: Vec<(String, String)>,
    /// Lines that are not one of the recognized commands, kept verbatim.
    pub raw_lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct AuxError {
    pub line: usize,
    pub message: String,
}

impl AuxFile {
    pub fn bibcite(&self, key: &str) -> Option<&str> {
        self.bibcites.iter().find(|(k, _)| k == key).map(|(_, l)| l.as_str())
    }

    /// Sets a label, keeping the original position of an existing key.
    pub fn set_bibcite(&mut self, key: &str, label: &str) {
        match self.bibcites.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = label.to_string(),
            None => self.bibcites.push((key.to_string(), label.to_string())),
        }
    }
}

const COMMANDS: [&str; 4] = ["citation", "bibstyle", "bibdata", "bibcite"];

pub fn parse_aux(text: &str) -> Result<AuxFile, AuxError> {
    let mut aux = AuxFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed == "\\relax" {
            continue;
        }
        let Some(command) = COMMANDS.iter().find(|c| {
            trimmed
                .strip_prefix('\\')
                .and_then(|r| r.strip_prefix(**c))
                .is_some_and(|r| r.starts_with('{'))
        }) else {
            if !trimmed.is_empty() {
                aux.raw_lines.push(line.to_string());
            }
            continue;
        };
        let rest = &trimmed[command.len() + 1..];
        let err = |message: String| AuxError { line: line_no, message };
        let (first, rest) = braced_arg(rest).ok_or_else(|| err(format!("unbalanced braces in \\{command}")))?;
        match *command {
            "citation" => aux.citations.extend(split_list(first)),
            "bibstyle" => aux.style = Some(first.trim().to_string()),
            "bibdata" => aux.data.extend(split_list(first)),
            "bibcite" => {
                let (label, _) = braced_arg(rest.trim_start())
                    .ok_or_else(|| err("\\bibcite needs a {label} argument".to_string()))?;
                if label.is_empty() {
                    return Err(err(format!("empty label for \\bibcite{{{first}}}")));
                }
                aux.set_bibcite(first.trim(), label);
            }
            _ => unreachable!(),
        }
    }
    Ok(aux)
}

fn split_list(arg: &str) -> impl Iterator<Item = String> + '_ {
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
}

/// Splits `{arg}rest` into `(arg, rest)`, honoring nested braces.
fn braced_arg(s: &str) -> Option<(&str, &str)> {
    let inner = s.strip_prefix('{')?;
    let mut depth = 1usize;
    for (i, c) in inner.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&inner[..i], &inner[i + 1..]));
                }
            }
            _ => {}
        }
    }
    None
}

/// Distinct citation keys in first-occurrence order.
pub fn unique_citation_order(aux: &AuxFile) -> Vec<String> {
    unique_keys(&aux.citations)
}

pub fn unique_keys(keys: &[String]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    keys.iter().filter(|k| seen.insert(k.as_str())).cloned().collect()
}

pub fn write_aux(aux: &AuxFile) -> String {
    let mut out = String::from("\\relax\n");
    for key in &aux.citations {
        let _ = writeln!(out, "\\citation{{{key}}}");
    }
    if let Some(style) = &aux.style {
        let _ = writeln!(out, "\\bibstyle{{{style}}}");
    }
    if !aux.data.is_empty() {
        let _ = writeln!(out, "\\bibdata{{{}}}", aux.data.join(","));
    }
    for (key, label) in &aux.bibcites {
        let _ = writeln!(out, "\\bibcite{{{key}}}{{{label}}}");
    }
    for line in &aux.raw_lines {
        out.push_str(line);
        out.push('\n');
    }
    out
}
