//! Citation side of a LaTeX run.
//!
//! [`scan_tex`] finds the commands that matter for citations. [`run_pass`]
//! plays one LaTeX run: it renders each `\cite` from the labels of the
//! previous `.aux`, and writes the `.aux` the run would leave behind.
//! [`fixpoint`] repeats passes until the labels stop changing.
//!
//! Two bibliography mechanisms are understood. In inline mode the document
//! has its own `thebibliography` environment and its `\bibitem`s are numbered
//! in order. In external mode the document names a style and databases; the
//! labels come from the `\bibitem`s of the generated `.bbl`, attached with
//! [`TexScan::with_bbl`].

use std::ops::Range;

use thiserror::Error;

use crate::aux::AuxFile;
use crate::diag::LineIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TexError {
    pub line: usize,
    pub message: String,
}

/// One `\cite` occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiteSite {
    /// Byte range of the whole command, `\cite` through the closing brace.
    pub span: Range<usize>,
    pub keys: Vec<String>,
    /// Optional note from `\cite[note]{..}`.
    pub note: Option<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TexScan {
    /// Base name used in messages such as "No file test.aux.".
    pub jobname: String,
    pub source: String,
    pub sites: Vec<CiteSite>,
    /// Every cited key in order, multi-key cites flattened.
    pub cites: Vec<String>,
    pub style: Option<String>,
    pub data: Vec<String>,
    pub has_bibliography_env: bool,
    pub inline_bib: Vec<String>,
    /// `\bibitem` keys of the external `.bbl`; `None` when no `.bbl` was found.
    pub bbl_items: Option<Vec<String>>,
    pub warnings: Vec<String>,
}

impl TexScan {
    pub fn with_jobname(mut self, jobname: &str) -> Self {
        self.jobname = jobname.to_string();
        self
    }

    /// Attaches the `.bbl` that `\bibliography` would read.
    pub fn with_bbl(mut self, bbl_text: &str) -> Self {
        let keys = scan_tex(bbl_text).map(|s| s.inline_bib).unwrap_or_default();
        self.bbl_items = Some(keys);
        self
    }

    pub fn is_external(&self) -> bool {
        self.style.is_some() || !self.data.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassResult {
    pub rendered: String,
    pub new_aux: AuxFile,
    pub warnings: Vec<String>,
    pub labels_changed: bool,
}

pub const RERUN_WARNING: &str = "Label(s) may have changed. Rerun to get cross-references right.";

pub fn scan_tex(text: &str) -> Result<TexScan, TexError> {
    let lines = LineIndex::new(text);
    let bytes = text.as_bytes();
    let mut scan = TexScan {
        jobname: "texput".to_string(),
        source: text.to_string(),
        sites: Vec::new(),
        cites: Vec::new(),
        style: None,
        data: Vec::new(),
        has_bibliography_env: false,
        inline_bib: Vec::new(),
        bbl_items: None,
        warnings: Vec::new(),
    };
    let mut pos = 0;
    while pos < bytes.len() {
        match bytes[pos] {
            b'%' => {
                pos = text[pos..].find('\n').map_or(bytes.len(), |i| pos + i);
            }
            b'\\' => {
                let start = pos;
                pos += 1;
                let name_len = bytes[pos..].iter().take_while(|b| b.is_ascii_alphabetic()).count();
                if name_len == 0 {
                    // Control symbol such as `\%` or `\\`: skip the escaped character.
                    pos += text[pos..].chars().next().map_or(0, char::len_utf8);
                    continue;
                }
                let name = &text[pos..pos + name_len];
                pos += name_len;
                let line = lines.line_of(start);
                let err = |message: String| TexError { line, message };
                match name {
                    "cite" | "bibitem" => {
                        let mut p = skip_spaces(text, pos);
                        let mut note = None;
                        if bytes.get(p) == Some(&b'[') {
                            let close = text[p..]
                                .find(']')
                                .ok_or_else(|| err(format!("unclosed `[' in \\{name}")))?;
                            note = Some(text[p + 1..p + close].to_string());
                            p = skip_spaces(text, p + close + 1);
                        }
                        let (arg, end) = braced(text, p)
                            .ok_or_else(|| err(format!("\\{name} needs a balanced {{...}} argument")))?;
                        pos = end;
                        let keys: Vec<String> = arg
                            .split(',')
                            .map(str::trim)
                            .filter(|k| !k.is_empty())
                            .map(String::from)
                            .collect();
                        if name == "cite" {
                            scan.cites.extend(keys.iter().cloned());
                            scan.sites.push(CiteSite {
                                span: start..end,
                                keys,
                                note,
                                line,
                            });
                        } else {
                            scan.inline_bib.extend(keys);
                        }
                    }
                    "bibliographystyle" | "bibliography" | "begin" => {
                        let p = skip_spaces(text, pos);
                        let (arg, end) = braced(text, p)
                            .ok_or_else(|| err(format!("\\{name} needs a balanced {{...}} argument")))?;
                        pos = end;
                        match name {
                            "bibliographystyle" => scan.style = Some(arg.trim().to_string()),
                            "bibliography" => scan.data.extend(
                                arg.split(',')
                                    .map(str::trim)
                                    .filter(|s| !s.is_empty())
                                    .map(String::from),
                            ),
                            _ => {
                                if arg.trim() == "thebibliography" {
                                    scan.has_bibliography_env = true;
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
            _ => pos += 1,
        }
    }
    if !scan.inline_bib.is_empty() && !scan.data.is_empty() {
        scan.warnings.push(
            "document has both a thebibliography environment and \\bibliography; using \\bibliography".to_string(),
        );
    }
    Ok(scan)
}

fn skip_spaces(text: &str, mut pos: usize) -> usize {
    let bytes = text.as_bytes();
    while pos < bytes.len() && (bytes[pos] == b' ' || bytes[pos] == b'\t') {
        pos += 1;
    }
    pos
}

/// Reads `{...}` at `pos`; returns the contents and the index after `}`.
fn braced(text: &str, pos: usize) -> Option<(&str, usize)> {
    if text.as_bytes().get(pos) != Some(&b'{') {
        return None;
    }
    let mut depth = 0usize;
    for (i, b) in text.as_bytes()[pos..].iter().enumerate() {
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&text[pos + 1..pos + i], pos + i + 1));
                }
            }
            _ => {}
        }
    }
    None
}

pub fn run_pass(tex: &TexScan, old_aux: Option<&AuxFile>) -> PassResult {
    let mut warnings = tex.warnings.clone();
    if old_aux.is_none() {
        warnings.push(format!("No file {}.aux.", tex.jobname));
    }
    let labels = old_aux.map(|a| &a.bibcites[..]).unwrap_or(&[]);
    let label_of = |key: &str| labels.iter().find(|(k, _)| k == key).map(|(_, l)| l.as_str());

    let mut rendered = String::with_capacity(tex.source.len());
    let mut last = 0;
    for site in &tex.sites {
        rendered.push_str(&tex.source[last..site.span.start]);
        let marks: Vec<&str> = site
            .keys
            .iter()
            .map(|k| {
                label_of(k).unwrap_or_else(|| {
                    warnings.push(format!(
                        "Citation `{k}' on page 1 undefined on input line {}.",
                        site.line
                    ));
                    "?"
                })
            })
            .collect();
        rendered.push('[');
        rendered.push_str(&marks.join(","));
        if let Some(note) = &site.note {
            rendered.push_str(", ");
            rendered.push_str(note);
        }
        rendered.push(']');
        last = site.span.end;
    }
    rendered.push_str(&tex.source[last..]);

    let mut new_aux = AuxFile {
        citations: tex.cites.clone(),
        ..AuxFile::default()
    };
    let numbered: &[String] = if tex.is_external() {
        new_aux.style = tex.style.clone();
        new_aux.data = tex.data.clone();
        if tex.bbl_items.is_none() && !tex.data.is_empty() {
            warnings.push(format!("No file {}.bbl.", tex.jobname));
        }
        tex.bbl_items.as_deref().unwrap_or(&[])
    } else {
        &tex.inline_bib
    };
    for (i, key) in numbered.iter().enumerate() {
        new_aux.set_bibcite(key, &(i + 1).to_string());
    }

    let labels_changed = new_aux.bibcites != labels;
    if labels_changed {
        warnings.push(RERUN_WARNING.to_string());
    }
    PassResult {
        rendered,
        new_aux,
        warnings,
        labels_changed,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("labels still changing after {} passes", .passes.len())]
pub struct NoFixpoint {
    pub passes: Vec<PassResult>,
}

/// Runs passes until labels settle. Returns every pass; the count is its length.
pub fn fixpoint(
    tex: &TexScan,
    initial_aux: Option<&AuxFile>,
    max_passes: usize,
) -> Result<Vec<PassResult>, NoFixpoint> {
    assert!(max_passes >= 1, "max_passes must be at least 1");
    let mut passes: Vec<PassResult> = Vec::new();
    let mut aux = initial_aux.cloned();
    while passes.len() < max_passes {
        let result = run_pass(tex, aux.as_ref());
        let done = !result.labels_changed;
        aux = Some(result.new_aux.clone());
        passes.push(result);
        if done {
            return Ok(passes);
        }
    }
    Err(NoFixpoint { passes })
}
