//! Static checks for `.bst` styles.
//!
//! The VM finds most mistakes only when it reaches them. The linter looks at
//! the whole file up front: EXECUTE/ITERATE targets that are never defined,
//! identifiers that name nothing, ENTRY fields that no function reads, and
//! top-level functions whose net stack effect is a known nonzero constant.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::bst::{self, BstCommand, BstProgram, BstToken, TokenKind, UNSUPPORTED_BUILTINS};
use crate::diag::ParseDiagnostic;
use crate::vm::SORT_KEY;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LintReport {
    /// Parse diagnostics, with the definition-order check left to `findings`.
    pub diagnostics: Vec<ParseDiagnostic>,
    pub findings: Vec<Finding>,
}

impl LintReport {
    pub fn has_parse_errors(&self) -> bool {
        self.diagnostics.iter().any(ParseDiagnostic::is_error)
    }

    /// 2 on parse errors, 1 on findings, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.has_parse_errors() {
            2
        } else if !self.findings.is_empty() {
            1
        } else {
            0
        }
    }
}

pub fn lint_style(text: &str, source: &str) -> LintReport {
    let (program, diagnostics) = bst::parse_structure(text, source);
    let mut report = LintReport {
        diagnostics,
        findings: Vec::new(),
    };
    if report.has_parse_errors() {
        return report;
    }
    let findings = &mut report.findings;

    for (line, target) in bst::undefined_targets(&program) {
        let message = if program.functions.contains_key(&target) {
            format!("function `{target}' is used by EXECUTE/ITERATE before it is defined")
        } else {
            format!("function `{target}' is never defined")
        };
        findings.push(Finding { line, message });
    }

    let names = Names::collect(&program);
    let mut read_fields = HashSet::new();
    for cmd in &program.commands {
        if let BstCommand::Function { name, body, .. } = cmd {
            check_idents(name, body, &names, &mut read_fields, findings);
        }
    }
    if let Some(BstCommand::Entry { fields, line, .. }) =
        program.commands.iter().find(|c| matches!(c, BstCommand::Entry { .. }))
    {
        for field in fields {
            if !read_fields.contains(&field.to_ascii_lowercase()) {
                findings.push(Finding {
                    line: *line,
                    message: format!("field `{field}' is declared in ENTRY but never read"),
                });
            }
        }
    }

    let mut effects = Effects::new(&program);
    for cmd in &program.commands {
        if let BstCommand::Execute { target, line } | BstCommand::Iterate { target, line } = cmd {
            if let Some(e) = effects.of_function(target).filter(|&e| e != 0) {
                findings.push(Finding {
                    line: *line,
                    message: format!("function `{target}' has net stack effect {e:+}"),
                });
            }
        }
    }
    findings.sort_by_key(|f| f.line);
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Field,
    Variable,
    Builtin,
    Unsupported,
    Function,
}

struct Names(HashMap<String, Kind>);

impl Names {
    fn collect(program: &BstProgram) -> Self {
        let mut map = HashMap::new();
        for b in bst::BUILTINS {
            map.insert(b.to_string(), Kind::Builtin);
        }
        for b in UNSUPPORTED_BUILTINS {
            map.insert(b.to_string(), Kind::Unsupported);
        }
        map.insert(SORT_KEY.to_string(), Kind::Variable);
        for cmd in &program.commands {
            match cmd {
                BstCommand::Entry {
                    fields,
                    integers,
                    strings,
                    ..
                } => {
                    for f in fields {
                        map.insert(f.to_ascii_lowercase(), Kind::Field);
                    }
                    for v in integers.iter().chain(strings) {
                        map.insert(v.to_ascii_lowercase(), Kind::Variable);
                    }
                }
                BstCommand::Strings { names, .. } | BstCommand::Integers { names, .. } => {
                    for v in names {
                        map.insert(v.to_ascii_lowercase(), Kind::Variable);
                    }
                }
                BstCommand::Function { name, .. } => {
                    map.insert(name.to_ascii_lowercase(), Kind::Function);
                }
                _ => {}
            }
        }
        Names(map)
    }

    fn kind(&self, name: &str) -> Option<Kind> {
        self.0.get(&name.to_ascii_lowercase()).copied()
    }
}

fn check_idents(
    func: &str,
    body: &[BstToken],
    names: &Names,
    read_fields: &mut HashSet<String>,
    findings: &mut Vec<Finding>,
) {
    for tok in body {
        match &tok.kind {
            TokenKind::Block(inner) => check_idents(func, inner, names, read_fields, findings),
            TokenKind::Ident(name) | TokenKind::Quoted(name) => match names.kind(name) {
                Some(Kind::Field) => {
                    read_fields.insert(name.to_ascii_lowercase());
                }
                Some(Kind::Unsupported) => findings.push(Finding {
                    line: tok.line,
                    message: format!("in `{func}': builtin `{name}' is not supported"),
                }),
                Some(_) => {}
                None => findings.push(Finding {
                    line: tok.line,
                    message: format!("in `{func}': identifier `{name}' resolves to nothing"),
                }),
            },
            _ => {}
        }
    }
}

/// Best-effort stack effect: `None` whenever the answer depends on data.
struct Effects<'a> {
    program: &'a BstProgram,
    names: Names,
    memo: HashMap<String, Option<i64>>,
    in_progress: HashSet<String>,
}

/// What a symbolic stack slot is known to hold.
type Slot = Option<Arc<[BstToken]>>;

impl<'a> Effects<'a> {
    fn new(program: &'a BstProgram) -> Self {
        Effects {
            program,
            names: Names::collect(program),
            memo: HashMap::new(),
            in_progress: HashSet::new(),
        }
    }

    fn of_function(&mut self, name: &str) -> Option<i64> {
        if let Some(&e) = self.memo.get(name) {
            return e;
        }
        let body = self.program.functions.get(name)?.clone();
        if !self.in_progress.insert(name.to_string()) {
            return None;
        }
        let e = self.of_tokens(&body);
        self.in_progress.remove(name);
        self.memo.insert(name.to_string(), e);
        e
    }

    fn of_tokens(&mut self, tokens: &[BstToken]) -> Option<i64> {
        let mut stack: Vec<Slot> = Vec::new();
        let mut below = 0i64;
        let pop = |stack: &mut Vec<Slot>, below: &mut i64| -> Slot {
            stack.pop().unwrap_or_else(|| {
                *below += 1;
                None
            })
        };
        let adjust = |stack: &mut Vec<Slot>, below: &mut i64, n: i64| {
            if n >= 0 {
                stack.extend((0..n).map(|_| None));
            } else {
                for _ in 0..-n {
                    pop(stack, below);
                }
            }
        };
        for tok in tokens {
            match &tok.kind {
                TokenKind::Block(b) => stack.push(Some(b.clone())),
                TokenKind::Str(_) | TokenKind::Int(_) | TokenKind::Quoted(_) => stack.push(None),
                TokenKind::Ident(name) => match name.as_str() {
                    "if$" => {
                        let else_b = pop(&mut stack, &mut below);
                        let then_b = pop(&mut stack, &mut below);
                        pop(&mut stack, &mut below);
                        let e = self.branch(then_b)?;
                        if self.branch(else_b)? != e {
                            return None;
                        }
                        adjust(&mut stack, &mut below, e);
                    }
                    "while$" => {
                        let body = pop(&mut stack, &mut below);
                        let cond = pop(&mut stack, &mut below);
                        if self.branch(cond)? != 1 || self.branch(body)? != 0 {
                            return None;
                        }
                    }
                    "call.type$" => return None,
                    _ => {
                        let e = match self.names.kind(name)? {
                            Kind::Field | Kind::Variable => 1,
                            Kind::Builtin => builtin_effect(name)?,
                            Kind::Function => self.of_function(name)?,
                            Kind::Unsupported => return None,
                        };
                        adjust(&mut stack, &mut below, e);
                    }
                },
            }
        }
        Some(stack.len() as i64 - below)
    }

    fn branch(&mut self, slot: Slot) -> Option<i64> {
        self.of_tokens(&slot?)
    }
}

/// Net effect of the fixed-arity builtins.
fn builtin_effect(name: &str) -> Option<i64> {
    Some(match name {
        "write$" => -1,
        "newline$" | "skip$" | "empty$" | "num.names$" => 0,
        "cite$" => 1,
        "*" | "=" | "<" | ">" | "+" | "-" => -1,
        ":=" | "format.name$" => -2,
        _ => return None,
    })
}
