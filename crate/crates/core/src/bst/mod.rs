//! `.bst` style language: tokens, top-level commands, and the parser.

mod lexer;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::diag::ParseDiagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Str(String),
    Int(i64),
    Ident(String),
    /// `'name`
    Quoted(String),
    /// `{ ... }`
    Block(Arc<[BstToken]>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BstToken {
    pub kind: TokenKind,
    pub line: usize,
}

impl BstToken {
    pub fn new(kind: TokenKind, line: usize) -> Self {
        BstToken { kind, line }
    }
}

impl fmt::Display for BstToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TokenKind::Str(s) => write!(f, "\"{s}\""),
            TokenKind::Int(i) => write!(f, "#{i}"),
            TokenKind::Ident(n) => f.write_str(n),
            TokenKind::Quoted(n) => write!(f, "'{n}"),
            TokenKind::Block(body) => {
                f.write_str("{")?;
                for tok in body.iter() {
                    write!(f, " {tok}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BstCommand {
    Entry {
        fields: Vec<String>,
        integers: Vec<String>,
        strings: Vec<String>,
        line: usize,
    },
    Function {
        name: String,
        body: Arc<[BstToken]>,
        line: usize,
    },
    Read {
        line: usize,
    },
    Execute {
        target: String,
        line: usize,
    },
    Iterate {
        target: String,
        line: usize,
    },
    Sort {
        line: usize,
    },
    Strings {
        names: Vec<String>,
        line: usize,
    },
    Integers {
        names: Vec<String>,
        line: usize,
    },
}

impl BstCommand {
    pub fn line(&self) -> usize {
        match self {
            BstCommand::Entry { line, .. }
            | BstCommand::Function { line, .. }
            | BstCommand::Read { line }
            | BstCommand::Execute { line, .. }
            | BstCommand::Iterate { line, .. }
            | BstCommand::Sort { line }
            | BstCommand::Strings { line, .. }
            | BstCommand::Integers { line, .. } => *line,
        }
    }
}

fn write_names(f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
    f.write_str("{")?;
    for n in names {
        write!(f, " {n}")?;
    }
    f.write_str(" }")
}

impl fmt::Display for BstCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BstCommand::Entry {
                fields,
                integers,
                strings,
                ..
            } => {
                f.write_str("ENTRY ")?;
                write_names(f, fields)?;
                write_names(f, integers)?;
                write_names(f, strings)
            }
            BstCommand::Function { name, body, .. } => {
                write!(f, "FUNCTION {{{name}}} {{")?;
                for tok in body.iter() {
                    write!(f, " {tok}")?;
                }
                f.write_str(" }")
            }
            BstCommand::Read { .. } => f.write_str("READ"),
            BstCommand::Execute { target, .. } => write!(f, "EXECUTE {{{target}}}"),
            BstCommand::Iterate { target, .. } => write!(f, "ITERATE {{{target}}}"),
            BstCommand::Sort { .. } => f.write_str("SORT"),
            BstCommand::Strings { names, .. } => {
                f.write_str("STRINGS ")?;
                write_names(f, names)
            }
            BstCommand::Integers { names, .. } => {
                f.write_str("INTEGERS ")?;
                write_names(f, names)
            }
        }
    }
}

/// A parsed style: commands in file order plus the function table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BstProgram {
    pub commands: Vec<BstCommand>,
    pub functions: HashMap<String, Arc<[BstToken]>>,
}

impl BstProgram {
    pub fn entry_declaration(&self) -> Option<(&[String], &[String], &[String])> {
        self.commands.iter().find_map(|c| match c {
            BstCommand::Entry {
                fields,
                integers,
                strings,
                ..
            } => Some((&fields[..], &integers[..], &strings[..])),
            _ => None,
        })
    }

    /// Re-serializes the program as `.bst` source, one command per line.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for cmd in &self.commands {
            out.push_str(&cmd.to_string());
            out.push('\n');
        }
        out
    }
}

/// Names the interpreter implements.
pub const BUILTINS: [&str; 17] = [
    "write$",
    "newline$",
    "cite$",
    "empty$",
    "skip$",
    "if$",
    "while$",
    "*",
    ":=",
    "num.names$",
    "format.name$",
    "=",
    "<",
    ">",
    "+",
    "-",
    "call.type$",
];

/// Stock BibTeX builtins this interpreter deliberately rejects.
pub const UNSUPPORTED_BUILTINS: [&str; 20] = [
    "add.period$",
    "change.case$",
    "chr.to.int$",
    "duplicate$",
    "global.max$",
    "entry.max$",
    "int.to.chr$",
    "int.to.str$",
    "missing$",
    "pop$",
    "preamble$",
    "purify$",
    "quote$",
    "stack$",
    "substring$",
    "swap$",
    "text.length$",
    "text.prefix$",
    "top$",
    "type$",
];

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

/// Parses a style. The program holds every command that could be recovered;
/// any `Error` diagnostic means the style should not be run.
pub fn parse_bst(text: &str, source_name: &str) -> (BstProgram, Vec<ParseDiagnostic>) {
    let (program, mut diags) = parse_structure(text, source_name);
    diags.extend(check_targets(&program, source_name));
    diags.sort_by_key(|d| d.line);
    (program, diags)
}

/// EXECUTE and ITERATE targets must be builtins or functions defined earlier
/// in the file. Returns the offending commands as `(line, target)`.
pub fn undefined_targets(program: &BstProgram) -> Vec<(usize, String)> {
    let mut defined = std::collections::HashSet::new();
    let mut bad = Vec::new();
    for cmd in &program.commands {
        match cmd {
            BstCommand::Function { name, .. } => {
                defined.insert(name.as_str());
            }
            BstCommand::Execute { target, line } | BstCommand::Iterate { target, line }
                if !is_builtin(target) && !defined.contains(target.as_str()) =>
            {
                bad.push((*line, target.clone()));
            }
            _ => {}
        }
    }
    bad
}

fn check_targets(program: &BstProgram, source: &str) -> Vec<ParseDiagnostic> {
    undefined_targets(program)
        .into_iter()
        .map(|(line, target)| {
            ParseDiagnostic::error(
                source,
                line,
                format!("function `{target}' must be defined before it is executed"),
            )
        })
        .collect()
}

/// Tokenizes and groups top-level commands without the definition-order check.
pub(crate) fn parse_structure(text: &str, source: &str) -> (BstProgram, Vec<ParseDiagnostic>) {
    let (tokens, mut diags) = lexer::tokenize(text, source);
    let mut program = BstProgram::default();
    let mut seen_entry = false;
    let mut seen_read = false;
    let mut it = tokens.into_iter().peekable();

    let err = |diags: &mut Vec<ParseDiagnostic>, line: usize, msg: String| {
        diags.push(ParseDiagnostic::error(source, line, msg));
    };

    while let Some(tok) = it.next() {
        let line = tok.line;
        let keyword = match &tok.kind {
            TokenKind::Ident(name) => name.to_ascii_uppercase(),
            TokenKind::Block(body) if is_sort_block(body) => {
                program.commands.push(BstCommand::Sort { line });
                continue;
            }
            _ => {
                err(&mut diags, line, format!("expected a command, found `{tok}'"));
                continue;
            }
        };
        let arity = match keyword.as_str() {
            "READ" | "SORT" => 0,
            "EXECUTE" | "ITERATE" | "STRINGS" | "INTEGERS" | "REVERSE" => 1,
            "FUNCTION" | "MACRO" => 2,
            "ENTRY" => 3,
            _ => {
                err(&mut diags, line, format!("unknown command `{keyword}'"));
                continue;
            }
        };
        let mut args: Vec<Arc<[BstToken]>> = Vec::with_capacity(arity);
        while args.len() < arity {
            match it.peek().map(|t| &t.kind) {
                Some(TokenKind::Block(body)) => {
                    args.push(body.clone());
                    it.next();
                }
                _ => break,
            }
        }
        if args.len() < arity {
            err(
                &mut diags,
                line,
                format!("{keyword} expects {arity} braced argument(s), found {}", args.len()),
            );
            continue;
        }
        let names = |body: &[BstToken], what: &str, diags: &mut Vec<ParseDiagnostic>| -> Option<Vec<String>> {
            let mut out = Vec::new();
            for t in body {
                match &t.kind {
                    TokenKind::Ident(n) => out.push(n.clone()),
                    _ => {
                        diags.push(ParseDiagnostic::error(
                            source,
                            t.line,
                            format!("{what}: expected a name, found `{t}'"),
                        ));
                        return None;
                    }
                }
            }
            Some(out)
        };
        match keyword.as_str() {
            "READ" => {
                if seen_read {
                    err(&mut diags, line, "READ may appear only once".into());
                    continue;
                }
                seen_read = true;
                program.commands.push(BstCommand::Read { line });
            }
            "SORT" => program.commands.push(BstCommand::Sort { line }),
            "MACRO" | "REVERSE" => {
                err(&mut diags, line, format!("unsupported command `{keyword}'"));
            }
            "ENTRY" => {
                if seen_entry {
                    err(&mut diags, line, "ENTRY may appear only once".into());
                    continue;
                }
                if seen_read {
                    err(&mut diags, line, "ENTRY must come before READ".into());
                    continue;
                }
                seen_entry = true;
                let (Some(fields), Some(integers), Some(strings)) = (
                    names(&args[0], "ENTRY", &mut diags),
                    names(&args[1], "ENTRY", &mut diags),
                    names(&args[2], "ENTRY", &mut diags),
                ) else {
                    continue;
                };
                let fields = fields.into_iter().map(|f| f.to_ascii_lowercase()).collect();
                program.commands.push(BstCommand::Entry {
                    fields,
                    integers,
                    strings,
                    line,
                });
            }
            "STRINGS" | "INTEGERS" => {
                let Some(names) = names(&args[0], &keyword, &mut diags) else {
                    continue;
                };
                program.commands.push(if keyword == "STRINGS" {
                    BstCommand::Strings { names, line }
                } else {
                    BstCommand::Integers { names, line }
                });
            }
            "EXECUTE" | "ITERATE" | "FUNCTION" => {
                let target = match names(&args[0], &keyword, &mut diags).as_deref() {
                    Some([one]) => one.clone(),
                    Some(_) => {
                        err(&mut diags, line, format!("{keyword} expects exactly one name"));
                        continue;
                    }
                    None => continue,
                };
                let cmd = match keyword.as_str() {
                    "EXECUTE" => BstCommand::Execute { target, line },
                    "ITERATE" => BstCommand::Iterate { target, line },
                    _ => {
                        if program.functions.contains_key(&target) {
                            err(&mut diags, line, format!("function `{target}' is already defined"));
                            continue;
                        }
                        program.functions.insert(target.clone(), args[1].clone());
                        BstCommand::Function {
                            name: target,
                            body: args[1].clone(),
                            line,
                        }
                    }
                };
                program.commands.push(cmd);
            }
            _ => unreachable!(),
        }
    }
    (program, diags)
}

fn is_sort_block(body: &[BstToken]) -> bool {
    matches!(body, [BstToken { kind: TokenKind::Ident(n), .. }] if n.eq_ignore_ascii_case("SORT"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HELLOWORD: &str = include_str!("../../data/helloword.bst");
    const SORT_FRAGMENT: &str = include_str!("../../data/sort_by_author.bst");

    fn kinds(program: &BstProgram) -> Vec<String> {
        program
            .commands
            .iter()
            .map(|c| match c {
                BstCommand::Entry { .. } => "entry".to_string(),
                BstCommand::Function { .. } => "function".to_string(),
                BstCommand::Read { .. } => "read".to_string(),
                BstCommand::Execute { target, .. } => format!("execute({target})"),
                BstCommand::Iterate { target, .. } => format!("iterate({target})"),
                BstCommand::Sort { .. } => "sort".to_string(),
                BstCommand::Strings { .. } => "strings".to_string(),
                BstCommand::Integers { .. } => "integers".to_string(),
            })
            .collect()
    }

    #[test]
    fn parses_helloword() {
        let (program, diags) = parse_bst(HELLOWORD, "helloword.bst");
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(
            kinds(&program),
            [
                "entry",
                "function",
                "function",
                "function",
                "read",
                "function",
                "execute(begin.bib)",
                "iterate(call.type$)",
                "function",
                "execute(end.bib)"
            ]
        );
        let (fields, ints, strs) = program.entry_declaration().unwrap();
        assert_eq!(fields, ["author"]);
        assert!(ints.is_empty() && strs.is_empty());
        let mut names: Vec<_> = program.functions.keys().cloned().collect();
        names.sort();
        assert_eq!(names, ["article", "begin.bib", "book", "end.bib", "output.bibitem"]);
        let body = &program.functions["output.bibitem"];
        assert_eq!(body[0].kind, TokenKind::Str("\\bibitem{".into()));
        assert_eq!(body[1].kind, TokenKind::Ident("write$".into()));
    }

    #[test]
    fn empty_source() {
        let (program, diags) = parse_bst("", "e.bst");
        assert!(program.commands.is_empty());
        assert!(diags.is_empty());
    }

    #[test]
    fn sort_fragment_after_read() {
        let text = HELLOWORD.replacen("READ\n", &format!("READ\n{SORT_FRAGMENT}"), 1);
        let (program, diags) = parse_bst(&text, "s.bst");
        assert!(diags.is_empty(), "{diags:?}");
        let k = kinds(&program);
        assert_eq!(&k[4..8], ["read", "function", "iterate(bib.sort.order)", "sort"]);
        assert!(program.functions.contains_key("bib.sort.order"));
    }

    #[test]
    fn bare_and_braced_sort() {
        let (program, diags) = parse_bst("READ SORT {SORT} {sort}", "s.bst");
        assert!(diags.is_empty());
        assert_eq!(kinds(&program), ["read", "sort", "sort", "sort"]);
    }

    #[test]
    fn keywords_case_insensitive_and_comments() {
        let text = "% a comment {\nfunction {f} { #1 } % trailing\nexecute {f}\nIntegers { n }\n";
        let (program, diags) = parse_bst(text, "c.bst");
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(kinds(&program), ["function", "execute(f)", "integers"]);
    }

    #[test]
    fn literal_forms() {
        let (program, diags) = parse_bst("FUNCTION {f} { #-12 #+3 'g \"a % b\" { x } }", "l.bst");
        assert!(diags.is_empty(), "{diags:?}");
        let body = &program.functions["f"];
        assert_eq!(body[0].kind, TokenKind::Int(-12));
        assert_eq!(body[1].kind, TokenKind::Int(3));
        assert_eq!(body[2].kind, TokenKind::Quoted("g".into()));
        assert_eq!(body[3].kind, TokenKind::Str("a % b".into()));
        assert!(matches!(&body[4].kind, TokenKind::Block(b) if b.len() == 1));
    }

    #[test]
    fn execute_before_definition_is_error() {
        let (program, diags) = parse_bst("EXECUTE {later}\nFUNCTION {later} { }\n", "o.bst");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_error());
        assert_eq!(diags[0].line, 1);
        assert!(diags[0].message.contains("defined before"));
        assert_eq!(undefined_targets(&program), vec![(1, "later".to_string())]);
    }

    #[test]
    fn unbalanced_braces() {
        let (_, diags) = parse_bst("FUNCTION {f} { #1 \n", "u.bst");
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("never closed")));
        let (_, diags) = parse_bst("READ }\n", "u.bst");
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.message.contains("unexpected `}'")));
    }

    #[test]
    fn multiline_string_is_error() {
        let (_, diags) = parse_bst("FUNCTION {f} { \"abc\ndef\" }", "m.bst");
        assert!(diags.iter().any(|d| d.message.contains("string literal")));
    }

    #[test]
    fn redefinition_and_unsupported() {
        let (_, diags) = parse_bst("FUNCTION {f} {} FUNCTION {f} {}", "r.bst");
        assert!(diags[0].message.contains("already defined"));
        let (_, diags) = parse_bst("MACRO {jan} {\"January\"}", "r.bst");
        assert!(diags[0].message.contains("unsupported command `MACRO'"));
        let (_, diags) = parse_bst("REVERSE {f}", "r.bst");
        assert!(diags[0].message.contains("unsupported command"));
    }

    #[test]
    fn canonical_entry_with_number_and_volume() {
        let (program, diags) = parse_bst("ENTRY {author number volume}{}{}", "e.bst");
        assert!(diags.is_empty());
        assert_eq!(program.entry_declaration().unwrap().0, ["author", "number", "volume"]);
        // The stray-brace rendering from print does not parse.
        let (_, diags) = parse_bst("ENTRY\n { author\n { number\n { volume\n }{}{}\n", "e.bst");
        assert!(diags.iter().any(|d| d.is_error()));
    }

    #[test]
    fn source_round_trip() {
        let text = HELLOWORD.replacen("READ\n", &format!("READ\n{SORT_FRAGMENT}"), 1);
        let (program, _) = parse_bst(&text, "a.bst");
        let (again, diags) = parse_bst(&program.to_source(), "b.bst");
        assert!(diags.is_empty());
        assert_eq!(program.to_source(), again.to_source());
        assert_eq!(program.commands.len(), again.commands.len());
    }
}
