use std::sync::Arc;

use super::{BstToken, TokenKind};
use crate::diag::ParseDiagnostic;

/// Characters allowed in identifiers besides ASCII letters and digits.
const IDENT_EXTRA: &str = ".$-_:=<>+*";

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || IDENT_EXTRA.contains(c)
}

/// Splits `.bst` source into a token tree. Errors are collected, not fatal:
/// the returned tokens are everything that could be recovered.
pub(crate) fn tokenize(text: &str, source: &str) -> (Vec<BstToken>, Vec<ParseDiagnostic>) {
    let mut lx = Lexer {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        source,
        diags: Vec::new(),
    };
    // Each open block: (line of `{`, tokens so far).
    let mut open: Vec<(usize, Vec<BstToken>)> = Vec::new();
    let mut top = Vec::new();

    while let Some(next) = lx.next_item() {
        let current = match open.last_mut() {
            Some((_, body)) => body,
            None => &mut top,
        };
        match next {
            Item::Token(tok) => current.push(tok),
            Item::Open(line) => open.push((line, Vec::new())),
            Item::Close(line) => match open.pop() {
                Some((open_line, body)) => {
                    let tok = BstToken {
                        kind: TokenKind::Block(Arc::from(body)),
                        line: open_line,
                    };
                    match open.last_mut() {
                        Some((_, parent)) => parent.push(tok),
                        None => top.push(tok),
                    }
                }
                None => lx.error(line, "unbalanced braces: unexpected `}'"),
            },
        }
    }
    if let Some((line, _)) = open.first() {
        lx.error(*line, "unbalanced braces: `{' is never closed");
    }
    (top, lx.diags)
}

enum Item {
    Token(BstToken),
    Open(usize),
    Close(usize),
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    source: &'a str,
    diags: Vec<ParseDiagnostic>,
}

impl Lexer<'_> {
    fn error(&mut self, line: usize, message: impl Into<String>) {
        self.diags.push(ParseDiagnostic::error(self.source, line, message));
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| pred(c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn next_item(&mut self) -> Option<Item> {
        loop {
            let c = self.peek()?;
            let line = self.line;
            match c {
                _ if c.is_whitespace() => {
                    self.bump();
                }
                '%' => {
                    self.take_while(|c| c != '\n');
                }
                '{' => {
                    self.bump();
                    return Some(Item::Open(line));
                }
                '}' => {
                    self.bump();
                    return Some(Item::Close(line));
                }
                '"' => {
                    self.bump();
                    let body = self.take_while(|c| c != '"' && c != '\n');
                    if self.peek() == Some('"') {
                        self.bump();
                        return Some(Item::Token(BstToken::new(TokenKind::Str(body), line)));
                    }
                    self.error(line, "string literal is not closed on its line");
                }
                '#' => {
                    self.bump();
                    let mut text = String::new();
                    if let Some(sign) = self.peek().filter(|&c| c == '+' || c == '-') {
                        text.push(sign);
                        self.bump();
                    }
                    let digits = self.take_while(|c| c.is_ascii_digit());
                    text.push_str(&digits);
                    // Anything glued to the number makes it malformed.
                    let junk = self.take_while(is_ident_char);
                    if digits.is_empty() || !junk.is_empty() {
                        self.error(line, format!("malformed integer literal `#{text}{junk}'"));
                        continue;
                    }
                    match text.parse::<i64>() {
                        Ok(v) => return Some(Item::Token(BstToken::new(TokenKind::Int(v), line))),
                        Err(_) => self.error(line, format!("integer literal `#{text}' is out of range")),
                    }
                }
                '\'' => {
                    self.bump();
                    let name = self.take_while(is_ident_char);
                    if name.is_empty() {
                        self.error(line, "`'' must be followed by an identifier");
                        continue;
                    }
                    return Some(Item::Token(BstToken::new(TokenKind::Quoted(name), line)));
                }
                _ if is_ident_char(c) => {
                    let name = self.take_while(is_ident_char);
                    return Some(Item::Token(BstToken::new(TokenKind::Ident(name), line)));
                }
                _ => {
                    self.bump();
                    self.error(line, format!("unexpected character `{c}'"));
                }
            }
        }
    }
}
