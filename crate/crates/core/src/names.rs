//! Author-list splitting, name decomposition, and `format.name$` templates.
//!
//! A name is one of three forms, selected by the number of commas at brace
//! depth 0:
//!
//! * `First von Last`
//! * `von Last, First`
//! * `von Last, Jr, First`
//!
//! The von part is recognized by lowercase-initial words. A brace group
//! counts as uppercase.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("too many commas in name `{0}'")]
    TooManyCommas(String),
    #[error("name `{0}' has no words")]
    Empty(String),
    #[error("name `{0}' has no last part")]
    NoLastPart(String),
    #[error("bad name template `{template}': {reason}")]
    Template { template: String, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameParts {
    pub first: Vec<String>,
    pub von: Vec<String>,
    pub last: Vec<String>,
    pub jr: Vec<String>,
}

impl NameParts {
    pub fn part(&self, part: Part) -> &[String] {
        match part {
            Part::First => &self.first,
            Part::Von => &self.von,
            Part::Last => &self.last,
            Part::Jr => &self.jr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    First,
    Von,
    Last,
    Jr,
}

impl Part {
    fn letter(self) -> char {
        match self {
            Part::First => 'f',
            Part::Von => 'v',
            Part::Last => 'l',
            Part::Jr => 'j',
        }
    }
}

/// One `{..}` group of a template, e.g. `{ll}` or `{f.}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplatePiece {
    pub part: Part,
    /// Doubled letter: whole tokens rather than initials.
    pub full: bool,
    pub suffix_literal: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameTemplate {
    pub pieces: Vec<TemplatePiece>,
}

impl fmt::Display for NameTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pieces {
            let l = p.part.letter();
            if p.full {
                write!(f, "{{{l}{l}{}}}", p.suffix_literal)?;
            } else {
                write!(f, "{{{l}{}}}", p.suffix_literal)?;
            }
        }
        Ok(())
    }
}

impl NameTemplate {
    pub fn parse(template: &str) -> Result<Self, NameError> {
        let bad = |reason: &str| NameError::Template {
            template: template.to_string(),
            reason: reason.to_string(),
        };
        let mut pieces = Vec::new();
        let mut rest = template;
        while !rest.is_empty() {
            let inner = rest.strip_prefix('{').ok_or_else(|| bad("text outside a {..} piece"))?;
            let close = inner.find(['{', '}']).ok_or_else(|| bad("`{' is never closed"))?;
            if inner.as_bytes()[close] == b'{' {
                return Err(bad("nested braces inside a piece"));
            }
            let body = &inner[..close];
            rest = &inner[close + 1..];

            let mut chars = body.chars();
            let letter = chars.next().ok_or_else(|| bad("empty piece"))?;
            let part = match letter {
                'f' => Part::First,
                'v' => Part::Von,
                'l' => Part::Last,
                'j' => Part::Jr,
                _ => return Err(bad("piece must start with one of f, v, l, j")),
            };
            let mut tail = chars.as_str();
            let full = tail.starts_with(letter);
            if full {
                tail = &tail[letter.len_utf8()..];
                if tail.starts_with(letter) {
                    return Err(bad("a piece letter may appear at most twice"));
                }
            }
            pieces.push(TemplatePiece {
                part,
                full,
                suffix_literal: tail.to_string(),
            });
        }
        Ok(NameTemplate { pieces })
    }

    pub fn render(&self, parts: &NameParts) -> String {
        let mut out = String::new();
        for piece in &self.pieces {
            let tokens = parts.part(piece.part);
            if tokens.is_empty() {
                continue;
            }
            if piece.full {
                out.push_str(&tokens.join(" "));
            } else {
                let initials: Vec<String> = tokens.iter().map(|t| initial(t)).collect();
                out.push_str(&initials.join(". "));
            }
            out.push_str(&piece.suffix_literal);
        }
        out
    }
}

/// First character of a token, looking inside a leading brace group.
fn initial(token: &str) -> String {
    token.chars().find(|&c| c != '{').map(String::from).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Word(String),
    Comma,
}

/// Splits on whitespace and commas at brace depth 0. Brace groups stay inside
/// their word.
fn lex_words(text: &str) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut word = String::new();
    let mut depth = 0usize;
    let flush = |word: &mut String, out: &mut Vec<Piece>| {
        if !word.is_empty() {
            out.push(Piece::Word(std::mem::take(word)));
        }
    };
    for c in text.chars() {
        match c {
            '{' => {
                depth += 1;
                word.push(c);
            }
            '}' => {
                depth = depth.saturating_sub(1);
                word.push(c);
            }
            _ if depth == 0 && c.is_whitespace() => flush(&mut word, &mut out),
            ',' if depth == 0 => {
                flush(&mut word, &mut out);
                out.push(Piece::Comma);
            }
            _ => word.push(c),
        }
    }
    flush(&mut word, &mut out);
    out
}

/// Splits an author list on the lowercase word `and` at brace depth 0.
/// Each name comes back trimmed with whitespace runs collapsed; empty names
/// (from leading, trailing, or doubled `and`) are dropped.
pub fn split_names(list: &str) -> Vec<String> {
    let mut names = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut word = String::new();
    let mut depth = 0usize;
    let end_word = |word: &mut String, current: &mut Vec<String>, names: &mut Vec<String>| {
        if word.is_empty() {
            return;
        }
        if word == "and" {
            if !current.is_empty() {
                names.push(current.join(" "));
                current.clear();
            }
            word.clear();
        } else {
            current.push(std::mem::take(word));
        }
    };
    for c in list.chars() {
        match c {
            '{' => {
                depth += 1;
                word.push(c);
            }
            '}' => {
                depth = depth.saturating_sub(1);
                word.push(c);
            }
            _ if depth == 0 && c.is_whitespace() => end_word(&mut word, &mut current, &mut names),
            _ => word.push(c),
        }
    }
    end_word(&mut word, &mut current, &mut names);
    if !current.is_empty() {
        names.push(current.join(" "));
    }
    names
}

pub fn num_names(list: &str) -> usize {
    split_names(list).len()
}

fn is_lowercase_word(word: &str) -> bool {
    if word.starts_with('{') {
        return false;
    }
    word.chars()
        .find(|c| c.is_alphabetic())
        .is_some_and(|c| c.is_lowercase())
}

pub fn parse_name(name: &str) -> Result<NameParts, NameError> {
    let pieces = lex_words(name);
    let mut groups: Vec<Vec<String>> = vec![Vec::new()];
    for p in pieces {
        match p {
            Piece::Word(w) => groups.last_mut().unwrap().push(w),
            Piece::Comma => groups.push(Vec::new()),
        }
    }
    if groups.iter().all(Vec::is_empty) {
        return Err(NameError::Empty(name.to_string()));
    }
    let mut parts = NameParts::default();
    match groups.len() {
        1 => {
            let words = groups.pop().unwrap();
            let n = words.len();
            let lower: Vec<usize> = (0..n - 1).filter(|&i| is_lowercase_word(&words[i])).collect();
            let (von_start, von_end) = match (lower.first(), lower.last()) {
                (Some(&s), Some(&e)) => (s, e + 1),
                _ => (n - 1, n - 1),
            };
            parts.first = words[..von_start].to_vec();
            parts.von = words[von_start..von_end].to_vec();
            parts.last = words[von_end..].to_vec();
        }
        2 | 3 => {
            let first = groups.pop().unwrap();
            if groups.len() == 2 {
                parts.jr = groups.pop().unwrap();
            }
            let (von, last) = split_von_last(groups.pop().unwrap());
            if last.is_empty() {
                return Err(NameError::NoLastPart(name.to_string()));
            }
            parts.first = first;
            parts.von = von;
            parts.last = last;
        }
        _ => return Err(NameError::TooManyCommas(name.to_string())),
    }
    Ok(parts)
}

/// von runs from the start through the last lowercase word before the final word.
fn split_von_last(mut words: Vec<String>) -> (Vec<String>, Vec<String>) {
    if words.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let n = words.len();
    let split = (0..n - 1)
        .rev()
        .find(|&i| is_lowercase_word(&words[i]))
        .map_or(0, |i| i + 1);
    let last = words.split_off(split);
    (words, last)
}

pub fn format_name(name: &str, template: &str) -> Result<String, NameError> {
    let template = NameTemplate::parse(template)?;
    let parts = parse_name(name)?;
    Ok(template.render(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn split_examples() {
        assert_eq!(
            split_names("Stein P. R. and  Ulam S. M."),
            v(&["Stein P. R.", "Ulam S. M."])
        );
        assert_eq!(split_names("H. Poincar\\'e"), v(&["H. Poincar\\'e"]));
        assert_eq!(split_names("{Band and Band} X"), v(&["{Band and Band} X"]));
        assert!(split_names("").is_empty());
        assert_eq!(split_names("A AND B"), v(&["A AND B"]));
        assert_eq!(split_names("and A and and B and"), v(&["A", "B"]));
        assert_eq!(split_names("Anderson and Sand"), v(&["Anderson", "Sand"]));
    }

    #[test]
    fn counts() {
        assert_eq!(num_names("H. Poincar\\'e"), 1);
        assert_eq!(num_names("Stein P. R. and  Ulam S. M."), 2);
        assert_eq!(num_names(""), 0);
        assert_eq!(num_names("   "), 0);
    }

    #[test]
    fn first_von_last() {
        let p = parse_name("H. Poincar\\'e").unwrap();
        assert_eq!(p.first, v(&["H."]));
        assert!(p.von.is_empty());
        assert_eq!(p.last, v(&["Poincar\\'e"]));
        assert!(p.jr.is_empty());

        let p = parse_name("Jean de La Fontaine").unwrap();
        assert_eq!(
            (p.first, p.von, p.last),
            (v(&["Jean"]), v(&["de"]), v(&["La", "Fontaine"]))
        );

        let p = parse_name("Ludwig van der Beethoven").unwrap();
        assert_eq!(p.von, v(&["van", "der"]));

        // The final word is always last, even when lowercase.
        let p = parse_name("de la cruz").unwrap();
        assert_eq!((p.von, p.last), (v(&["de", "la"]), v(&["cruz"])));

        let p = parse_name("{de la Vall\\'ee Poussin} Charles").unwrap();
        assert_eq!(p.first, v(&["{de la Vall\\'ee Poussin}"]));
        assert_eq!(p.last, v(&["Charles"]));
    }

    #[test]
    fn comma_forms() {
        let p = parse_name("Riss, F.").unwrap();
        assert_eq!(
            (p.first, p.von, p.last, p.jr),
            (v(&["F."]), vec![], v(&["Riss"]), vec![])
        );

        let p = parse_name("de la Cruz, Jr., Maria").unwrap();
        assert_eq!(p.von, v(&["de", "la"]));
        assert_eq!(p.last, v(&["Cruz"]));
        assert_eq!(p.jr, v(&["Jr."]));
        assert_eq!(p.first, v(&["Maria"]));

        let p = parse_name("Beethoven,").unwrap();
        assert_eq!(p.last, v(&["Beethoven"]));
        assert!(p.first.is_empty());
    }

    #[test]
    fn name_errors() {
        assert!(matches!(parse_name("a, b, c, d"), Err(NameError::TooManyCommas(_))));
        assert!(matches!(parse_name(" , ,"), Err(NameError::Empty(_))));
        assert!(matches!(parse_name(""), Err(NameError::Empty(_))));
        assert!(matches!(parse_name(", F."), Err(NameError::NoLastPart(_))));
    }

    #[test]
    fn in_first_von_last_form_the_final_word_is_last() {
        // "Ulam S. M." read as First von Last puts "M." in last.
        assert_eq!(format_name("Ulam S. M.", "{ll}").unwrap(), "M.");
        assert_eq!(format_name("Stein P. R.", "{ll}").unwrap(), "R.");
    }

    #[test]
    fn templates() {
        let name = "H. Poincar\\'e";
        assert_eq!(format_name(name, "{ll}").unwrap(), "Poincar\\'e");
        assert_eq!(format_name(name, "{ff}{vv}{ll}{jj}").unwrap(), "H.Poincar\\'e");
        assert_eq!(format_name(name, "{l.}").unwrap(), "P.");
        assert_eq!(format_name(name, "{jj}").unwrap(), "");
        assert_eq!(format_name(name, "{ff}{l.}{jj}").unwrap(), "H.P.");
        assert_eq!(format_name("Yang Tse-Chung", "{f.}").unwrap(), "Y.");
        assert_eq!(format_name("Yang Tse-Chung", "{l}").unwrap(), "T");
        assert_eq!(format_name("Donald Ervin Knuth", "{f.}").unwrap(), "D. E.");
        assert_eq!(
            format_name("Donald Ervin Knuth", "{ff }{ll}").unwrap(),
            "Donald Ervin Knuth"
        );
        assert_eq!(format_name("Knuth, {\\AA}ke", "{f.}").unwrap(), "\\.");
        assert_eq!(
            format_name("de la Cruz, Jr., Maria", "{vv~}{ll}{jj}").unwrap(),
            "de la~CruzJr."
        );
    }

    #[test]
    fn template_errors() {
        for bad in ["{x}", "{fff}", "{ff", "ll}", "{}", "{l{.}}", "x{ll}"] {
            assert!(NameTemplate::parse(bad).is_err(), "{bad} should be rejected");
        }
        let t = NameTemplate::parse("{ff}{vv}{ll}{jj}").unwrap();
        assert_eq!(t.to_string(), "{ff}{vv}{ll}{jj}");
        assert!(NameTemplate::parse("").unwrap().pieces.is_empty());
    }
}
