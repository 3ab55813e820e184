//! A minimal S-expression reader with source positions.
//!
//! All the bracketed grammars of the crate (programs, values, certificates,
//! belief statements) share this reader. It only knows about three kinds of
//! datum: bare atoms, double-quoted strings and parenthesised lists.
//! Interpreting heads and arities is left to the callers.

use std::fmt;

/// Maximum list nesting accepted by the reader.
pub const MAX_NESTING: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {pos}: {reason}")]
pub struct ParseError {
    pub pos: Pos,
    pub reason: String,
}

impl ParseError {
    pub fn new(pos: Pos, reason: impl Into<String>) -> Self {
        ParseError {
            pos,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Datum {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sexp {
    pub pos: Pos,
    pub datum: Datum,
}

impl Sexp {
    pub fn error(&self, reason: impl Into<String>) -> ParseError {
        ParseError::new(self.pos, reason)
    }

    pub fn as_atom(&self) -> Option<&str> {
        match &self.datum {
            Datum::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn expect_str(&self) -> Result<&str, ParseError> {
        match &self.datum {
            Datum::Str(s) => Ok(s),
            _ => Err(self.error("expected a string literal")),
        }
    }

    pub fn expect_name(&self) -> Result<&str, ParseError> {
        match self.as_atom() {
            Some(a) if is_identifier(a) => Ok(a),
            Some(a) => Err(self.error(format!("invalid identifier `{a}`"))),
            None => Err(self.error("expected an identifier")),
        }
    }

    pub fn expect_nat(&self) -> Result<u64, ParseError> {
        match self.as_atom() {
            Some(a) => parse_nat(a).ok_or_else(|| self.error(format!("invalid natural `{a}`"))),
            None => Err(self.error("expected a natural number")),
        }
    }

    /// Splits `(head args...)` into its head atom and arguments.
    pub fn expect_form(&self) -> Result<(&str, &[Sexp]), ParseError> {
        match &self.datum {
            Datum::List(items) => match items.split_first() {
                Some((head, rest)) => match head.as_atom() {
                    Some(h) => Ok((h, rest)),
                    None => Err(head.error("expected a head keyword")),
                },
                None => Err(self.error("empty list")),
            },
            _ => Err(self.error("expected a parenthesised form")),
        }
    }

    pub fn expect_list(&self) -> Result<&[Sexp], ParseError> {
        match &self.datum {
            Datum::List(items) => Ok(items),
            _ => Err(self.error("expected a list")),
        }
    }
}

/// Checks `args` has exactly `n` elements.
pub fn arity<'a>(form: &Sexp, head: &str, args: &'a [Sexp], n: usize) -> Result<&'a [Sexp], ParseError> {
    if args.len() == n {
        Ok(args)
    } else {
        Err(form.error(format!(
            "`{head}` takes {n} argument(s), found {}",
            args.len()
        )))
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

/// Decimal natural without redundant leading zeros.
pub fn parse_nat(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return None;
    }
    s.parse().ok()
}

/// Writes `s` as a double-quoted literal, escaping `"` and `\`.
pub fn write_quoted(out: &mut String, s: &str) {
    out.reserve(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

pub fn quoted(s: &str) -> String {
    let mut out = String::new();
    write_quoted(&mut out, s);
    out
}

struct Reader<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn datum(&mut self, depth: usize) -> Result<Sexp, ParseError> {
        self.skip_ws();
        let pos = self.pos();
        match self.peek() {
            None => Err(ParseError::new(pos, "unexpected end of input")),
            Some('(') => {
                if depth >= MAX_NESTING {
                    return Err(ParseError::new(pos, "nesting too deep"));
                }
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return Err(ParseError::new(pos, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        Some(_) => items.push(self.datum(depth + 1)?),
                    }
                }
                Ok(Sexp {
                    pos,
                    datum: Datum::List(items),
                })
            }
            Some(')') => Err(ParseError::new(pos, "unexpected `)`")),
            Some('"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(ParseError::new(pos, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            let esc = self.pos();
                            match self.bump() {
                                Some(c @ ('"' | '\\')) => s.push(c),
                                Some(c) => {
                                    return Err(ParseError::new(esc, format!("invalid escape `\\{c}`")))
                                }
                                None => return Err(ParseError::new(pos, "unterminated string")),
                            }
                        }
                        Some(c) => s.push(c),
                    }
                }
                Ok(Sexp {
                    pos,
                    datum: Datum::Str(s),
                })
            }
            Some(_) => {
                let start = self.offset;
                while matches!(self.peek(), Some(c) if !c.is_ascii_whitespace() && c != '(' && c != ')' && c != '"')
                {
                    self.bump();
                }
                Ok(Sexp {
                    pos,
                    datum: Datum::Atom(self.src[start..self.offset].to_string()),
                })
            }
        }
    }
}

/// Reads exactly one datum from `src`; trailing non-whitespace is an error.
pub fn read(src: &str) -> Result<Sexp, ParseError> {
    let mut reader = Reader {
        src,
        offset: 0,
        line: 1,
        col: 1,
    };
    let datum = reader.datum(0)?;
    reader.skip_ws();
    if reader.peek().is_some() {
        return Err(ParseError::new(reader.pos(), "trailing input after datum"));
    }
    Ok(datum)
}
