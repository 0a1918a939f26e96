use std::fmt;

use super::{codes, Diagnostic};
use crate::model::SourceSpan;

/// Reserved words. None of these may be used as an identifier.
pub const KEYWORDS: &[&str] = &[
    "model", "class", "description", "uri", "icon", "attr", "required", "method", "str", "int",
    "float", "bool", "date", "datetime", "enum", "association", "agent", "intent", "state",
    "initial", "say", "call", "llm", "on", "auto", "fallback", "page", "style", "table", "binds",
    "columns", "form", "creates", "button", "invokes", "chart", "kind", "x", "y", "bar", "line",
    "pie", "chat",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Keyword(&'static str),
    Str(String),
    Int(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Dot,
    DotDot,
    Arrow,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Keyword(k) => write!(f, "keyword `{k}`"),
            Tok::Str(_) => f.write_str("string literal"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

/// Splits `src` into tokens. Lexical errors are reported as E900 and the
/// offending input is skipped, so the token stream always ends with `Eof`.
pub(crate) fn tokenize(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor { chars: src.chars().peekable(), line: 1, column: 1 };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    loop {
        let Some(c) = cur.peek() else { break };
        let (line, column) = (cur.line, cur.column);
        let span_to = |cur: &Cursor<'_>| {
            let length = if cur.line == line { cur.column - column } else { 1 };
            SourceSpan::new(line, column, length)
        };

        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' {
            cur.bump();
            if cur.peek() == Some('/') {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                diags.push(Diagnostic::error(codes::E900, "illegal character '/'", span_to(&cur)));
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            };
            tokens.push(Token { tok, span: span_to(&cur) });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                digits.push(c);
                cur.bump();
            }
            let span = span_to(&cur);
            match digits.parse::<u64>() {
                Ok(n) => tokens.push(Token { tok: Tok::Int(n), span }),
                Err(_) => diags.push(Diagnostic::error(codes::E900, "integer literal too large", span)),
            }
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut text = String::new();
            let mut terminated = false;
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
                match c {
                    '"' => {
                        terminated = true;
                        break;
                    }
                    '\\' => {
                        let esc_col = cur.column - 1;
                        match cur.peek() {
                            Some('"') => text.push('"'),
                            Some('\\') => text.push('\\'),
                            Some('n') => text.push('\n'),
                            other => {
                                let shown = other.map(|o| o.to_string()).unwrap_or_default();
                                diags.push(Diagnostic::error(
                                    codes::E900,
                                    format!("unknown escape sequence '\\{shown}'"),
                                    SourceSpan::new(cur.line, esc_col, 2),
                                ));
                                if other.is_none() || other == Some('\n') {
                                    continue;
                                }
                            }
                        }
                        cur.bump();
                    }
                    c => text.push(c),
                }
            }
            let span = span_to(&cur);
            if !terminated {
                diags.push(Diagnostic::error(codes::E900, "unterminated string literal", span));
            }
            tokens.push(Token { tok: Tok::Str(text), span });
            continue;
        }

        cur.bump();
        let two = |cur: &mut Cursor<'_>, next: char| {
            if cur.peek() == Some(next) {
                cur.bump();
                true
            } else {
                false
            }
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '*' => Tok::Star,
            '.' if two(&mut cur, '.') => Tok::DotDot,
            '.' => Tok::Dot,
            '-' if two(&mut cur, '>') => Tok::Arrow,
            other => {
                diags.push(Diagnostic::error(
                    codes::E900,
                    format!("illegal character '{}'", other.escape_debug()),
                    span_to(&cur),
                ));
                continue;
            }
        };
        tokens.push(Token { tok, span: span_to(&cur) });
    }

    tokens.push(Token { tok: Tok::Eof, span: SourceSpan::new(cur.line, cur.column, 0) });
    (tokens, diags)
}
