use serde::Serialize;
use thiserror::Error;

use crate::diagnostic::{Code, Diagnostic};

/// Location of a token or node. `line` and `col` are 1-based; `col` counts
/// bytes, which equal characters since input is ASCII.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    /// Smallest span covering both; `self` must start first.
    pub fn to(self, other: Span) -> Span {
        Span {
            len: other.end().max(self.end()) - self.offset,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenKind {
    Name,
    Number,
    /// `^`
    Lambda,
    /// `->`
    Arrow,
    /// `=>`
    FatArrow,
    /// `=`
    Assign,
    /// `:=`
    Define,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Semi,
    At,
    /// `&name`
    AmpName,
    /// `d` directly followed by the name being differentiated by
    Deriv,
    Plus,
    Minus,
    Star,
    Slash,
    /// `+` alone in an index slot.
    Broadcast,
}

impl TokenKind {
    pub fn describe(self) -> &'static str {
        use TokenKind::*;
        match self {
            Name => "name",
            Number => "number",
            Lambda => "'^'",
            Arrow => "'->'",
            FatArrow => "'=>'",
            Assign => "'='",
            Define => "':='",
            LBracket => "'['",
            RBracket => "']'",
            LParen => "'('",
            RParen => "')'",
            LBrace => "'{'",
            RBrace => "'}'",
            Colon => "':'",
            Comma => "','",
            Semi => "';'",
            At => "'@'",
            AmpName => "builtin",
            Deriv => "'d'",
            Plus | Broadcast => "'+'",
            Minus => "'-'",
            Star => "'*'",
            Slash => "'/'",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub message: String,
    pub line: usize,
    pub col: usize,
    pub span: Span,
}

/// Tokenizes `text`, failing on the first character that starts no token.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let (tokens, diags) = tokenize_lossy(text);
    match diags.into_iter().next() {
        None => Ok(tokens),
        Some(d) => Err(LexError {
            message: d.message,
            line: d.span.line,
            col: d.span.col,
            span: d.span,
        }),
    }
}

/// Tokenizes `text`, skipping (and reporting) characters that start no token.
pub fn tokenize_lossy(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    Lexer::new(text).run()
}

fn is_name_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_name_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

struct Lexer<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
    tokens: Vec<Token>,
    diags: Vec<Diagnostic>,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
            line_start: 0,
            tokens: Vec::new(),
            diags: Vec::new(),
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn span(&self, start: usize, len: usize) -> Span {
        Span {
            offset: start,
            len,
            line: self.line,
            col: start - self.line_start + 1,
        }
    }

    fn push(&mut self, kind: TokenKind, len: usize) {
        let span = self.span(self.pos, len);
        self.tokens.push(Token {
            kind,
            text: self.text[self.pos..self.pos + len].to_string(),
            span,
        });
        self.pos += len;
    }

    /// Next byte after `from` that is not a space or tab.
    fn next_on_line(&self, from: usize) -> Option<u8> {
        self.bytes[from..]
            .iter()
            .copied()
            .find(|c| *c != b' ' && *c != b'\t')
    }

    fn run(mut self) -> (Vec<Token>, Vec<Diagnostic>) {
        while let Some(c) = self.peek(0) {
            match c {
                b'\n' => {
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                b' ' | b'\t' | b'\r' => self.pos += 1,
                b'#' => {
                    while self.peek(0).is_some_and(|c| c != b'\n') {
                        self.pos += 1;
                    }
                }
                b'0'..=b'9' => self.number(),
                b'.' if self.peek(1).is_some_and(|c| c.is_ascii_digit()) => self.number(),
                b'd' if self.is_deriv() => self.push(TokenKind::Deriv, 1),
                c if is_name_start(c) => {
                    let len = self.bytes[self.pos..]
                        .iter()
                        .take_while(|c| is_name_char(**c))
                        .count();
                    self.push(TokenKind::Name, len);
                }
                b'&' if self.peek(1).is_some_and(is_name_start) => {
                    let len = 1 + self.bytes[self.pos + 1..]
                        .iter()
                        .take_while(|c| is_name_char(**c))
                        .count();
                    self.push(TokenKind::AmpName, len);
                }
                b'-' if self.peek(1) == Some(b'>') => self.push(TokenKind::Arrow, 2),
                b'=' if self.peek(1) == Some(b'>') => self.push(TokenKind::FatArrow, 2),
                b':' if self.peek(1) == Some(b'=') => self.push(TokenKind::Define, 2),
                b'+' if self.is_broadcast() => self.push(TokenKind::Broadcast, 1),
                _ => match single(c) {
                    Some(kind) => self.push(kind, 1),
                    None => self.bad_char(),
                },
            }
        }
        (self.tokens, self.diags)
    }

    /// `d` followed by spaces and then a name, as in `d y[:]`. A bare `d`
    /// before `]`, `:` or an operator is an ordinary name.
    fn is_deriv(&self) -> bool {
        if self.peek(1).is_some_and(is_name_char) {
            return false;
        }
        let gap = self.bytes[self.pos + 1..]
            .iter()
            .take_while(|c| **c == b' ' || **c == b'\t')
            .count();
        gap > 0 && self.peek(1 + gap).is_some_and(is_name_start)
    }

    /// `+` between `[`/`,` and `,`/`]`.
    fn is_broadcast(&self) -> bool {
        let after_open = self
            .tokens
            .last()
            .is_some_and(|t| matches!(t.kind, TokenKind::LBracket | TokenKind::Comma));
        after_open && matches!(self.next_on_line(self.pos + 1), Some(b',' | b']'))
    }

    fn number(&mut self) {
        let b = self.bytes;
        let mut end = self.pos;
        while end < b.len() && b[end].is_ascii_digit() {
            end += 1;
        }
        if end < b.len() && b[end] == b'.' {
            end += 1;
            while end < b.len() && b[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < b.len() && (b[end] == b'e' || b[end] == b'E') {
            let mut e = end + 1;
            if e < b.len() && (b[e] == b'+' || b[e] == b'-') {
                e += 1;
            }
            if e < b.len() && b[e].is_ascii_digit() {
                while e < b.len() && b[e].is_ascii_digit() {
                    e += 1;
                }
                end = e;
            }
        }
        self.push(TokenKind::Number, end - self.pos);
    }

    fn bad_char(&mut self) {
        // one diagnostic per run of unusable bytes, including a whole
        // multi-byte character
        let start = self.pos;
        let ch = self.text[start..].chars().next().expect("not at end");
        let message = if ch.is_ascii() {
            format!("unexpected character '{}'", ch.escape_default())
        } else {
            format!("non-ASCII character U+{:04X}", ch as u32)
        };
        self.pos += ch.len_utf8();
        let span = self.span(start, ch.len_utf8());
        self.diags.push(Diagnostic::error(Code::Lex, message, span));
    }
}

fn single(c: u8) -> Option<TokenKind> {
    use TokenKind::*;
    Some(match c {
        b'^' => Lambda,
        b'=' => Assign,
        b'[' => LBracket,
        b']' => RBracket,
        b'(' => LParen,
        b')' => RParen,
        b'{' => LBrace,
        b'}' => RBrace,
        b':' => Colon,
        b',' => Comma,
        b';' => Semi,
        b'@' => At,
        b'+' => Plus,
        b'-' => Minus,
        b'*' => Star,
        b'/' => Slash,
        _ => return None,
    })
}
