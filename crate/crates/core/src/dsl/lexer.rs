//! Line-oriented tokenizer for `.im` files.

use super::ast::Span;
use super::diagnostics::ParseDiagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Integer, fraction or decimal literal, optionally negative, kept verbatim.
    Number(String),
    /// `[name]` at the start of a line.
    Header(String),
    Assign,
    EqEq,
    NotEq,
    And,
    Or,
    Bang,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Arrow,
    Newline,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) | TokenKind::Number(s) => format!("`{s}`"),
            TokenKind::Header(s) => format!("`[{s}]`"),
            TokenKind::Newline => "end of line".into(),
            TokenKind::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> String {
        match self {
            TokenKind::Ident(s) | TokenKind::Number(s) => s.clone(),
            TokenKind::Header(s) => format!("[{s}]"),
            TokenKind::Assign => "=".into(),
            TokenKind::EqEq => "==".into(),
            TokenKind::NotEq => "!=".into(),
            TokenKind::And => "&".into(),
            TokenKind::Or => "|".into(),
            TokenKind::Bang => "!".into(),
            TokenKind::LParen => "(".into(),
            TokenKind::RParen => ")".into(),
            TokenKind::LBracket => "[".into(),
            TokenKind::RBracket => "]".into(),
            TokenKind::Comma => ",".into(),
            TokenKind::Colon => ":".into(),
            TokenKind::Arrow => "->".into(),
            TokenKind::Newline => "\n".into(),
            TokenKind::Eof => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `text` into tokens. Unknown characters produce a diagnostic and are skipped.
pub fn tokenize(text: &str) -> (Vec<Token>, Vec<ParseDiagnostic>) {
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let mut last = Span::new(1, 1);
    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line: Vec<char> = raw_line.trim_end_matches('\r').chars().collect();
        let mut i = 0;
        let mut at_line_start = true;
        let mut emitted = false;
        while i < line.len() {
            let c = line[i];
            let span = Span::new(line_no, i + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            let kind = if c == '[' && at_line_start {
                // Section header: `[name]` alone on the line.
                let close = line[i..].iter().position(|&ch| ch == ']').map(|p| p + i);
                let name: String = match close {
                    Some(end) => line[i + 1..end].iter().collect(),
                    None => String::new(),
                };
                let rest_blank = close.is_some_and(|end| {
                    line[end + 1..]
                        .iter()
                        .take_while(|&&ch| ch != '#')
                        .all(|ch| ch.is_whitespace())
                });
                let word = name.trim();
                if rest_blank && !word.is_empty() && word.chars().all(is_ident_char) {
                    i = close.unwrap_or(i) + 1;
                    TokenKind::Header(word.to_string())
                } else {
                    i += 1;
                    TokenKind::LBracket
                }
            } else if is_ident_start(c) {
                while i < line.len() && is_ident_char(line[i]) {
                    i += 1;
                }
                TokenKind::Ident(line[start..i].iter().collect())
            } else if c.is_ascii_digit()
                || (c == '-' && line.get(i + 1).is_some_and(char::is_ascii_digit))
            {
                i += 1;
                while i < line.len()
                    && (line[i].is_ascii_digit() || line[i] == '/' || line[i] == '.')
                {
                    i += 1;
                }
                TokenKind::Number(line[start..i].iter().collect())
            } else {
                let next = line.get(i + 1).copied();
                let (kind, width) = match (c, next) {
                    ('=', Some('=')) => (TokenKind::EqEq, 2),
                    ('!', Some('=')) => (TokenKind::NotEq, 2),
                    ('-', Some('>')) => (TokenKind::Arrow, 2),
                    ('=', _) => (TokenKind::Assign, 1),
                    ('!', _) => (TokenKind::Bang, 1),
                    ('&', _) => (TokenKind::And, 1),
                    ('|', _) => (TokenKind::Or, 1),
                    ('(', _) => (TokenKind::LParen, 1),
                    (')', _) => (TokenKind::RParen, 1),
                    ('[', _) => (TokenKind::LBracket, 1),
                    (']', _) => (TokenKind::RBracket, 1),
                    (',', _) => (TokenKind::Comma, 1),
                    (':', _) => (TokenKind::Colon, 1),
                    _ => {
                        diagnostics.push(ParseDiagnostic::error(
                            span,
                            format!("unexpected character `{c}`"),
                            Some(c.to_string()),
                        ));
                        i += 1;
                        continue;
                    }
                };
                i += width;
                kind
            };
            at_line_start = false;
            emitted = true;
            tokens.push(Token { kind, span });
        }
        let end = Span::new(line_no, line.len() + 1);
        if emitted {
            tokens.push(Token {
                kind: TokenKind::Newline,
                span: end,
            });
        }
        last = end;
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: last,
    });
    (tokens, diagnostics)
}
