//! Tokenizer shared by the skillset, layer-model and LTL front ends.

use crate::diag::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Int(n) => format!("`{n}`"),
            TokenKind::Sym(s) => format!("`{s}`"),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

// Longest match first.
const SYMBOLS: &[&str] = &[
    "->", "==", "!=", "&&", "||", "<=", ">=", ":=", "{", "}", "(", ")", "[", "]", ",", ":", "!",
    "<", ">", "+", "-", "*", "@",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut rest = text;

    while let Some(c) = rest.chars().next() {
        let span = Span::new(line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if rest.starts_with("//") {
            let end = rest.find('\n').unwrap_or(rest.len());
            col += rest[..end].chars().count() as u32;
            rest = &rest[end..];
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            tokens.push(Token {
                kind: TokenKind::Ident(rest[..end].to_string()),
                span,
            });
            col += end as u32;
            rest = &rest[end..];
            continue;
        }
        if c.is_ascii_digit() {
            let end = rest
                .find(|ch: char| !ch.is_ascii_digit())
                .unwrap_or(rest.len());
            let value: i64 = rest[..end]
                .parse()
                .map_err(|_| Diagnostic::error(span, "integer literal out of range"))?;
            tokens.push(Token {
                kind: TokenKind::Int(value),
                span,
            });
            col += end as u32;
            rest = &rest[end..];
            continue;
        }
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                tokens.push(Token {
                    kind: TokenKind::Sym(sym),
                    span,
                });
                col += sym.len() as u32;
                rest = &rest[sym.len()..];
            }
            None => return Err(Diagnostic::error(span, format!("illegal character {c:?}"))),
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span::new(line, col),
    });
    Ok(tokens)
}

/// Cursor over a token vector with the expectation helpers every
/// recursive-descent parser in this crate needs.
pub struct Cursor<'k> {
    tokens: Vec<Token>,
    pos: usize,
    keywords: &'k [&'k str],
}

impl<'k> Cursor<'k> {
    pub fn new(tokens: Vec<Token>, keywords: &'k [&'k str]) -> Self {
        Cursor {
            tokens,
            pos: 0,
            keywords,
        }
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub fn peek_at(&self, offset: usize) -> &Token {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx]
    }

    pub fn span(&self) -> Span {
        self.peek().span
    }

    pub fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    pub fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    pub fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek().kind, TokenKind::Sym(s) if s == sym)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    pub fn is_ident(&self) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if !self.keywords.contains(&s.as_str()))
    }

    pub fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn unexpected(&self, expected: &[&str]) -> Diagnostic {
        let tok = self.peek();
        let list = expected.join(", ");
        Diagnostic::error(
            tok.span,
            format!("unexpected {}, expected one of: {list}", tok.describe()),
        )
    }

    pub fn expect_sym(&mut self, sym: &str) -> Result<Span, Diagnostic> {
        if self.is_sym(sym) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[&format!("`{sym}`")]))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<Span, Diagnostic> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")]))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Span), Diagnostic> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Ident(s) if !self.keywords.contains(&s.as_str()) => {
                self.bump();
                Ok((s, tok.span))
            }
            TokenKind::Ident(s) => Err(Diagnostic::error(
                tok.span,
                format!("unexpected keyword `{s}`, expected one of: identifier"),
            )),
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    pub fn expect_int(&mut self) -> Result<(i64, Span), Diagnostic> {
        let span = self.span();
        let negative = self.eat_sym("-");
        match self.peek().kind {
            TokenKind::Int(n) => {
                self.bump();
                Ok((if negative { -n } else { n }, span))
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    pub fn expect_eof(&self) -> Result<(), Diagnostic> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input"]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_symbol_wins() {
        let toks = tokenize("a->b != c := -1").unwrap();
        let kinds: Vec<_> = toks.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Sym("->"),
                TokenKind::Ident("b".into()),
                TokenKind::Sym("!="),
                TokenKind::Ident("c".into()),
                TokenKind::Sym(":="),
                TokenKind::Sym("-"),
                TokenKind::Int(1),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn comments_and_spans() {
        let toks = tokenize("// header\n  foo // trailing\nbar").unwrap();
        assert_eq!(toks[0].span, Span::new(2, 3));
        assert_eq!((toks[0].span.line, toks[0].span.column), (2, 3));
        assert_eq!((toks[1].span.line, toks[1].span.column), (3, 1));
    }

    #[test]
    fn illegal_character_reports_location() {
        let err = tokenize("skillset x {\n  $ }").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (2, 3));
        assert!(err.message.contains("illegal character"));
    }

    #[test]
    fn huge_integer_is_an_error_not_a_panic() {
        assert!(tokenize("99999999999999999999999").is_err());
    }
}
