//! Tokenizer shared by the textual formats (PPR, expressions, DM, CDC,
//! function-block networks, deltas). Each reader consumes the subset of
//! tokens its grammar uses.

use crate::diag::{Diagnostic, Pos};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Number(String),
    Colon,
    Comma,
    Semi,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Dot,
    Hash,
    Bang,
    Amp,
    AmpAmp,
    Bar,
    BarBar,
    FatArrow,
    EqEq,
    Eq,
    Arrow,
    Lt,
    Gt,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Str(s) => return write!(f, "string {s:?}"),
            Tok::Number(s) => return write!(f, "number {s}"),
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Dot => ".",
            Tok::Hash => "#",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::AmpAmp => "&&",
            Tok::Bar => "|",
            Tok::BarBar => "||",
            Tok::FatArrow => "=>",
            Tok::EqEq => "==",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::Lt => "<",
            Tok::Gt => ">",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// True if `s` lexes as a single identifier token.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    tokenize_at(src, Pos::START)
}

/// Tokenizes `src` as if it started at `origin`; used for expressions
/// embedded in string literals so positions point into the outer file.
pub fn tokenize_at(src: &str, origin: Pos) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = origin.line;
    let mut col = origin.column;

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                advance!();
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), pos });
            continue;
        }
        let negative_number = c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || negative_number {
            let start = i;
            advance!();
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || (chars[i] == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())))
            {
                advance!();
            }
            out.push(Token { tok: Tok::Number(chars[start..i].iter().collect()), pos });
            continue;
        }
        if c == '"' {
            advance!();
            let mut s = String::new();
            loop {
                let Some(&ch) = chars.get(i) else {
                    return Err(Diagnostic::error("syntax", "unterminated string literal").at(pos));
                };
                match ch {
                    '"' => {
                        advance!();
                        break;
                    }
                    '\\' => {
                        advance!();
                        let esc = chars
                            .get(i)
                            .copied()
                            .ok_or_else(|| Diagnostic::error("syntax", "unterminated string literal").at(pos))?;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        advance!();
                    }
                    '\n' => {
                        return Err(Diagnostic::error("syntax", "newline in string literal").at(pos));
                    }
                    other => {
                        s.push(other);
                        advance!();
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), pos });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('&', Some('&')) => (Tok::AmpAmp, 2),
            ('|', Some('|')) => (Tok::BarBar, 2),
            ('=', Some('>')) => (Tok::FatArrow, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('.', _) => (Tok::Dot, 1),
            ('#', _) => (Tok::Hash, 1),
            ('!', _) => (Tok::Bang, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Bar, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            _ => return Err(Diagnostic::error("syntax", format!("unexpected character {c:?}")).at(pos)),
        };
        for _ in 0..width {
            advance!();
        }
        out.push(Token { tok, pos });
    }
    Ok(out)
}

/// Position-tracking cursor over a token slice.
pub struct Cursor<'a> {
    toks: &'a [Token],
    idx: usize,
    end: Pos,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], end: Pos) -> Self {
        Cursor { toks, idx: 0, end }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    pub fn peek_at(&self, ahead: usize) -> Option<&'a Tok> {
        self.toks.get(self.idx + ahead).map(|t| &t.tok)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.idx).map_or(self.end, |t| t.pos)
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.idx);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn unexpected(&self, wanted: &str) -> Diagnostic {
        let found = match self.peek() {
            Some(t) => t.to_string(),
            None => "end of input".to_string(),
        };
        Diagnostic::error("syntax", format!("expected {wanted}, found {found}")).at(self.pos())
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Pos, Diagnostic> {
        let pos = self.pos();
        if self.eat(tok) {
            Ok(pos)
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn ident(&mut self) -> Result<String, Diagnostic> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.idx += 1;
                Ok(s.clone())
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn string(&mut self) -> Result<String, Diagnostic> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                self.idx += 1;
                Ok(s.clone())
            }
            _ => Err(self.unexpected("a string literal")),
        }
    }

    /// Consumes `word` if the next token is that identifier.
    pub fn eat_keyword(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == word) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_keyword(&mut self, word: &str) -> Result<(), Diagnostic> {
        if self.eat_keyword(word) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }
}

/// Position just past the last character of `src`.
pub fn end_pos(src: &str) -> Pos {
    let mut pos = Pos::START;
    for c in src.chars() {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    }
    pos
}

/// Quotes `s` as a string literal the tokenizer reads back verbatim.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_words() {
        assert_eq!(
            kinds("a#b => !c && d || e == f -> g"),
            vec![
                Tok::Ident("a".into()),
                Tok::Hash,
                Tok::Ident("b".into()),
                Tok::FatArrow,
                Tok::Bang,
                Tok::Ident("c".into()),
                Tok::AmpAmp,
                Tok::Ident("d".into()),
                Tok::BarBar,
                Tok::Ident("e".into()),
                Tok::EqEq,
                Tok::Ident("f".into()),
                Tok::Arrow,
                Tok::Ident("g".into()),
            ]
        );
    }

    #[test]
    fn strings_comments_and_positions() {
        let toks = tokenize("// header\n  \"a\\\"b\" 12.5 -3").unwrap();
        assert_eq!(toks[0].tok, Tok::Str("a\"b".into()));
        assert_eq!(toks[0].pos, Pos { line: 2, column: 3 });
        assert_eq!(toks[1].tok, Tok::Number("12.5".into()));
        assert_eq!(toks[2].tok, Tok::Number("-3".into()));
    }

    #[test]
    fn unterminated_string_reports_position() {
        let err = tokenize("x \"abc").unwrap_err();
        assert_eq!(err.pos, Some(Pos { line: 1, column: 3 }));
    }

    #[test]
    fn quote_round_trips() {
        let s = "we\"ird\\ \n text";
        let toks = tokenize(&quote(s)).unwrap();
        assert_eq!(toks[0].tok, Tok::Str(s.into()));
    }
}
