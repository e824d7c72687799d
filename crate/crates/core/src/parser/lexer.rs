use std::fmt;

use super::ParseError;
use crate::model::SourcePos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Style,
    Configuration,
    Component,
    Connector,
    Port,
    Role,
    Glue,
    Computation,
    Where,
    End,
    Instances,
    Attachments,
    As,
}

impl Keyword {
    fn lookup(word: &str) -> Option<Keyword> {
        let kw = match word.to_ascii_lowercase().as_str() {
            "style" => Keyword::Style,
            "configuration" => Keyword::Configuration,
            "component" => Keyword::Component,
            "connector" => Keyword::Connector,
            "port" => Keyword::Port,
            "role" => Keyword::Role,
            "glue" => Keyword::Glue,
            "computation" => Keyword::Computation,
            "where" => Keyword::Where,
            "end" => Keyword::End,
            "instances" => Keyword::Instances,
            "attachments" => Keyword::Attachments,
            "as" => Keyword::As,
            _ => return None,
        };
        Some(kw)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    /// `A.b` without a polarity marker.
    Dotted(Vec<String>),
    /// `_a` or `_A.b`; segments exclude the underscore.
    InitEvent(Vec<String>),
    Arrow,
    ExtChoice,
    IntChoice,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Equals,
    Comma,
    Colon,
    Tick,
    /// A Constraints section; its body has already been skipped.
    Constraints,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "keyword `{k:?}`"),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Dotted(s) => write!(f, "`{}`", s.join(".")),
            TokenKind::InitEvent(s) => write!(f, "initiated event `_{}`", s.join(".")),
            TokenKind::Arrow => f.write_str("`->`"),
            TokenKind::ExtChoice => f.write_str("`[]`"),
            TokenKind::IntChoice => f.write_str("`|~|`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::Equals => f.write_str("`=`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Colon => f.write_str("`:`"),
            TokenKind::Tick => f.write_str("`TICK`"),
            TokenKind::Constraints => f.write_str("keyword `Constraints`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: SourcePos,
}

struct Cursor<'a> {
    src: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.src.get(self.at + n).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.at += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if c & 0xC0 != 0x80 {
            // count characters, not UTF-8 continuation bytes
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> SourcePos {
        SourcePos::new(self.line, self.col)
    }

    fn starts_with_ci(&self, word: &str) -> bool {
        let end = self.at + word.len();
        end <= self.src.len() && self.src[self.at..end].eq_ignore_ascii_case(word.as_bytes())
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { src: source.as_bytes(), at: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                cur.bump();
            }
            b'/' if cur.peek_at(1) == Some(b'/') => {
                while let Some(c) = cur.peek() {
                    if c == b'\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            b'-' if cur.peek_at(1) == Some(b'>') => {
                cur.bump();
                cur.bump();
                out.push(Token { kind: TokenKind::Arrow, pos });
            }
            b'[' if cur.peek_at(1) == Some(b']') => {
                cur.bump();
                cur.bump();
                out.push(Token { kind: TokenKind::ExtChoice, pos });
            }
            b'|' if cur.peek_at(1) == Some(b'~') && cur.peek_at(2) == Some(b'|') => {
                cur.bump();
                cur.bump();
                cur.bump();
                out.push(Token { kind: TokenKind::IntChoice, pos });
            }
            b'(' | b')' | b'{' | b'}' | b'=' | b',' | b':' => {
                cur.bump();
                let kind = match c {
                    b'(' => TokenKind::LParen,
                    b')' => TokenKind::RParen,
                    b'{' => TokenKind::LBrace,
                    b'}' => TokenKind::RBrace,
                    b'=' => TokenKind::Equals,
                    b',' => TokenKind::Comma,
                    _ => TokenKind::Colon,
                };
                out.push(Token { kind, pos });
            }
            c if is_ident_start(c) => {
                let kind = lex_name(&mut cur, pos)?;
                let is_constraints = matches!(&kind, TokenKind::Ident(w) if w.eq_ignore_ascii_case("constraints"));
                if is_constraints {
                    skip_constraints(&mut cur, pos)?;
                    out.push(Token { kind: TokenKind::Constraints, pos });
                } else {
                    out.push(Token { kind, pos });
                }
            }
            _ => {
                let ch = source[cur.at..].chars().next().unwrap_or('?');
                return Err(ParseError::new(pos, format!("illegal character `{ch}`")));
            }
        }
    }
    Ok(out)
}

fn lex_name(cur: &mut Cursor<'_>, pos: SourcePos) -> Result<TokenKind, ParseError> {
    let initiated = cur.peek() == Some(b'_');
    if initiated {
        cur.bump();
        if !cur.peek().is_some_and(is_ident_start) {
            return Err(ParseError::new(pos, "`_` must be followed by an event name"));
        }
    }
    let mut segments = Vec::new();
    loop {
        let start = cur.at;
        while cur.peek().is_some_and(is_ident_char) {
            cur.bump();
        }
        segments.push(String::from_utf8_lossy(&cur.src[start..cur.at]).into_owned());
        if cur.peek() == Some(b'.') && cur.peek_at(1).is_some_and(is_ident_start) {
            cur.bump();
        } else {
            break;
        }
    }
    if initiated {
        return Ok(TokenKind::InitEvent(segments));
    }
    if segments.len() > 1 {
        return Ok(TokenKind::Dotted(segments));
    }
    let word = segments.pop().unwrap();
    if word.eq_ignore_ascii_case("tick") || word.eq_ignore_ascii_case("skip") {
        return Ok(TokenKind::Tick);
    }
    Ok(match Keyword::lookup(&word) {
        Some(k) => TokenKind::Keyword(k),
        None => TokenKind::Ident(word),
    })
}

/// Skip everything up to (not including) the `End Style` that closes the section.
fn skip_constraints(cur: &mut Cursor<'_>, pos: SourcePos) -> Result<(), ParseError> {
    let mut at_word_start = true;
    while let Some(c) = cur.peek() {
        if at_word_start && cur.starts_with_ci("end") && !cur.peek_at(3).is_some_and(is_ident_char) {
            let mut k = 3;
            while matches!(cur.peek_at(k), Some(b' ' | b'\t' | b'\r' | b'\n')) {
                k += 1;
            }
            let save = cur.at;
            cur.at += k;
            let closes = cur.starts_with_ci("style") && !cur.peek_at(5).is_some_and(is_ident_char);
            cur.at = save;
            if k > 3 && closes {
                return Ok(());
            }
        }
        at_word_start = !is_ident_char(c);
        cur.bump();
    }
    Err(ParseError::new(pos, "Constraints section is not closed by `End Style`"))
}
