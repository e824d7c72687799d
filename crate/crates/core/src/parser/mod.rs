//! Wright concrete syntax: tokenizer, recursive-descent parser and the
//! canonical printer used for round trips.

mod lexer;
mod print;

use std::fmt;

use thiserror::Error;

pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use print::to_wright;

use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: SourcePos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: SourcePos, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub pos: SourcePos,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub spec: ArchSpec,
    pub warnings: Vec<ParseWarning>,
}

pub fn parse_source(source: &str) -> Result<Parsed, ParseError> {
    parse(&tokenize(source)?)
}

pub fn parse(tokens: &[Token]) -> Result<Parsed, ParseError> {
    let mut p = Parser { tokens, at: 0, warnings: Vec::new() };
    let spec = p.spec()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::new(t.pos, format!("unexpected {} after end of specification", t.kind)));
    }
    Ok(Parsed { spec, warnings: p.warnings })
}

struct Parser<'t> {
    tokens: &'t [Token],
    at: usize,
    warnings: Vec<ParseWarning>,
}

#[derive(Clone, Copy, PartialEq)]
enum ChoiceOp {
    External,
    Internal,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.at)
    }

    fn peek_kind(&self) -> Option<&'t TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn peek_kind_at(&self, n: usize) -> Option<&'t TokenKind> {
        self.tokens.get(self.at + n).map(|t| &t.kind)
    }

    fn here(&self) -> SourcePos {
        match self.peek() {
            Some(t) => t.pos,
            None => self.tokens.last().map(|t| t.pos).unwrap_or(SourcePos::new(1, 1)),
        }
    }

    fn next(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.at);
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let found = match self.peek() {
            Some(t) => t.kind.to_string(),
            None => "end of input".to_string(),
        };
        Err(ParseError::new(self.here(), format!("expected {expected}, found {found}")))
    }

    fn at_keyword(&self, k: Keyword) -> bool {
        self.peek_kind() == Some(&TokenKind::Keyword(k))
    }

    fn keyword(&mut self, k: Keyword) -> Result<SourcePos, ParseError> {
        if self.at_keyword(k) {
            Ok(self.next().unwrap().pos)
        } else {
            self.error(&format!("`{k:?}`"))
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<SourcePos, ParseError> {
        if self.peek_kind() == Some(&kind) {
            Ok(self.next().unwrap().pos)
        } else {
            self.error(&kind.to_string())
        }
    }

    fn ident(&mut self, what: &str) -> Result<(Identifier, SourcePos), ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Ident(s), pos }) => {
                self.at += 1;
                let id = Identifier::new(s.as_str()).map_err(|e| ParseError::new(*pos, e.to_string()))?;
                Ok((id, *pos))
            }
            _ => self.error(what),
        }
    }

    fn spec(&mut self) -> Result<ArchSpec, ParseError> {
        if self.at_keyword(Keyword::Style) {
            self.style().map(ArchSpec::Style)
        } else if self.at_keyword(Keyword::Configuration) {
            self.configuration().map(ArchSpec::Configuration)
        } else {
            self.error("`Style` or `Configuration`")
        }
    }

    fn style(&mut self) -> Result<Style, ParseError> {
        let pos = self.keyword(Keyword::Style)?;
        let (name, _) = self.ident("style name")?;
        let types = self.type_decls()?;
        if self.peek_kind() == Some(&TokenKind::Constraints) {
            self.next();
        }
        self.keyword(Keyword::End)?;
        self.keyword(Keyword::Style)?;
        Ok(Style { name, types, pos })
    }

    fn configuration(&mut self) -> Result<Configuration, ParseError> {
        let pos = self.keyword(Keyword::Configuration)?;
        let (name, _) = self.ident("configuration name")?;
        let types = self.type_decls()?;
        self.keyword(Keyword::Instances)?;
        let mut instances = Vec::new();
        while let Some(TokenKind::Ident(_)) = self.peek_kind() {
            let mut names = vec![self.ident("instance name")?];
            while self.peek_kind() == Some(&TokenKind::Comma) {
                self.next();
                names.push(self.ident("instance name")?);
            }
            self.expect(TokenKind::Colon)?;
            let (type_name, _) = self.ident("type name")?;
            for (name, pos) in names {
                instances.push(Instance { name, type_name: type_name.clone(), pos });
            }
        }
        self.keyword(Keyword::Attachments)?;
        let mut attachments = Vec::new();
        while let Some(TokenKind::Dotted(_)) = self.peek_kind() {
            let left = self.interface()?;
            self.keyword(Keyword::As)?;
            let right = self.interface()?;
            attachments.push(Attachment { pos: left.pos, left, right });
        }
        self.keyword(Keyword::End)?;
        self.keyword(Keyword::Configuration)?;
        Ok(Configuration { name, types, instances, attachments, pos })
    }

    fn interface(&mut self) -> Result<InterfaceRef, ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Dotted(segs), pos }) if segs.len() == 2 => {
                self.at += 1;
                let mk = |s: &str| Identifier::new(s).map_err(|e| ParseError::new(*pos, e.to_string()));
                Ok(InterfaceRef { instance: mk(&segs[0])?, interface: mk(&segs[1])?, pos: *pos })
            }
            _ => self.error("interface `Instance.Port`"),
        }
    }

    fn type_decls(&mut self) -> Result<Vec<TypeDecl>, ParseError> {
        let mut out = Vec::new();
        loop {
            if self.at_keyword(Keyword::Component) {
                out.push(TypeDecl::Component(self.component()?));
            } else if self.at_keyword(Keyword::Connector) {
                out.push(TypeDecl::Connector(self.connector()?));
            } else {
                return Ok(out);
            }
        }
    }

    fn component(&mut self) -> Result<Component, ParseError> {
        let pos = self.keyword(Keyword::Component)?;
        let (name, _) = self.ident("component name")?;
        let mut ports = Vec::new();
        while self.at_keyword(Keyword::Port) {
            let pos = self.next().unwrap().pos;
            let (pname, _) = self.ident("port name")?;
            ports.push(self.equation(DeclKind::Port, pname, pos)?);
        }
        if !self.at_keyword(Keyword::Computation) {
            return self.error("`Port` or `Computation`");
        }
        let cpos = self.next().unwrap().pos;
        let computation = self.equation(DeclKind::Computation, Identifier::new("Computation").unwrap(), cpos)?;
        Ok(Component { name, ports, computation, pos })
    }

    fn connector(&mut self) -> Result<Connector, ParseError> {
        let pos = self.keyword(Keyword::Connector)?;
        let (name, _) = self.ident("connector name")?;
        let mut roles = Vec::new();
        while self.at_keyword(Keyword::Role) {
            let pos = self.next().unwrap().pos;
            let (rname, _) = self.ident("role name")?;
            roles.push(self.equation(DeclKind::Role, rname, pos)?);
        }
        if !self.at_keyword(Keyword::Glue) {
            return self.error("`Role` or `Glue`");
        }
        let gpos = self.next().unwrap().pos;
        let glue = self.equation(DeclKind::Glue, Identifier::new("Glue").unwrap(), gpos)?;
        Ok(Connector { name, roles, glue, pos })
    }

    /// `= procExpr [whereClause]`, after the declaration's name.
    fn equation(&mut self, kind: DeclKind, name: Identifier, pos: SourcePos) -> Result<Declaration, ParseError> {
        self.expect(TokenKind::Equals)?;
        let body = self.proc_expr()?;
        let mut locals = Vec::new();
        if self.at_keyword(Keyword::Where) {
            self.next();
            self.expect(TokenKind::LBrace)?;
            while let Some(TokenKind::Ident(_)) = self.peek_kind() {
                let (lname, lpos) = self.ident("local process name")?;
                self.expect(TokenKind::Equals)?;
                let lbody = self.proc_expr()?;
                locals.push(Declaration { kind: DeclKind::Local, name: lname, body: lbody, locals: Vec::new(), pos: lpos });
            }
            self.expect(TokenKind::RBrace)?;
        }
        Ok(Declaration { kind, name, body, locals, pos })
    }

    fn proc_expr(&mut self) -> Result<ProcessExpr, ParseError> {
        let start = self.here();
        let mut left = self.prefix_expr()?;
        let mut seen: Option<ChoiceOp> = None;
        let mut warned = false;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::ExtChoice) => ChoiceOp::External,
                Some(TokenKind::IntChoice) => ChoiceOp::Internal,
                _ => return Ok(left),
            };
            let op_pos = self.next().unwrap().pos;
            if seen.is_some_and(|s| s != op) && !warned {
                warned = true;
                self.warnings.push(ParseWarning {
                    pos: op_pos,
                    message: format!(
                        "`[]` and `|~|` mixed without parentheses in the choice starting at {start}; grouping left to right"
                    ),
                });
            }
            seen = Some(op);
            let right = self.prefix_expr()?;
            left = match op {
                ChoiceOp::External => ProcessExpr::ext(left, right),
                ChoiceOp::Internal => ProcessExpr::int(left, right),
            };
        }
    }

    fn prefix_expr(&mut self) -> Result<ProcessExpr, ParseError> {
        let is_event = matches!(
            self.peek_kind(),
            Some(TokenKind::Ident(_) | TokenKind::Dotted(_) | TokenKind::InitEvent(_))
        ) && self.peek_kind_at(1) == Some(&TokenKind::Arrow);
        if is_event {
            let event = self.event()?;
            self.expect(TokenKind::Arrow)?;
            let rest = self.prefix_expr()?;
            return Ok(ProcessExpr::prefix(event, rest));
        }
        self.atom()
    }

    fn event(&mut self) -> Result<EventRef, ParseError> {
        let tok = self.next().unwrap();
        let (segs, polarity) = match &tok.kind {
            TokenKind::Ident(s) => (std::slice::from_ref(s), Polarity::Observed),
            TokenKind::Dotted(s) => (s.as_slice(), Polarity::Observed),
            TokenKind::InitEvent(s) => (s.as_slice(), Polarity::Initiated),
            _ => unreachable!("checked by prefix_expr"),
        };
        if segs.len() > 2 {
            return Err(ParseError::new(tok.pos, "an event has at most one scope: `Port.event`"));
        }
        let ids = segs
            .iter()
            .map(|s| Identifier::new(s.as_str()).map_err(|e| ParseError::new(tok.pos, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let (name, scope) = ids.split_last().unwrap();
        EventRef::scoped(scope.to_vec(), name.clone(), polarity).map_err(|e| ParseError::new(tok.pos, e.to_string()))
    }

    fn atom(&mut self) -> Result<ProcessExpr, ParseError> {
        let Some(tok) = self.peek() else {
            return self.error("process expression");
        };
        match &tok.kind {
            TokenKind::Tick => {
                self.next();
                Ok(ProcessExpr::Success)
            }
            TokenKind::Ident(s) => {
                self.next();
                let id = Identifier::new(s.as_str()).map_err(|e| ParseError::new(tok.pos, e.to_string()))?;
                Ok(ProcessExpr::Ref(id))
            }
            TokenKind::Keyword(Keyword::Glue) => {
                self.next();
                Ok(ProcessExpr::Ref(Identifier::new("Glue").unwrap()))
            }
            TokenKind::Keyword(Keyword::Computation) => {
                self.next();
                Ok(ProcessExpr::Ref(Identifier::new("Computation").unwrap()))
            }
            TokenKind::LParen => {
                self.next();
                let inner = self.proc_expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::InitEvent(_) | TokenKind::Dotted(_) => self.error("`->` after event"),
            _ => self.error("process expression"),
        }
    }
}
