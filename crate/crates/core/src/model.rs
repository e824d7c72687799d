//! Architecture model shared by every stage: identifiers, events, process
//! expressions, declarations and the structural elements built from them.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("event `{event}` cannot be scoped by `{owner}`: at most two scope levels are allowed")]
    ScopeTooDeep { event: String, owner: String },
}

/// Line/column of a node in its source file, both 1-based.
///
/// Positions are metadata only: two nodes that differ just in where they
/// were written compare equal, which keeps print/parse round trips simple.
#[derive(Debug, Clone, Copy, Default)]
pub struct SourcePos {
    pub line: u32,
    pub col: u32,
}

impl SourcePos {
    pub fn new(line: u32, col: u32) -> Self {
        SourcePos { line, col }
    }
}

impl PartialEq for SourcePos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for SourcePos {}

impl Hash for SourcePos {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identifier(String);

impl Identifier {
    pub fn new(text: impl Into<String>) -> Result<Self, ModelError> {
        let text = text.into();
        if Self::is_valid(&text) {
            Ok(Identifier(text))
        } else {
            Err(ModelError::InvalidIdentifier(text))
        }
    }

    pub fn is_valid(text: &str) -> bool {
        let mut chars = text.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Identifier {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Written with a leading underscore: the process decides.
    Initiated,
    /// Plain event: the environment decides.
    Observed,
}

/// An event occurrence, optionally scoped (`In.read`, `N.P.e`).
///
/// Equality and hashing look at scope and name only, so `_a` and `a`
/// denote the same event.
#[derive(Debug, Clone)]
pub struct EventRef {
    pub name: Identifier,
    pub polarity: Polarity,
    pub scope: Vec<Identifier>,
}

pub const MAX_SCOPE_DEPTH: usize = 2;

impl EventRef {
    pub fn new(name: Identifier, polarity: Polarity) -> Self {
        EventRef { name, polarity, scope: Vec::new() }
    }

    pub fn scoped(scope: Vec<Identifier>, name: Identifier, polarity: Polarity) -> Result<Self, ModelError> {
        if scope.len() > MAX_SCOPE_DEPTH {
            let owner = scope.iter().map(Identifier::as_str).collect::<Vec<_>>().join(".");
            return Err(ModelError::ScopeTooDeep { event: name.to_string(), owner });
        }
        Ok(EventRef { name, polarity, scope })
    }

    pub fn is_initiated(&self) -> bool {
        self.polarity == Polarity::Initiated
    }

    /// The first scope segment, i.e. the port or role an event belongs to.
    pub fn head(&self) -> Option<&Identifier> {
        self.scope.first()
    }

    /// Dotted name without the polarity marker, as used in CSPM.
    pub fn qualified_name(&self) -> String {
        let mut out = String::new();
        for s in &self.scope {
            out.push_str(s.as_str());
            out.push('.');
        }
        out.push_str(self.name.as_str());
        out
    }

    /// Prefix the scope with `owner`.
    pub fn scope_with(&self, owner: &Identifier) -> Result<EventRef, ModelError> {
        if self.scope.len() >= MAX_SCOPE_DEPTH {
            return Err(ModelError::ScopeTooDeep {
                event: self.qualified_name(),
                owner: owner.to_string(),
            });
        }
        let mut scope = Vec::with_capacity(self.scope.len() + 1);
        scope.push(owner.clone());
        scope.extend(self.scope.iter().cloned());
        Ok(EventRef { name: self.name.clone(), polarity: self.polarity, scope })
    }

    /// Drop the first scope segment (`In.read` becomes `read`).
    pub fn unscoped(&self) -> EventRef {
        EventRef {
            name: self.name.clone(),
            polarity: self.polarity,
            scope: self.scope.iter().skip(1).cloned().collect(),
        }
    }
}

impl PartialEq for EventRef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.scope == other.scope
    }
}

impl Eq for EventRef {}

impl Hash for EventRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.scope.hash(state);
        self.name.hash(state);
    }
}

impl fmt::Display for EventRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_initiated() {
            f.write_str("_")?;
        }
        f.write_str(&self.qualified_name())
    }
}

/// Insertion-ordered event set; equality ignores order.
#[derive(Debug, Clone, Default)]
pub struct EventSet {
    items: Vec<EventRef>,
    index: HashSet<EventRef>,
}

impl EventSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if an equal event (regardless of polarity) was already present.
    pub fn insert(&mut self, e: EventRef) -> bool {
        if self.index.contains(&e) {
            return false;
        }
        self.index.insert(e.clone());
        self.items.push(e);
        true
    }

    pub fn contains(&self, e: &EventRef) -> bool {
        self.index.contains(e)
    }

    /// The stored representative, which carries the polarity first seen.
    pub fn get(&self, e: &EventRef) -> Option<&EventRef> {
        self.items.iter().find(|x| *x == e)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EventRef> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn union(&self, other: &EventSet) -> EventSet {
        let mut out = self.clone();
        out.extend(other.iter().cloned());
        out
    }

    pub fn minus(&self, other: &EventSet) -> EventSet {
        self.iter().filter(|e| !other.contains(e)).cloned().collect()
    }

    pub fn intersection(&self, other: &EventSet) -> EventSet {
        self.iter().filter(|e| other.contains(e)).cloned().collect()
    }

    pub fn is_subset(&self, other: &EventSet) -> bool {
        self.iter().all(|e| other.contains(e))
    }

    pub fn qualified_names(&self) -> Vec<String> {
        self.items.iter().map(EventRef::qualified_name).collect()
    }

    pub fn filter(&self, mut keep: impl FnMut(&EventRef) -> bool) -> EventSet {
        self.iter().filter(|e| keep(e)).cloned().collect()
    }
}

impl PartialEq for EventSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }
}

impl Eq for EventSet {}

impl FromIterator<EventRef> for EventSet {
    fn from_iter<I: IntoIterator<Item = EventRef>>(iter: I) -> Self {
        let mut s = EventSet::new();
        s.extend(iter);
        s
    }
}

impl Extend<EventRef> for EventSet {
    fn extend<I: IntoIterator<Item = EventRef>>(&mut self, iter: I) {
        for e in iter {
            self.insert(e);
        }
    }
}

impl<'a> IntoIterator for &'a EventSet {
    type Item = &'a EventRef;
    type IntoIter = std::slice::Iter<'a, EventRef>;
    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// Process-to-process reference relation over named processes.
#[derive(Debug, Clone, Default)]
pub struct ProcessRelation {
    nodes: Vec<Identifier>,
    succ: Vec<Vec<usize>>,
}

impl ProcessRelation {
    pub fn new() -> Self {
        Self::default()
    }

    fn node(&mut self, p: &Identifier) -> usize {
        if let Some(i) = self.nodes.iter().position(|n| n == p) {
            return i;
        }
        self.nodes.push(p.clone());
        self.succ.push(Vec::new());
        self.nodes.len() - 1
    }

    pub fn add_node(&mut self, p: &Identifier) {
        self.node(p);
    }

    pub fn insert(&mut self, from: &Identifier, to: &Identifier) {
        let a = self.node(from);
        let b = self.node(to);
        if !self.succ[a].contains(&b) {
            self.succ[a].push(b);
        }
    }

    pub fn contains(&self, from: &Identifier, to: &Identifier) -> bool {
        let (Some(a), Some(b)) = (self.index_of(from), self.index_of(to)) else {
            return false;
        };
        self.succ[a].contains(&b)
    }

    fn index_of(&self, p: &Identifier) -> Option<usize> {
        self.nodes.iter().position(|n| n == p)
    }

    pub fn successors(&self, p: &Identifier) -> Vec<&Identifier> {
        match self.index_of(p) {
            Some(i) => self.succ[i].iter().map(|&j| &self.nodes[j]).collect(),
            None => Vec::new(),
        }
    }

    pub fn pairs(&self) -> Vec<(&Identifier, &Identifier)> {
        let mut out = Vec::new();
        for (i, s) in self.succ.iter().enumerate() {
            for &j in s {
                out.push((&self.nodes[i], &self.nodes[j]));
            }
        }
        out
    }

    /// Transitive closure.
    pub fn closure(&self) -> ProcessRelation {
        let mut out = ProcessRelation { nodes: self.nodes.clone(), succ: vec![Vec::new(); self.nodes.len()] };
        for start in 0..self.nodes.len() {
            let mut seen = vec![false; self.nodes.len()];
            let mut stack: Vec<usize> = self.succ[start].clone();
            while let Some(n) = stack.pop() {
                if seen[n] {
                    continue;
                }
                seen[n] = true;
                out.succ[start].push(n);
                stack.extend(self.succ[n].iter().copied().filter(|&m| !seen[m]));
            }
        }
        out
    }

    /// Relational composition with a process-to-event relation: each
    /// process maps to the events of the processes it is related to.
    pub fn compose(&self, events: &EventRelation) -> EventRelation {
        let mut out = EventRelation::new();
        for (i, p) in self.nodes.iter().enumerate() {
            let mut set = EventSet::new();
            for &j in &self.succ[i] {
                set.extend(events.get(&self.nodes[j]).iter().cloned());
            }
            out.insert_all(p, set);
        }
        out
    }

    /// Closure including each process itself, composed with `events`.
    pub fn reachable_events(&self, events: &EventRelation) -> EventRelation {
        let mut closed = self.closure();
        for i in 0..closed.nodes.len() {
            if !closed.succ[i].contains(&i) {
                closed.succ[i].insert(0, i);
            } else {
                let pos = closed.succ[i].iter().position(|&x| x == i).unwrap();
                closed.succ[i].remove(pos);
                closed.succ[i].insert(0, i);
            }
        }
        closed.compose(events)
    }
}

/// Process-to-event relation: the events each named process mentions.
#[derive(Debug, Clone, Default)]
pub struct EventRelation {
    entries: Vec<(Identifier, EventSet)>,
}

impl EventRelation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: &Identifier, e: EventRef) {
        self.entry(p).insert(e);
    }

    pub fn insert_all(&mut self, p: &Identifier, es: EventSet) {
        self.entry(p).extend(es.iter().cloned());
    }

    fn entry(&mut self, p: &Identifier) -> &mut EventSet {
        let idx = match self.entries.iter().position(|(n, _)| n == p) {
            Some(i) => i,
            None => {
                self.entries.push((p.clone(), EventSet::new()));
                self.entries.len() - 1
            }
        };
        &mut self.entries[idx].1
    }

    pub fn get(&self, p: &Identifier) -> EventSet {
        self.entries.iter().find(|(n, _)| n == p).map(|(_, s)| s.clone()).unwrap_or_default()
    }

    pub fn union(&self, other: &EventRelation) -> EventRelation {
        let mut out = self.clone();
        for (p, s) in &other.entries {
            out.insert_all(p, s.clone());
        }
        out
    }

    pub fn minus(&self, other: &EventRelation) -> EventRelation {
        let mut out = EventRelation::new();
        for (p, s) in &self.entries {
            out.insert_all(p, s.minus(&other.get(p)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProcessExpr {
    Prefix(EventRef, Box<ProcessExpr>),
    ExternalChoice(Box<ProcessExpr>, Box<ProcessExpr>),
    InternalChoice(Box<ProcessExpr>, Box<ProcessExpr>),
    Ref(Identifier),
    /// Successful termination (TICK / SKIP).
    Success,
    /// Produced only by projection; prints as SKIP at the top of an equation.
    Empty,
}

impl ProcessExpr {
    pub fn prefix(e: EventRef, then: ProcessExpr) -> Self {
        ProcessExpr::Prefix(e, Box::new(then))
    }

    pub fn ext(l: ProcessExpr, r: ProcessExpr) -> Self {
        ProcessExpr::ExternalChoice(Box::new(l), Box::new(r))
    }

    pub fn int(l: ProcessExpr, r: ProcessExpr) -> Self {
        ProcessExpr::InternalChoice(Box::new(l), Box::new(r))
    }

    pub fn reference(name: &Identifier) -> Self {
        ProcessExpr::Ref(name.clone())
    }

    pub fn is_choice(&self) -> bool {
        matches!(self, ProcessExpr::ExternalChoice(..) | ProcessExpr::InternalChoice(..))
    }

    /// Event occurrences in preorder.
    pub fn events(&self) -> Vec<&EventRef> {
        let mut out = Vec::new();
        self.visit(&mut |p| {
            if let ProcessExpr::Prefix(e, _) = p {
                out.push(e);
            }
        });
        out
    }

    pub fn refs(&self) -> Vec<&Identifier> {
        let mut out = Vec::new();
        self.visit(&mut |p| {
            if let ProcessExpr::Ref(n) = p {
                out.push(n);
            }
        });
        out
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a ProcessExpr)) {
        f(self);
        match self {
            ProcessExpr::Prefix(_, p) => p.visit(f),
            ProcessExpr::ExternalChoice(l, r) | ProcessExpr::InternalChoice(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            _ => {}
        }
    }

    pub fn try_map_events<E>(&self, f: &mut impl FnMut(&EventRef) -> Result<EventRef, E>) -> Result<ProcessExpr, E> {
        Ok(match self {
            ProcessExpr::Prefix(e, p) => ProcessExpr::prefix(f(e)?, p.try_map_events(f)?),
            ProcessExpr::ExternalChoice(l, r) => ProcessExpr::ext(l.try_map_events(f)?, r.try_map_events(f)?),
            ProcessExpr::InternalChoice(l, r) => ProcessExpr::int(l.try_map_events(f)?, r.try_map_events(f)?),
            other => other.clone(),
        })
    }

    pub fn map_refs(&self, f: &mut impl FnMut(&Identifier) -> ProcessExpr) -> ProcessExpr {
        match self {
            ProcessExpr::Prefix(e, p) => ProcessExpr::prefix(e.clone(), p.map_refs(f)),
            ProcessExpr::ExternalChoice(l, r) => ProcessExpr::ext(l.map_refs(f), r.map_refs(f)),
            ProcessExpr::InternalChoice(l, r) => ProcessExpr::int(l.map_refs(f), r.map_refs(f)),
            ProcessExpr::Ref(n) => f(n),
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeclKind {
    Port,
    Role,
    Glue,
    Computation,
    Local,
}

/// A named process equation together with its where-clause locals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub kind: DeclKind,
    pub name: Identifier,
    pub body: ProcessExpr,
    pub locals: Vec<Declaration>,
    pub pos: SourcePos,
}

impl Declaration {
    pub fn new(kind: DeclKind, name: Identifier, body: ProcessExpr) -> Self {
        Declaration { kind, name, body, locals: Vec::new(), pos: SourcePos::default() }
    }

    pub fn local(&self, name: &Identifier) -> Option<&Declaration> {
        self.locals.iter().find(|l| &l.name == name)
    }

    /// Names a Ref inside this declaration may resolve to.
    pub fn in_scope(&self, name: &Identifier) -> bool {
        &self.name == name || self.local(name).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: Identifier,
    pub ports: Vec<Declaration>,
    pub computation: Declaration,
    pub pos: SourcePos,
}

impl Component {
    pub fn port(&self, name: &Identifier) -> Option<&Declaration> {
        self.ports.iter().find(|p| &p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connector {
    pub name: Identifier,
    pub roles: Vec<Declaration>,
    pub glue: Declaration,
    pub pos: SourcePos,
}

impl Connector {
    pub fn role(&self, name: &Identifier) -> Option<&Declaration> {
        self.roles.iter().find(|r| &r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeDecl {
    Component(Component),
    Connector(Connector),
}

impl TypeDecl {
    pub fn name(&self) -> &Identifier {
        match self {
            TypeDecl::Component(c) => &c.name,
            TypeDecl::Connector(c) => &c.name,
        }
    }

    pub fn pos(&self) -> SourcePos {
        match self {
            TypeDecl::Component(c) => c.pos,
            TypeDecl::Connector(c) => c.pos,
        }
    }

    /// Ports or roles.
    pub fn interfaces(&self) -> &[Declaration] {
        match self {
            TypeDecl::Component(c) => &c.ports,
            TypeDecl::Connector(c) => &c.roles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: Identifier,
    pub type_name: Identifier,
    pub pos: SourcePos,
}

/// `Instance.Interface` on one side of an attachment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceRef {
    pub instance: Identifier,
    pub interface: Identifier,
    pub pos: SourcePos,
}

impl fmt::Display for InterfaceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.instance, self.interface)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub left: InterfaceRef,
    pub right: InterfaceRef,
    pub pos: SourcePos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub name: Identifier,
    pub types: Vec<TypeDecl>,
    pub instances: Vec<Instance>,
    pub attachments: Vec<Attachment>,
    pub pos: SourcePos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Style {
    pub name: Identifier,
    pub types: Vec<TypeDecl>,
    pub pos: SourcePos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArchSpec {
    Style(Style),
    Configuration(Configuration),
}

impl ArchSpec {
    pub fn name(&self) -> &Identifier {
        match self {
            ArchSpec::Style(s) => &s.name,
            ArchSpec::Configuration(c) => &c.name,
        }
    }

    pub fn types(&self) -> &[TypeDecl] {
        match self {
            ArchSpec::Style(s) => &s.types,
            ArchSpec::Configuration(c) => &c.types,
        }
    }

    pub fn find_type(&self, name: &Identifier) -> Option<&TypeDecl> {
        self.types().iter().find(|t| t.name() == name)
    }

    pub fn connectors(&self) -> impl Iterator<Item = &Connector> {
        self.types().iter().filter_map(|t| match t {
            TypeDecl::Connector(c) => Some(c),
            _ => None,
        })
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.types().iter().filter_map(|t| match t {
            TypeDecl::Component(c) => Some(c),
            _ => None,
        })
    }
}
