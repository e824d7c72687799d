//! Static semantics of structural declarations (rules 1-6) over a
//! hash-bucket symbol table.

use crate::diag::{Diagnostic, Severity};
use crate::model::*;

pub const DEFAULT_TABLE_SIZE: usize = 211;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nature {
    Component,
    Connector,
    Port,
    Role,
    Instance,
    Configuration,
    Style,
}

pub type EntryId = usize;

#[derive(Debug, Clone)]
pub struct SymbolEntry {
    pub name: Identifier,
    pub nature: Nature,
    /// Owner for ports and roles, declared type for instances.
    pub link: Option<EntryId>,
    pub pos: SourcePos,
    next: Option<EntryId>,
}

impl SymbolEntry {
    pub fn new(name: Identifier, nature: Nature, link: Option<EntryId>, pos: SourcePos) -> Self {
        SymbolEntry { name, nature, link, pos, next: None }
    }
}

/// Chained hash table; each bucket is a singly linked list threaded through
/// `entries`, newest first.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    heads: Vec<Option<EntryId>>,
    entries: Vec<SymbolEntry>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::with_size(DEFAULT_TABLE_SIZE)
    }
}

impl SymbolTable {
    pub fn with_size(size: usize) -> Self {
        assert!(size > 0, "symbol table needs at least one bucket");
        SymbolTable { heads: vec![None; size], entries: Vec::new() }
    }

    pub fn size(&self) -> usize {
        self.heads.len()
    }

    /// `j = (j * 256 + c) mod size` over the bytes of `name`.
    pub fn hash(name: &str, size: usize) -> usize {
        let size = size as u64;
        name.bytes().fold(0u64, |j, c| (j * 256 + c as u64) % size) as usize
    }

    pub fn insert(&mut self, mut entry: SymbolEntry) -> EntryId {
        let b = Self::hash(entry.name.as_str(), self.size());
        let id = self.entries.len();
        entry.next = self.heads[b];
        self.entries.push(entry);
        self.heads[b] = Some(id);
        id
    }

    pub fn lookup(&self, name: &Identifier) -> Option<EntryId> {
        let mut cur = self.heads[Self::hash(name.as_str(), self.size())];
        while let Some(id) = cur {
            if &self.entries[id].name == name {
                return Some(id);
            }
            cur = self.entries[id].next;
        }
        None
    }

    pub fn get(&self, id: EntryId) -> &SymbolEntry {
        &self.entries[id]
    }

    pub fn bucket_len(&self, bucket: usize) -> usize {
        let mut n = 0;
        let mut cur = self.heads[bucket];
        while let Some(id) = cur {
            n += 1;
            cur = self.entries[id].next;
        }
        n
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyzerOptions {
    /// Report rule 6 violations as errors instead of warnings.
    pub strict_attachments: bool,
    pub table_size: Option<usize>,
}

pub const MSG_REDUNDANT: &str = "Identificateur Redondant";
pub const MSG_UNDECLARED_TYPE: &str = "Type non Declarer";
pub const MSG_UNDECLARED: &str = "Identificateur non declarer";
pub const MSG_NOT_INSTANCE: &str = "La premiere partie doit etre une Instance";
pub const MSG_NOT_INTERFACE: &str = "La deusieme partie doit etre soit un Port soit un Role";
pub const MSG_WRONG_TYPE: &str = "L'Instance et l'Interface non pas le meme Type";
pub const MSG_ATTACHMENT_SHAPE: &str = "***Attachement: Composant.Port as Connecteur.Role***";
pub const MSG_PORT_TWICE: &str = "Port deja relier";
pub const MSG_ROLE_TWICE: &str = "Role deja relier";
pub const MSG_PORT_UNATTACHED: &str = "Port non relier";
pub const MSG_ROLE_UNATTACHED: &str = "Role non relier";

struct Analyzer {
    table: SymbolTable,
    diags: Vec<Diagnostic>,
}

impl Analyzer {
    fn error(&mut self, rule: u8, pos: SourcePos, msg: String) {
        self.diags.push(Diagnostic::error(pos, msg).with_rule(rule));
    }

    /// Rule 1: declare `name`, reporting a redundant identifier.
    fn declare(&mut self, name: &Identifier, nature: Nature, link: Option<EntryId>, pos: SourcePos) -> EntryId {
        if self.table.lookup(name).is_some() {
            self.error(1, pos, format!("{MSG_REDUNDANT}: {name}"));
        }
        self.table.insert(SymbolEntry::new(name.clone(), nature, link, pos))
    }

    fn declare_types(&mut self, types: &[TypeDecl]) {
        for t in types {
            match t {
                TypeDecl::Component(c) => {
                    let owner = self.declare(&c.name, Nature::Component, None, c.pos);
                    for p in &c.ports {
                        self.declare(&p.name, Nature::Port, Some(owner), p.pos);
                    }
                }
                TypeDecl::Connector(c) => {
                    let owner = self.declare(&c.name, Nature::Connector, None, c.pos);
                    for r in &c.roles {
                        self.declare(&r.name, Nature::Role, Some(owner), r.pos);
                    }
                }
            }
        }
    }
}

/// One end of a resolved attachment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Point<'a> {
    instance: &'a Identifier,
    interface: &'a Identifier,
    is_component: bool,
}

pub fn analyze(spec: &ArchSpec) -> Vec<Diagnostic> {
    analyze_with(spec, AnalyzerOptions::default())
}

pub fn analyze_with(spec: &ArchSpec, opts: AnalyzerOptions) -> Vec<Diagnostic> {
    let size = opts.table_size.unwrap_or(DEFAULT_TABLE_SIZE);
    let mut a = Analyzer { table: SymbolTable::with_size(size), diags: Vec::new() };
    a.declare_types(spec.types());
    let ArchSpec::Configuration(cfg) = spec else {
        return a.diags;
    };

    for inst in &cfg.instances {
        let ty = a.table.lookup(&inst.type_name).filter(|&id| {
            matches!(a.table.get(id).nature, Nature::Component | Nature::Connector)
        });
        if ty.is_none() {
            a.error(2, inst.pos, format!("{MSG_UNDECLARED_TYPE}: {}", inst.type_name));
        }
        a.declare(&inst.name, Nature::Instance, ty, inst.pos);
    }

    let mut resolved: Vec<(Point, Point, SourcePos)> = Vec::new();
    for att in &cfg.attachments {
        let left = resolve_point(&mut a, spec, &att.left);
        let right = resolve_point(&mut a, spec, &att.right);
        let (Some(l), Some(r)) = (left, right) else { continue };
        if !(l.is_component && !r.is_component) {
            a.error(5, att.pos, MSG_ATTACHMENT_SHAPE.to_string());
            continue;
        }
        resolved.push((l, r, att.pos));
    }

    if !crate::diag::has_errors(&a.diags) {
        check_completeness(&mut a, spec, cfg, &resolved, opts);
    }
    a.diags
}

/// Rules 3 and 4 for one side of an attachment.
fn resolve_point<'a>(a: &mut Analyzer, spec: &'a ArchSpec, r: &'a InterfaceRef) -> Option<Point<'a>> {
    let Some(inst_id) = a.table.lookup(&r.instance) else {
        a.error(3, r.pos, format!("{MSG_UNDECLARED}: {}", r.instance));
        return None;
    };
    let inst = a.table.get(inst_id);
    if inst.nature != Nature::Instance {
        a.error(3, r.pos, format!("{MSG_NOT_INSTANCE}: {}", r.instance));
        return None;
    }
    // An unresolved instance type was already reported under rule 2.
    let ty_id = inst.link?;
    let ty_entry = a.table.get(ty_id);
    let ty = spec.find_type(&ty_entry.name)?;
    if ty.interfaces().iter().any(|d| d.name == r.interface) {
        return Some(Point {
            instance: &r.instance,
            interface: &r.interface,
            is_component: matches!(ty, TypeDecl::Component(_)),
        });
    }
    let msg = match a.table.lookup(&r.interface).map(|id| a.table.get(id).nature) {
        Some(Nature::Port | Nature::Role) => MSG_WRONG_TYPE,
        Some(_) => MSG_NOT_INTERFACE,
        None => MSG_UNDECLARED,
    };
    a.error(4, r.pos, format!("{msg}: {r}"));
    None
}

/// Rule 6: every port and role of every instance is attached exactly once.
fn check_completeness(
    a: &mut Analyzer,
    spec: &ArchSpec,
    cfg: &Configuration,
    resolved: &[(Point, Point, SourcePos)],
    opts: AnalyzerOptions,
) {
    let severity = if opts.strict_attachments { Severity::Error } else { Severity::Warning };
    let mut push = |pos: SourcePos, msg: String| {
        a.diags.push(Diagnostic { severity, rule: Some(6), pos, message: msg });
    };
    for inst in &cfg.instances {
        let Some(ty) = spec.find_type(&inst.type_name) else { continue };
        let is_component = matches!(ty, TypeDecl::Component(_));
        for iface in ty.interfaces() {
            let uses: Vec<SourcePos> = resolved
                .iter()
                .filter_map(|(l, r, pos)| {
                    let p = if is_component { l } else { r };
                    (p.instance == &inst.name && p.interface == &iface.name).then_some(*pos)
                })
                .collect();
            let (twice, missing) = if is_component {
                (MSG_PORT_TWICE, MSG_PORT_UNATTACHED)
            } else {
                (MSG_ROLE_TWICE, MSG_ROLE_UNATTACHED)
            };
            match uses.len() {
                0 => push(inst.pos, format!("{missing}: {}.{}", inst.name, iface.name)),
                1 => {}
                _ => push(uses[1], format!("{twice}: {}.{}", inst.name, iface.name)),
            }
        }
    }
}
