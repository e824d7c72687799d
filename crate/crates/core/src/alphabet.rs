//! Alphabets of declarations, components and connectors.
//!
//! A declaration's alphabet is the composition of the closed
//! process-to-process relation with the process-to-event relation over the
//! declaration and its where-locals.

use crate::diag::Diagnostic;
use crate::model::*;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlphabetInfo {
    pub total: EventSet,
    pub initiated: EventSet,
    pub observed: EventSet,
    /// `total` with the port or role name prepended; equal to `total` for
    /// glue and computation, whose events are already written scoped.
    pub param_total: EventSet,
}

pub fn scope_event(e: &EventRef, owner: &Identifier) -> Result<EventRef, ModelError> {
    e.scope_with(owner)
}

/// The two relations a declaration induces, keyed by process name.
pub fn declaration_relations(d: &Declaration) -> (ProcessRelation, EventRelation) {
    let mut p2p = ProcessRelation::new();
    let mut p2e = EventRelation::new();
    for decl in std::iter::once(d).chain(d.locals.iter()) {
        p2p.add_node(&decl.name);
        for e in decl.body.events() {
            p2e.insert(&decl.name, e.clone());
        }
        for r in decl.body.refs() {
            if d.in_scope(r) {
                p2p.insert(&decl.name, r);
            }
        }
    }
    (p2p, p2e)
}

pub fn compute_declaration_alphabet(d: &Declaration) -> (AlphabetInfo, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    for decl in std::iter::once(d).chain(d.locals.iter()) {
        for r in decl.body.refs() {
            if !d.in_scope(r) {
                diags.push(Diagnostic::error(
                    decl.pos,
                    format!("unresolved process reference `{r}` in `{}`", decl.name),
                ));
            }
        }
    }
    let (p2p, p2e) = declaration_relations(d);
    let total = p2p.reachable_events(&p2e).get(&d.name);

    // polarity of each event as first written; conflicting uses are flagged
    let closed = p2p.closure();
    let reachable: Vec<&Declaration> = std::iter::once(d)
        .chain(d.locals.iter().filter(|l| closed.contains(&d.name, &l.name)))
        .collect();
    let mut initiated = EventSet::new();
    let mut observed = EventSet::new();
    let mut flagged = EventSet::new();
    for decl in &reachable {
        for e in decl.body.events() {
            let (same, other) = if e.is_initiated() { (&mut initiated, &observed) } else { (&mut observed, &initiated) };
            if other.contains(e) {
                if flagged.insert(e.clone()) {
                    diags.push(Diagnostic::warning(
                        decl.pos,
                        format!("event `{}` is used both initiated and observed in `{}`", e.qualified_name(), d.name),
                    ));
                }
            } else {
                same.insert(e.clone());
            }
        }
    }

    let param_total = match d.kind {
        DeclKind::Port | DeclKind::Role => {
            let mut out = EventSet::new();
            for e in &total {
                match scope_event(e, &d.name) {
                    Ok(s) => {
                        out.insert(s);
                    }
                    Err(err) => diags.push(Diagnostic::error(d.pos, err.to_string())),
                }
            }
            out
        }
        _ => total.clone(),
    };
    (AlphabetInfo { total, initiated, observed, param_total }, diags)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentAlphabets {
    pub ports: Vec<AlphabetInfo>,
    pub computation: AlphabetInfo,
    pub total: EventSet,
}

impl ComponentAlphabets {
    /// Scoped port events that the computation never uses.
    pub fn port_internal(&self, port: usize) -> EventSet {
        self.ports[port].param_total.minus(&self.computation.total)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectorAlphabets {
    pub roles: Vec<AlphabetInfo>,
    pub glue: AlphabetInfo,
    pub total: EventSet,
}

impl ConnectorAlphabets {
    /// Scoped role events that the glue never uses.
    pub fn role_internal(&self, role: usize) -> EventSet {
        self.roles[role].param_total.minus(&self.glue.total)
    }
}

/// Checks that every scoped event in a computation or glue names one of
/// `interfaces` and belongs to its alphabet.
fn check_scoped_events(
    owner: &Identifier,
    body: &AlphabetInfo,
    interfaces: &[Declaration],
    alphabets: &[AlphabetInfo],
    kind: &str,
    pos: SourcePos,
    diags: &mut Vec<Diagnostic>,
) {
    for e in &body.total {
        let Some(head) = e.head() else { continue };
        match interfaces.iter().position(|d| &d.name == head) {
            None => diags.push(Diagnostic::error(
                pos,
                format!("event `{}` names no {kind} of `{owner}`", e.qualified_name()),
            )),
            Some(i) if !alphabets[i].param_total.contains(e) => diags.push(Diagnostic::error(
                pos,
                format!("event `{}` is not in the alphabet of {kind} `{head}`", e.qualified_name()),
            )),
            Some(_) => {}
        }
    }
}

pub fn compute_component_alphabet(c: &Component) -> (ComponentAlphabets, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut ports = Vec::new();
    for p in &c.ports {
        let (info, d) = compute_declaration_alphabet(p);
        diags.extend(d);
        ports.push(info);
    }
    let (computation, d) = compute_declaration_alphabet(&c.computation);
    diags.extend(d);
    check_scoped_events(&c.name, &computation, &c.ports, &ports, "port", c.computation.pos, &mut diags);

    let mut total = EventSet::new();
    for p in &ports {
        total.extend(p.param_total.iter().cloned());
    }
    let internal = total.minus(&computation.total);
    total.extend(computation.total.iter().cloned());
    if !internal.is_empty() {
        diags.push(Diagnostic::warning(
            c.pos,
            format!(
                "WARNING: Ports really shouldn't have internal events. `{}` never uses {{{}}}",
                c.name,
                internal.qualified_names().join(", ")
            ),
        ));
    }
    (ComponentAlphabets { ports, computation, total }, diags)
}

pub fn compute_connector_alphabet(c: &Connector) -> (ConnectorAlphabets, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut roles = Vec::new();
    for r in &c.roles {
        let (info, d) = compute_declaration_alphabet(r);
        diags.extend(d);
        roles.push(info);
    }
    let (glue, d) = compute_declaration_alphabet(&c.glue);
    diags.extend(d);
    check_scoped_events(&c.name, &glue, &c.roles, &roles, "role", c.glue.pos, &mut diags);
    let mut total = glue.total.clone();
    for r in &roles {
        total.extend(r.param_total.iter().cloned());
    }
    (ConnectorAlphabets { roles, glue, total }, diags)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeAlphabets {
    Component(ComponentAlphabets),
    Connector(ConnectorAlphabets),
}

/// Alphabets for every type of a spec, parallel to `spec.types()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecAlphabets {
    pub types: Vec<TypeAlphabets>,
}

impl SpecAlphabets {
    pub fn component(&self, idx: usize) -> &ComponentAlphabets {
        match &self.types[idx] {
            TypeAlphabets::Component(c) => c,
            TypeAlphabets::Connector(_) => panic!("type {idx} is a connector"),
        }
    }

    pub fn connector(&self, idx: usize) -> &ConnectorAlphabets {
        match &self.types[idx] {
            TypeAlphabets::Connector(c) => c,
            TypeAlphabets::Component(_) => panic!("type {idx} is a component"),
        }
    }

    /// Alphabet of the port or role called `name`, with its declaration.
    pub fn interface<'s>(&self, spec: &'s ArchSpec, name: &Identifier) -> Option<(&'s Declaration, &AlphabetInfo)> {
        for (t, a) in spec.types().iter().zip(&self.types) {
            let infos = match a {
                TypeAlphabets::Component(c) => &c.ports,
                TypeAlphabets::Connector(c) => &c.roles,
            };
            if let Some(i) = t.interfaces().iter().position(|d| &d.name == name) {
                return Some((&t.interfaces()[i], &infos[i]));
            }
        }
        None
    }
}

pub fn compute_spec_alphabets(spec: &ArchSpec) -> (SpecAlphabets, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut types = Vec::new();
    for t in spec.types() {
        match t {
            TypeDecl::Component(c) => {
                let (a, d) = compute_component_alphabet(c);
                diags.extend(d);
                types.push(TypeAlphabets::Component(a));
            }
            TypeDecl::Connector(c) => {
                let (a, d) = compute_connector_alphabet(c);
                diags.extend(d);
                types.push(TypeAlphabets::Connector(a));
            }
        }
    }
    (SpecAlphabets { types }, diags)
}
