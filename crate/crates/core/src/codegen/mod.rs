//! CSPM generation: header, per-connector deadlock checks, per-component
//! port/computation consistency, per-attachment port/role compatibility.

pub mod cspm;

use std::collections::{HashMap, HashSet};

pub use cspm::{Item, Proc, Property, Renaming, Script, SetExpr};

use crate::alphabet::{AlphabetInfo, ComponentAlphabets, ConnectorAlphabets, SpecAlphabets, TypeAlphabets};
use crate::diag::Diagnostic;
use crate::model::*;
use crate::transform;

pub const ABSTRACT_EVENT: &str = "abstractEvent";
pub const DFA: &str = "DFA";

/// One `assert Spec [FD= Impl` line, as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub property: Property,
    pub spec: String,
    pub imp: String,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct EmitPlan {
    pub text: String,
    pub script: Script,
    pub assertions: Vec<Assertion>,
}

impl EmitPlan {
    pub fn from_script(script: Script) -> Self {
        let assertions = script
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Assert { spec, imp, property } => Some(Assertion {
                    property: *property,
                    spec: spec.clone(),
                    imp: imp.clone(),
                    label: cspm::assert_line(spec, imp),
                }),
                _ => None,
            })
            .collect();
        EmitPlan { text: script.render(), script, assertions }
    }
}

pub fn emit_header() -> Vec<Item> {
    let dfa = Proc::int(Proc::prefix(ABSTRACT_EVENT, Proc::reference(DFA)), Proc::Skip);
    vec![
        Item::line("-- FDR compression functions"),
        Item::line("transparent diamond"),
        Item::line("transparent normalise"),
        Item::Blank,
        Item::Blank,
        Item::line("-- Wright defined processes"),
        Item::Channels(vec![ABSTRACT_EVENT.into()]),
        Item::Def { name: DFA.into(), body: dfa, flat: true },
        Item::Blank,
        Item::line("quant_semi({},_) = SKIP"),
        Item::line("quant_semi(S,PARAM) = |~| i:S @ PARAM(i) ; quant_semi(diff(S,{i}),PARAM)"),
        Item::Blank,
        Item::line("power_set({}) = {{}}"),
        Item::line("power_set(S) = { union(y,{x}) | x <- S, y <- power_set(diff(S,{x}))}"),
        Item::Blank,
        Item::Blank,
    ]
}

pub fn header_text() -> String {
    Script { items: emit_header() }.render()
}

fn names_of(set: &EventSet) -> Vec<String> {
    set.qualified_names()
}

pub fn port_eq(p: &Identifier) -> String {
    format!("PORT{p}")
}

pub fn role_eq(r: &Identifier) -> String {
    format!("ROLE{r}")
}

pub fn alpha_eq(n: &Identifier) -> String {
    format!("ALPHA_{n}")
}

/// Lowers declarations to CSPM equations under a fixed naming scheme.
pub struct Emitter<'a> {
    spec: &'a ArchSpec,
    alphabets: &'a SpecAlphabets,
    qualify_glue: bool,
    /// Where-local names that must be qualified with their owner.
    clashing_locals: HashSet<Identifier>,
    diags: Vec<Diagnostic>,
}

impl<'a> Emitter<'a> {
    pub fn new(spec: &'a ArchSpec, alphabets: &'a SpecAlphabets) -> Self {
        let qualify_glue = matches!(spec, ArchSpec::Configuration(_)) || spec.connectors().count() > 1;
        let mut counts: HashMap<Identifier, usize> = HashMap::new();
        let mut reserved: HashSet<String> = [DFA, ABSTRACT_EVENT, "Glue"].iter().map(|s| s.to_string()).collect();
        for t in spec.types() {
            reserved.insert(t.name().to_string());
            let decls: Vec<&Declaration> = match t {
                TypeDecl::Component(c) => c.ports.iter().chain(std::iter::once(&c.computation)).collect(),
                TypeDecl::Connector(c) => c.roles.iter().chain(std::iter::once(&c.glue)).collect(),
            };
            for d in decls {
                for l in &d.locals {
                    *counts.entry(l.name.clone()).or_default() += 1;
                }
            }
        }
        let clashing_locals = counts
            .into_iter()
            .filter(|(n, c)| *c > 1 || reserved.contains(n.as_str()))
            .map(|(n, _)| n)
            .collect();
        Emitter { spec, alphabets, qualify_glue, clashing_locals, diags: Vec::new() }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diags
    }

    pub fn glue_eq(&self, c: &Connector) -> String {
        if self.qualify_glue {
            format!("Glue{}", c.name)
        } else {
            "Glue".to_string()
        }
    }

    fn local_eq(&self, local: &Identifier, owner_eq: &str) -> String {
        if self.clashing_locals.contains(local) {
            format!("{local}_{owner_eq}")
        } else {
            local.to_string()
        }
    }

    /// Equations for `d` (locals first), with `d` named `eq` and every
    /// equation name carrying `suffix`. `original` supplies the local names
    /// in case a transform dropped some.
    fn equations(&self, d: &Declaration, original: &Declaration, eq: &str, suffix: &str) -> Vec<Item> {
        let resolve = |n: &Identifier| -> String {
            if n == &original.name {
                format!("{eq}{suffix}")
            } else if original.local(n).is_some() {
                format!("{}{suffix}", self.local_eq(n, eq))
            } else {
                n.to_string()
            }
        };
        let mut out = Vec::new();
        for l in &d.locals {
            out.push(Item::def(resolve(&l.name), lower(&l.body, &resolve, true)));
        }
        out.push(Item::def(format!("{eq}{suffix}"), lower(&d.body, &resolve, true)));
        out
    }

    pub fn connector(&mut self, c: &Connector, a: &ConnectorAlphabets) -> Vec<Item> {
        let glue = self.glue_eq(c);
        let mut out = vec![Item::line(format!("-- Connector {}", c.name))];
        out.push(Item::set(alpha_eq(&c.name), SetExpr::Productions(names_of(&a.total))));
        out.extend(self.equations(&c.glue, &c.glue, &glue, ""));
        out.push(Item::Blank);
        for (r, info) in c.roles.iter().zip(&a.roles) {
            let role = role_eq(&r.name);
            out.push(Item::set(alpha_eq(&r.name), SetExpr::Enum(names_of(&info.total))));
            out.extend(self.equations(r, r, &role, ""));
            let abs = format!("{}A", r.name);
            out.push(Item::def(
                abs.clone(),
                Proc::rename(
                    Proc::reference(&role),
                    Renaming::Collapse { target: ABSTRACT_EVENT.into(), over: SetExpr::named(alpha_eq(&r.name)) },
                ),
            ));
            out.push(Item::Assert { spec: DFA.into(), imp: abs, property: Property::RoleDeadlockFree });
            out.push(Item::Blank);
        }
        for (r, info) in c.roles.iter().zip(&a.roles) {
            out.push(Item::TypedChannel { name: r.name.to_string(), members: names_of(&info.total) });
        }
        let mut body = Proc::reference(&glue);
        for (j, (r, info)) in c.roles.iter().zip(&a.roles).enumerate().rev() {
            let renamed = Proc::rename(
                Proc::reference(role_eq(&r.name)),
                Renaming::Channel { channel: r.name.to_string(), over: SetExpr::Enum(names_of(&info.total)) },
            );
            let sync = SetExpr::diff(
                SetExpr::Productions(vec![r.name.to_string()]),
                SetExpr::Enum(names_of(&a.role_internal(j))),
            );
            body = Proc::par(renamed, sync, body);
        }
        out.push(Item::def(c.name.to_string(), Proc::paren(body)));
        let abs = format!("{}A", c.name);
        out.push(Item::def(
            abs.clone(),
            Proc::rename(
                Proc::reference(c.name.to_string()),
                Renaming::Collapse { target: ABSTRACT_EVENT.into(), over: SetExpr::named(alpha_eq(&c.name)) },
            ),
        ));
        out.push(Item::Assert { spec: DFA.into(), imp: abs, property: Property::ConnectorDeadlockFree });
        out.push(Item::Blank);
        out
    }

    fn restricted(&mut self, p: &Declaration, info: &AlphabetInfo) -> Declaration {
        let (restricted, diags) = transform::restrict_to_observed(p, info);
        self.diags.extend(diags);
        transform::determinize_declaration(&restricted)
    }

    pub fn component(&mut self, c: &Component, a: &ComponentAlphabets) -> Vec<Item> {
        let comp = format!("Computation{}", c.name);
        let mut out = vec![Item::line(format!("-- Component {}", c.name))];
        out.push(Item::set(alpha_eq(&c.name), SetExpr::Productions(names_of(&a.total))));
        out.extend(self.equations(&c.computation, &c.computation, &comp, ""));
        out.push(Item::line("--Port Process"));
        for (i, (p, info)) in c.ports.iter().zip(&a.ports).enumerate() {
            if i > 0 {
                out.push(Item::Blank);
            }
            out.push(Item::set(alpha_eq(&p.name), SetExpr::Enum(names_of(&info.total))));
            if info.observed.is_empty() {
                out.push(Item::line("-- no events observed!"));
            } else {
                out.push(Item::set(format!("ALPHA_{}I", p.name), SetExpr::Enum(names_of(&info.initiated))));
            }
            out.extend(self.equations(p, p, &port_eq(&p.name), ""));
            out.push(Item::def(
                format!("{}G", p.name),
                Proc::rename(
                    Proc::reference(port_eq(&p.name)),
                    Renaming::Channel { channel: p.name.to_string(), over: SetExpr::named(alpha_eq(&p.name)) },
                ),
            ));
        }
        for (p, info) in c.ports.iter().zip(&a.ports) {
            out.push(Item::TypedChannel { name: p.name.to_string(), members: names_of(&info.total) });
        }
        out.push(Item::line("--Deterministic Process restricted to the observed event"));
        for (p, info) in c.ports.iter().zip(&a.ports) {
            let detr = self.restricted(p, info);
            out.extend(self.equations(&detr, p, &port_eq(&p.name), "DETR"));
        }
        for (i, p) in c.ports.iter().enumerate() {
            let mut body = Proc::reference(&comp);
            for (j, (q, qinfo)) in c.ports.iter().zip(&a.ports).enumerate().rev() {
                if j == i {
                    continue;
                }
                let detr = Proc::reference(format!("{}DETR", port_eq(&q.name)));
                let operand = if qinfo.observed.is_empty() {
                    detr
                } else {
                    Proc::rename(
                        detr,
                        Renaming::Channel { channel: q.name.to_string(), over: SetExpr::Enum(names_of(&qinfo.observed)) },
                    )
                };
                let scoped_observed = qinfo.param_total.filter(|e| qinfo.observed.contains(&e.unscoped()));
                let sync = SetExpr::diff(
                    SetExpr::Enum(names_of(&scoped_observed)),
                    SetExpr::Enum(names_of(&a.port_internal(j))),
                );
                body = Proc::par(operand, sync, body);
            }
            let hidden = SetExpr::diff(SetExpr::named(alpha_eq(&c.name)), SetExpr::Productions(vec![p.name.to_string()]));
            let name = format!("COMP{}", p.name);
            out.push(Item::def(name.clone(), Proc::hide(Proc::paren(body), hidden)));
            out.push(Item::Assert { spec: format!("{}G", p.name), imp: name, property: Property::PortComputation });
        }
        out.push(Item::Blank);
        out
    }

    fn type_fragments(&mut self) -> Vec<Item> {
        let mut out = Vec::new();
        for (t, a) in self.spec.types().iter().zip(&self.alphabets.types) {
            match (t, a) {
                (TypeDecl::Component(c), TypeAlphabets::Component(a)) => out.extend(self.component(c, a)),
                (TypeDecl::Connector(c), TypeAlphabets::Connector(a)) => out.extend(self.connector(c, a)),
                _ => unreachable!("alphabets are computed per type"),
            }
        }
        out
    }

    /// Bare event names for the top-level `channel` line.
    fn abstract_events(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut add = |n: String| {
            if seen.insert(n.clone()) {
                out.push(n);
            }
        };
        for (t, a) in self.spec.types().iter().zip(&self.alphabets.types) {
            let (ifaces, body) = match (t, a) {
                (TypeDecl::Component(_), TypeAlphabets::Component(a)) => (&a.ports, &a.computation),
                (TypeDecl::Connector(_), TypeAlphabets::Connector(a)) => (&a.roles, &a.glue),
                _ => unreachable!(),
            };
            for info in ifaces {
                for n in names_of(&info.total) {
                    add(n);
                }
            }
            for e in &body.total {
                if e.scope.is_empty() {
                    add(e.qualified_name());
                }
            }
        }
        out
    }

    fn preamble(&self, kind: &str) -> Vec<Item> {
        let events = self.abstract_events();
        let channels = if events.is_empty() {
            Item::line("-- no events")
        } else {
            Item::Channels(events)
        };
        vec![
            Item::line(format!("-- {kind} {}", self.spec.name())),
            Item::line("-- Types declarations"),
            Item::line("-- events for abstract specification"),
            channels,
            Item::Blank,
        ]
    }

    pub fn style(&mut self) -> Vec<Item> {
        let mut out = self.preamble("Style");
        out.extend(self.type_fragments());
        out.push(Item::line("-- No constraints"));
        out.push(Item::line("-- End Style"));
        out
    }

    pub fn configuration(&mut self, cfg: &Configuration) -> Vec<Item> {
        let mut out = self.preamble("Configuration");
        out.extend(self.type_fragments());
        for c in self.spec.connectors() {
            for r in &c.roles {
                let det = transform::determinize_declaration(r);
                out.extend(self.equations(&det, r, &role_eq(&r.name), "DET"));
            }
        }
        out.push(Item::Blank);
        out.push(Item::line("--Attachment Test"));
        let mut defined = HashSet::new();
        let mut def = |out: &mut Vec<Item>, name: String, body: Proc| {
            if defined.insert(name.clone()) {
                out.push(Item::def(name, body));
            }
        };
        for att in &cfg.attachments {
            let (port, role) = (&att.left, &att.right);
            let (p, r) = (&port.interface, &role.interface);
            let port_plus = format!("{}_{}PLUS", port.instance, p);
            let role_plus = format!("{}_{}PLUS", role.instance, r);
            let det = format!("{port_plus}DET");
            def(
                &mut out,
                port_plus.clone(),
                Proc::par(
                    Proc::reference(port_eq(p)),
                    SetExpr::diff(SetExpr::named(alpha_eq(r)), SetExpr::named(alpha_eq(p))),
                    Proc::Stop,
                ),
            );
            def(
                &mut out,
                role_plus.clone(),
                Proc::par(
                    Proc::reference(role_eq(r)),
                    SetExpr::diff(SetExpr::named(alpha_eq(p)), SetExpr::named(alpha_eq(r))),
                    Proc::Stop,
                ),
            );
            def(
                &mut out,
                det.clone(),
                Proc::par(
                    Proc::reference(port_plus),
                    SetExpr::union(SetExpr::named(alpha_eq(p)), SetExpr::named(alpha_eq(r))),
                    Proc::reference(format!("{}DET", role_eq(r))),
                ),
            );
            out.push(Item::Assert { spec: role_plus, imp: det, property: Property::PortRole });
        }
        out.push(Item::line("-- End Configuration"));
        out
    }

    /// The whole file: header followed by the style or configuration.
    pub fn plan(mut self) -> (EmitPlan, Vec<Diagnostic>) {
        let mut script = Script { items: emit_header() };
        let body = match self.spec {
            ArchSpec::Style(_) => self.style(),
            ArchSpec::Configuration(cfg) => self.configuration(cfg),
        };
        script.extend(body);
        (EmitPlan::from_script(script), self.diags)
    }
}

/// Lowers a process body. Empty becomes SKIP at the top of an equation and
/// STOP anywhere else.
fn lower(p: &ProcessExpr, resolve: &dyn Fn(&Identifier) -> String, top: bool) -> Proc {
    match p {
        ProcessExpr::Prefix(e, rest) => Proc::prefix(e.qualified_name(), lower(rest, resolve, false)),
        ProcessExpr::ExternalChoice(l, r) => Proc::ext(lower(l, resolve, false), lower(r, resolve, false)),
        ProcessExpr::InternalChoice(l, r) => Proc::int(lower(l, resolve, false), lower(r, resolve, false)),
        ProcessExpr::Ref(n) => Proc::Ref(resolve(n)),
        ProcessExpr::Success => Proc::Skip,
        ProcessExpr::Empty if top => Proc::Skip,
        ProcessExpr::Empty => Proc::Stop,
    }
}

pub fn emit(spec: &ArchSpec, alphabets: &SpecAlphabets) -> (EmitPlan, Vec<Diagnostic>) {
    Emitter::new(spec, alphabets).plan()
}

/// A self-contained script defining `d` (and its locals) under its own
/// name, with every event it mentions declared. Used to hand a single
/// declaration to the refinement engine.
pub fn standalone_script(d: &Declaration) -> Script {
    let mut events: Vec<String> = Vec::new();
    for decl in std::iter::once(d).chain(d.locals.iter()) {
        for e in decl.body.events() {
            let n = e.qualified_name();
            if !events.contains(&n) {
                events.push(n);
            }
        }
    }
    let mut script = Script::default();
    let mut channels: Vec<String> = Vec::new();
    let mut typed: Vec<(String, Vec<String>)> = Vec::new();
    for n in events {
        match n.split_once('.') {
            None => channels.push(n),
            Some((c, rest)) => match typed.iter_mut().find(|(t, _)| t == c) {
                Some((_, m)) => m.push(rest.to_string()),
                None => typed.push((c.to_string(), vec![rest.to_string()])),
            },
        }
    }
    if !channels.is_empty() {
        script.push(Item::Channels(channels));
    }
    for (name, members) in typed {
        script.push(Item::TypedChannel { name, members });
    }
    let resolve = |n: &Identifier| n.to_string();
    for l in &d.locals {
        script.push(Item::def(l.name.to_string(), lower(&l.body, &resolve, true)));
    }
    script.push(Item::def(d.name.to_string(), lower(&d.body, &resolve, true)));
    script
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::compute_spec_alphabets;
    use crate::parser::parse_source;

    fn plan(src: &str) -> EmitPlan {
        let spec = parse_source(src).unwrap().spec;
        let (a, _) = compute_spec_alphabets(&spec);
        emit(&spec, &a).0
    }

    fn fixture(name: &str) -> EmitPlan {
        plan(&std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap())
    }

    #[test]
    fn header_is_stable() {
        let h = header_text();
        assert!(h.contains("DFA = abstractEvent -> DFA |~| SKIP\n"));
        assert!(h.starts_with("-- FDR compression functions\ntransparent diamond\ntransparent normalise\n\n\n"));
        assert_eq!(h, header_text());
    }

    #[test]
    fn role_self_reference_uses_equation_name() {
        let p = fixture("dt1.wrt");
        assert!(p.text.contains("ROLEClient = ((request -> (result -> ROLEClient)) |~| SKIP)"));
        assert!(p.text.contains("CSconnectorA = CSconnector [[ x <- abstractEvent | x <- ALPHA_CSconnector ]]"));
    }

    #[test]
    fn every_assert_line_has_one_assertion() {
        for f in ["dt1.wrt", "calcul_formule.wrt", "dt3.wrt", "pipe_conn.wrt", "double.wrt"] {
            let p = fixture(f);
            let lines: Vec<&str> = p.text.lines().filter(|l| l.starts_with("assert ")).collect();
            assert_eq!(lines.len(), p.assertions.len(), "{f}");
            for (l, a) in lines.iter().zip(&p.assertions) {
                assert_eq!(*l, a.label);
            }
        }
    }

    #[test]
    fn single_port_component_hides_the_bare_computation() {
        let p = plan("Style S Component C Port P = a -> P Computation = P.a -> Computation End Style");
        assert!(p.text.contains("COMPP = (ComputationC)\\ diff(ALPHA_C, {|P|})"), "{}", p.text);
    }

    #[test]
    fn double_emits_two_port_assertions() {
        let p = fixture("double.wrt");
        let ones = p.assertions.iter().filter(|a| a.property == Property::PortComputation).count();
        assert_eq!(ones, 2);
    }

    #[test]
    fn equal_alphabets_give_empty_augmentation() {
        let p = fixture("dt3.wrt");
        assert!(p.text.contains("A_OutputPLUS = PORTOutput\n  [| diff(ALPHA_Origin, ALPHA_Output) |]\n  STOP"));
        assert_eq!(p.assertions.iter().filter(|a| a.property == Property::PortRole).count(), 2);
    }

    #[test]
    fn where_locals_precede_their_parent() {
        let p = fixture("pipe_conn.wrt");
        let pos = |s: &str| p.text.find(s).unwrap_or_else(|| panic!("missing {s}"));
        assert!(pos("DoRead = ") < pos("ROLEReader = "));
        assert!(pos("ReadOnly = ") < pos("Glue = "));
        assert!(p.text.contains("(read -> ROLEReader)"));
    }

    #[test]
    fn clashing_locals_are_qualified() {
        let p = plan(
            "Style S Connector K Role R = L where { L = a -> L } Role Q = L where { L = b -> L } Glue = TICK End Style",
        );
        assert!(p.text.contains("L_ROLER = (a -> L_ROLER)"), "{}", p.text);
        assert!(p.text.contains("L_ROLEQ = (b -> L_ROLEQ)"));
    }

    #[test]
    fn emission_is_deterministic() {
        assert_eq!(fixture("dt3.wrt").text, fixture("dt3.wrt").text);
    }
}
