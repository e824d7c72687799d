use std::fmt::Write;

use crate::model::*;

/// Canonical Wright text for `spec`. Every nested choice is parenthesized,
/// so parsing the output yields the same tree.
pub fn to_wright(spec: &ArchSpec) -> String {
    let mut out = String::new();
    match spec {
        ArchSpec::Style(s) => {
            writeln!(out, "Style {}", s.name).unwrap();
            types(&mut out, &s.types);
            out.push_str("Constraints\nEnd Style\n");
        }
        ArchSpec::Configuration(c) => {
            writeln!(out, "Configuration {}", c.name).unwrap();
            types(&mut out, &c.types);
            out.push_str("Instances\n");
            for i in &c.instances {
                writeln!(out, "  {} : {}", i.name, i.type_name).unwrap();
            }
            out.push_str("Attachments\n");
            for a in &c.attachments {
                writeln!(out, "  {} As {}", a.left, a.right).unwrap();
            }
            out.push_str("End Configuration\n");
        }
    }
    out
}

fn types(out: &mut String, types: &[TypeDecl]) {
    for t in types {
        match t {
            TypeDecl::Component(c) => {
                writeln!(out, "Component {}", c.name).unwrap();
                for p in &c.ports {
                    declaration(out, &format!("Port {}", p.name), p);
                }
                declaration(out, "Computation", &c.computation);
            }
            TypeDecl::Connector(c) => {
                writeln!(out, "Connector {}", c.name).unwrap();
                for r in &c.roles {
                    declaration(out, &format!("Role {}", r.name), r);
                }
                declaration(out, "Glue", &c.glue);
            }
        }
    }
}

fn declaration(out: &mut String, head: &str, d: &Declaration) {
    writeln!(out, "  {head} = {}", expr(&d.body)).unwrap();
    if !d.locals.is_empty() {
        out.push_str("  where {\n");
        for l in &d.locals {
            writeln!(out, "    {} = {}", l.name, expr(&l.body)).unwrap();
        }
        out.push_str("  }\n");
    }
}

pub(crate) fn expr(p: &ProcessExpr) -> String {
    let mut s = String::new();
    write_expr(&mut s, p);
    s
}

fn write_operand(out: &mut String, p: &ProcessExpr) {
    if p.is_choice() {
        out.push('(');
        write_expr(out, p);
        out.push(')');
    } else {
        write_expr(out, p);
    }
}

fn write_expr(out: &mut String, p: &ProcessExpr) {
    match p {
        ProcessExpr::Prefix(e, rest) => {
            write!(out, "{e} -> ").unwrap();
            write_operand(out, rest);
        }
        ProcessExpr::ExternalChoice(l, r) => {
            write_operand(out, l);
            out.push_str(" [] ");
            write_operand(out, r);
        }
        ProcessExpr::InternalChoice(l, r) => {
            write_operand(out, l);
            out.push_str(" |~| ");
            write_operand(out, r);
        }
        ProcessExpr::Ref(n) => out.push_str(n.as_str()),
        // Empty has no Wright spelling; it only arises after projection.
        ProcessExpr::Success | ProcessExpr::Empty => out.push_str("TICK"),
    }
}
