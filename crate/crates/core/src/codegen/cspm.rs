//! The subset of machine-readable CSP that the generator emits. Scripts are
//! built as trees and printed, and the refinement engine interprets the same
//! trees, so what gets checked is what gets written.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetExpr {
    /// `{a, b}`
    Enum(Vec<String>),
    /// `{|a, b|}`: every event a listed name produces.
    Productions(Vec<String>),
    Named(String),
    Diff(Box<SetExpr>, Box<SetExpr>),
    Union(Box<SetExpr>, Box<SetExpr>),
}

impl SetExpr {
    pub fn named(n: impl Into<String>) -> Self {
        SetExpr::Named(n.into())
    }

    pub fn diff(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Diff(Box::new(a), Box::new(b))
    }

    pub fn union(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Union(Box::new(a), Box::new(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Renaming {
    /// `[[ x <- c.x | x <- over ]]`
    Channel { channel: String, over: SetExpr },
    /// `[[ x <- target | x <- over ]]`
    Collapse { target: String, over: SetExpr },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Proc {
    Stop,
    Skip,
    Ref(String),
    Prefix(String, Box<Proc>),
    Ext(Box<Proc>, Box<Proc>),
    Int(Box<Proc>, Box<Proc>),
    Par(Box<Proc>, SetExpr, Box<Proc>),
    Hide(Box<Proc>, SetExpr),
    Rename(Box<Proc>, Renaming),
    /// Explicit grouping; prints one extra pair of parentheses.
    Paren(Box<Proc>),
}

impl Proc {
    pub fn reference(n: impl Into<String>) -> Self {
        Proc::Ref(n.into())
    }

    pub fn prefix(e: impl Into<String>, p: Proc) -> Self {
        Proc::Prefix(e.into(), Box::new(p))
    }

    pub fn ext(l: Proc, r: Proc) -> Self {
        Proc::Ext(Box::new(l), Box::new(r))
    }

    pub fn int(l: Proc, r: Proc) -> Self {
        Proc::Int(Box::new(l), Box::new(r))
    }

    pub fn par(l: Proc, s: SetExpr, r: Proc) -> Self {
        Proc::Par(Box::new(l), s, Box::new(r))
    }

    pub fn hide(p: Proc, s: SetExpr) -> Self {
        Proc::Hide(Box::new(p), s)
    }

    pub fn rename(p: Proc, r: Renaming) -> Self {
        Proc::Rename(Box::new(p), r)
    }

    pub fn paren(p: Proc) -> Self {
        Proc::Paren(Box::new(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    /// Port/computation consistency.
    PortComputation,
    /// Connector deadlock freedom.
    ConnectorDeadlockFree,
    /// Role deadlock freedom.
    RoleDeadlockFree,
    /// Port/role compatibility.
    PortRole,
}

impl Property {
    pub fn number(self) -> u8 {
        match self {
            Property::PortComputation => 1,
            Property::ConnectorDeadlockFree => 2,
            Property::RoleDeadlockFree => 3,
            Property::PortRole => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    /// A comment or any other line printed verbatim.
    Line(String),
    Blank,
    /// `channel a, b`
    Channels(Vec<String>),
    /// `channel c: {a, b}`
    TypedChannel { name: String, members: Vec<String> },
    Set { name: String, value: SetExpr },
    Def { name: String, body: Proc, flat: bool },
    Assert { spec: String, imp: String, property: Property },
}

impl Item {
    pub fn line(s: impl Into<String>) -> Self {
        Item::Line(s.into())
    }

    pub fn def(name: impl Into<String>, body: Proc) -> Self {
        Item::Def { name: name.into(), body, flat: false }
    }

    pub fn set(name: impl Into<String>, value: SetExpr) -> Self {
        Item::Set { name: name.into(), value }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    pub items: Vec<Item>,
}

impl Script {
    pub fn push(&mut self, item: Item) {
        self.items.push(item);
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = Item>) {
        self.items.extend(items);
    }

    pub fn definition(&self, name: &str) -> Option<&Proc> {
        self.items.iter().find_map(|i| match i {
            Item::Def { name: n, body, .. } if n == name => Some(body),
            _ => None,
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            render_item(&mut out, item);
            out.push('\n');
        }
        out
    }
}

pub fn assert_line(spec: &str, imp: &str) -> String {
    format!("assert {spec} [FD= {imp}")
}

fn render_item(out: &mut String, item: &Item) {
    match item {
        Item::Line(s) => out.push_str(s),
        Item::Blank => {}
        Item::Channels(names) => write!(out, "channel {}", names.join(", ")).unwrap(),
        Item::TypedChannel { name, members } => write!(out, "channel {name}: {{{}}}", members.join(", ")).unwrap(),
        Item::Set { name, value } => write!(out, "{name} = {}", set_text(value)).unwrap(),
        Item::Def { name, body, flat } => {
            write!(out, "{name} = ").unwrap();
            if *flat {
                flat_text(out, body);
            } else {
                proc_text(out, body, true);
            }
        }
        Item::Assert { spec, imp, .. } => out.push_str(&assert_line(spec, imp)),
    }
}

pub fn set_text(s: &SetExpr) -> String {
    match s {
        SetExpr::Enum(items) => format!("{{{}}}", items.join(", ")),
        SetExpr::Productions(items) => format!("{{|{}|}}", items.join(", ")),
        SetExpr::Named(n) => n.clone(),
        SetExpr::Diff(a, b) => format!("diff({}, {})", set_text(a), set_text(b)),
        SetExpr::Union(a, b) => format!("union({}, {})", set_text(a), set_text(b)),
    }
}

/// Binary operators print fully parenthesized, except that a parallel or
/// hiding at the top of an equation is left bare.
fn proc_text(out: &mut String, p: &Proc, top: bool) {
    match p {
        Proc::Stop => out.push_str("STOP"),
        Proc::Skip => out.push_str("SKIP"),
        Proc::Ref(n) => out.push_str(n),
        Proc::Prefix(e, rest) => {
            write!(out, "({e} -> ").unwrap();
            proc_text(out, rest, false);
            out.push(')');
        }
        Proc::Ext(l, r) | Proc::Int(l, r) => {
            let op = if matches!(p, Proc::Ext(..)) { "[]" } else { "|~|" };
            out.push('(');
            proc_text(out, l, false);
            write!(out, " {op} ").unwrap();
            proc_text(out, r, false);
            out.push(')');
        }
        Proc::Par(l, s, r) => {
            if !top {
                out.push('(');
            }
            proc_text(out, l, false);
            write!(out, "\n  [| {} |]\n  ", set_text(s)).unwrap();
            proc_text(out, r, false);
            if !top {
                out.push(')');
            }
        }
        Proc::Hide(inner, s) => {
            if !top {
                out.push('(');
            }
            proc_text(out, inner, false);
            write!(out, "\\ {}", set_text(s)).unwrap();
            if !top {
                out.push(')');
            }
        }
        Proc::Rename(inner, r) => {
            proc_text(out, inner, false);
            match r {
                Renaming::Channel { channel, over } => {
                    write!(out, "[[ x <- {channel}.x | x <- {} ]]", set_text(over)).unwrap()
                }
                Renaming::Collapse { target, over } => {
                    write!(out, " [[ x <- {target} | x <- {} ]]", set_text(over)).unwrap()
                }
            }
        }
        Proc::Paren(inner) => {
            out.push('(');
            proc_text(out, inner, false);
            out.push(')');
        }
    }
}

/// Minimal-parenthesis form, used for the header's `DFA` line.
fn flat_text(out: &mut String, p: &Proc) {
    match p {
        Proc::Prefix(e, rest) => {
            write!(out, "{e} -> ").unwrap();
            flat_text(out, rest);
        }
        Proc::Int(l, r) => {
            flat_text(out, l);
            out.push_str(" |~| ");
            flat_text(out, r);
        }
        Proc::Ext(l, r) => {
            flat_text(out, l);
            out.push_str(" [] ");
            flat_text(out, r);
        }
        other => proc_text(out, other, false),
    }
}
