//! Syntactic process operators: pre-normalization for determinization,
//! determinization, projection onto a set of kept events, and prefixing.

use crate::alphabet::AlphabetInfo;
use crate::diag::Diagnostic;
use crate::model::*;

/// Rewrites `(e -> Q) op (e -> S)` into `e -> (Q [] S)`, bottom-up, until
/// no choice has two branches prefixed by the same event.
pub fn normalize_for_det(p: &ProcessExpr) -> ProcessExpr {
    match p {
        ProcessExpr::Prefix(e, rest) => ProcessExpr::prefix(e.clone(), normalize_for_det(rest)),
        ProcessExpr::ExternalChoice(l, r) => merge_choice(normalize_for_det(l), normalize_for_det(r), true),
        ProcessExpr::InternalChoice(l, r) => merge_choice(normalize_for_det(l), normalize_for_det(r), false),
        other => other.clone(),
    }
}

fn merge_choice(l: ProcessExpr, r: ProcessExpr, external: bool) -> ProcessExpr {
    match (l, r) {
        (ProcessExpr::Prefix(a, q), ProcessExpr::Prefix(b, s)) if a == b => {
            // the merged continuation is a fresh choice and may merge again
            ProcessExpr::prefix(a, merge_choice(*q, *s, true))
        }
        (l, r) if external => ProcessExpr::ext(l, r),
        (l, r) => ProcessExpr::int(l, r),
    }
}

/// Replaces every internal choice by an external one.
pub fn determinize(p: &ProcessExpr) -> ProcessExpr {
    match p {
        ProcessExpr::Prefix(e, rest) => ProcessExpr::prefix(e.clone(), determinize(rest)),
        ProcessExpr::ExternalChoice(l, r) | ProcessExpr::InternalChoice(l, r) => {
            ProcessExpr::ext(determinize(l), determinize(r))
        }
        other => other.clone(),
    }
}

/// `normalize_for_det` then `determinize`, on the body and every local.
pub fn determinize_declaration(d: &Declaration) -> Declaration {
    let mut out = d.clone();
    out.body = determinize(&normalize_for_det(&d.body));
    for l in &mut out.locals {
        l.body = determinize(&normalize_for_det(&l.body));
    }
    out
}

/// Projection by elimination, in postorder.
///
/// Rule 1 drops a prefix whose event is not kept. Rule 2 erases a reference
/// to `self_name` reached only through dropped prefixes. Rule 3 collapses a
/// choice with an Empty branch.
pub fn project_to(p: &ProcessExpr, keep: &EventSet, self_name: &Identifier) -> ProcessExpr {
    project(p, keep, self_name, false, false)
}

/// `guarded`: some kept prefix lies between the root and this node.
/// `eliminated`: some dropped prefix does.
fn project(p: &ProcessExpr, keep: &EventSet, me: &Identifier, guarded: bool, eliminated: bool) -> ProcessExpr {
    match p {
        ProcessExpr::Prefix(e, rest) => {
            if keep.contains(e) {
                ProcessExpr::prefix(e.clone(), project(rest, keep, me, true, eliminated))
            } else {
                project(rest, keep, me, guarded, true)
            }
        }
        ProcessExpr::ExternalChoice(l, r) => collapse(
            project(l, keep, me, guarded, eliminated),
            project(r, keep, me, guarded, eliminated),
            true,
        ),
        ProcessExpr::InternalChoice(l, r) => collapse(
            project(l, keep, me, guarded, eliminated),
            project(r, keep, me, guarded, eliminated),
            false,
        ),
        ProcessExpr::Ref(n) if n == me && !guarded && eliminated => ProcessExpr::Empty,
        other => other.clone(),
    }
}

fn collapse(l: ProcessExpr, r: ProcessExpr, external: bool) -> ProcessExpr {
    match (l, r) {
        (ProcessExpr::Empty, x) | (x, ProcessExpr::Empty) => x,
        (l, r) if external => ProcessExpr::ext(l, r),
        (l, r) => ProcessExpr::int(l, r),
    }
}

/// Re-applies rule 3 everywhere, after references were replaced by Empty.
fn simplify(p: &ProcessExpr) -> ProcessExpr {
    match p {
        ProcessExpr::Prefix(e, rest) => ProcessExpr::prefix(e.clone(), simplify(rest)),
        ProcessExpr::ExternalChoice(l, r) => collapse(simplify(l), simplify(r), true),
        ProcessExpr::InternalChoice(l, r) => collapse(simplify(l), simplify(r), false),
        other => other.clone(),
    }
}

/// Projects a declaration and its locals, each under its own name. Locals
/// that vanish are dropped and references to them become Empty.
pub fn project_declaration(d: &Declaration, keep: &EventSet) -> (Declaration, Vec<Diagnostic>) {
    let mut out = d.clone();
    out.body = project_to(&d.body, keep, &d.name);
    for l in &mut out.locals {
        l.body = project_to(&l.body, keep, &l.name);
    }
    let mut diags = Vec::new();
    while let Some(i) = out.locals.iter().position(|l| l.body == ProcessExpr::Empty) {
        let gone = out.locals.remove(i);
        diags.push(Diagnostic::warning(
            gone.pos,
            format!("local `{}` of `{}` has no behaviour left after projection; references to it become empty", gone.name, d.name),
        ));
        let mut erase = |n: &Identifier| {
            if n == &gone.name {
                ProcessExpr::Empty
            } else {
                ProcessExpr::Ref(n.clone())
            }
        };
        out.body = simplify(&out.body.map_refs(&mut erase));
        for l in &mut out.locals {
            l.body = simplify(&l.body.map_refs(&mut erase));
        }
    }
    (out, diags)
}

/// The declaration restricted to its observed events.
pub fn restrict_to_observed(d: &Declaration, alphabet: &AlphabetInfo) -> (Declaration, Vec<Diagnostic>) {
    project_declaration(d, &alphabet.observed)
}

/// Copy of `d` with every event scoped by `prefix`.
pub fn rename_with_prefix(d: &Declaration, prefix: &Identifier) -> Result<Declaration, ModelError> {
    let mut out = d.clone();
    let mut scope = |e: &EventRef| e.scope_with(prefix);
    out.body = d.body.try_map_events(&mut scope)?;
    for l in &mut out.locals {
        l.body = l.body.try_map_events(&mut scope)?;
    }
    Ok(out)
}
