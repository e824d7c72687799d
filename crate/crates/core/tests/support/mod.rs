//! Shared test helpers: fixtures, golden normalization, seeded generators
//! and brute-force oracles that do not go through the library's own
//! semantics.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use regex::Regex;
use wright_core::engine::{Label, Lts};
use wright_core::model::{DeclKind, Declaration, EventRef, EventSet, Identifier, Polarity, ProcessExpr};

pub const TICK: &str = "TICK";

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn ident(s: &str) -> Identifier {
    Identifier::new(s).unwrap()
}

pub fn ev(s: &str) -> EventRef {
    EventRef::new(ident(s), Polarity::Observed)
}

pub fn event_set(names: &[&str]) -> EventSet {
    let mut s = EventSet::new();
    for n in names {
        s.insert(ev(n));
    }
    s
}

// ---------------------------------------------------------------------------
// golden comparison

/// Splits CSPM text into statements, drops whitespace, and sorts the
/// members of innermost braces and of untyped channel lists.
pub fn normalize_cspm(text: &str) -> Vec<String> {
    let start = Regex::new(r"^\s*(--|channel\b|assert\b|transparent\b|[A-Za-z_][A-Za-z0-9_]*(\(.*\))?\s*=)").unwrap();
    let mut stmts: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if start.is_match(line) || stmts.is_empty() {
            stmts.push(line.to_string());
        } else {
            let last = stmts.last_mut().unwrap();
            last.push(' ');
            last.push_str(line);
        }
    }
    stmts.iter().map(|s| canonical(s)).collect()
}

fn canonical(stmt: &str) -> String {
    let squeezed: String = stmt.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = Regex::new(r"\{(\|?)([^{}|]*)(\|?)\}").unwrap();
    let sorted = inner.replace_all(&squeezed, |c: &regex::Captures| {
        let mut items: Vec<&str> = c[2].split(',').filter(|s| !s.is_empty()).collect();
        items.sort();
        format!("{{{}{}{}}}", &c[1], items.join(","), &c[3])
    });
    if let Some(rest) = sorted.strip_prefix("channel") {
        if !rest.contains(':') {
            let mut items: Vec<&str> = rest.split(',').collect();
            items.sort();
            return format!("channel{}", items.join(","));
        }
    }
    sorted.into_owned()
}

/// Every statement of `golden` occurs in `actual`, in the same order.
/// Golden files may elide material with a `.....` line. Returns the first
/// golden statement that could not be matched.
pub fn golden_mismatch(golden: &str, actual: &str) -> Option<String> {
    let want: Vec<String> =
        normalize_cspm(&golden.lines().filter(|l| l.trim() != ".....").collect::<Vec<_>>().join("\n"));
    let have = normalize_cspm(actual);
    let mut at = 0;
    for w in want {
        match have[at..].iter().position(|h| *h == w) {
            Some(i) => at += i + 1,
            None => return Some(w),
        }
    }
    None
}

// ---------------------------------------------------------------------------
// random process terms

pub const EVENTS: [&str; 3] = ["a", "b", "c"];

/// A declaration `P` of at most `max_ops` prefix/choice operators over at
/// most three events, optionally with one where-local `Q`.
pub fn random_declaration(rng: &mut impl Rng, max_ops: usize) -> Declaration {
    let width = rng.gen_range(1..=EVENTS.len());
    let events = &EVENTS[..width];
    let with_local = rng.gen_bool(0.35);
    let names: Vec<&str> = if with_local { vec!["P", "Q"] } else { vec!["P"] };
    let mut budget = max_ops;
    let local_budget = if with_local { rng.gen_range(1..=2.min(budget)) } else { 0 };
    budget -= local_budget;
    let body = random_term(rng, &mut budget, events, &names);
    let mut d = Declaration::new(DeclKind::Local, ident("P"), body);
    if with_local {
        let mut lb = local_budget;
        let q = random_term(rng, &mut lb, events, &names);
        d.locals.push(Declaration::new(DeclKind::Local, ident("Q"), q));
    }
    d
}

pub fn random_term(rng: &mut impl Rng, budget: &mut usize, events: &[&str], names: &[&str]) -> ProcessExpr {
    if *budget == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.6) {
            ProcessExpr::Ref(ident(names[rng.gen_range(0..names.len())]))
        } else {
            ProcessExpr::Success
        };
    }
    *budget -= 1;
    match rng.gen_range(0..4) {
        0 | 1 => {
            let e = ev(events[rng.gen_range(0..events.len())]);
            ProcessExpr::prefix(e, random_term(rng, budget, events, names))
        }
        2 => {
            let l = random_term(rng, budget, events, names);
            ProcessExpr::ext(l, random_term(rng, budget, events, names))
        }
        _ => {
            let l = random_term(rng, budget, events, names);
            ProcessExpr::int(l, random_term(rng, budget, events, names))
        }
    }
}

/// No name of `d` reaches itself without passing a prefix.
pub fn is_guarded(d: &Declaration) -> bool {
    fn heads<'a>(p: &'a ProcessExpr, out: &mut Vec<&'a Identifier>) {
        match p {
            ProcessExpr::Ref(n) => out.push(n),
            ProcessExpr::ExternalChoice(l, r) | ProcessExpr::InternalChoice(l, r) => {
                heads(l, out);
                heads(r, out);
            }
            _ => {}
        }
    }
    std::iter::once(d).chain(d.locals.iter()).all(|start| {
        let mut seen: Vec<&Identifier> = Vec::new();
        let mut stack = Vec::new();
        heads(&start.body, &mut stack);
        while let Some(n) = stack.pop() {
            if n == &start.name {
                return false;
            }
            if !seen.contains(&n) {
                seen.push(n);
                if let Some(b) = body_of(d, n) {
                    heads(b, &mut stack);
                }
            }
        }
        true
    })
}

pub fn count_internal(p: &ProcessExpr) -> usize {
    let mut n = 0;
    p.visit(&mut |q| {
        if matches!(q, ProcessExpr::InternalChoice(..)) {
            n += 1;
        }
    });
    n
}

// ---------------------------------------------------------------------------
// trace oracle over process terms

#[derive(Clone, Copy)]
enum Step<'a> {
    Event(&'a EventRef, &'a ProcessExpr),
    Tick,
}

fn body_of<'a>(d: &'a Declaration, n: &Identifier) -> Option<&'a ProcessExpr> {
    if &d.name == n {
        Some(&d.body)
    } else {
        d.local(n).map(|l| &l.body)
    }
}

/// Initial steps of `p`. A name already unfolded during this call adds
/// nothing, which is the least fixed point for unguarded recursion. Empty
/// has no behaviour at all.
fn steps<'a>(d: &'a Declaration, p: &'a ProcessExpr, unfolded: &mut Vec<&'a Identifier>, out: &mut Vec<Step<'a>>) {
    match p {
        ProcessExpr::Prefix(e, q) => out.push(Step::Event(e, q)),
        ProcessExpr::Success => out.push(Step::Tick),
        ProcessExpr::ExternalChoice(l, r) | ProcessExpr::InternalChoice(l, r) => {
            steps(d, l, unfolded, out);
            steps(d, r, unfolded, out);
        }
        ProcessExpr::Ref(n) => {
            if unfolded.contains(&n) {
                return;
            }
            unfolded.push(n);
            if let Some(b) = body_of(d, n) {
                steps(d, b, unfolded, out);
            }
        }
        ProcessExpr::Empty => {}
    }
}

fn initial_steps<'a>(d: &'a Declaration, p: &'a ProcessExpr) -> Vec<Step<'a>> {
    let mut out = Vec::new();
    steps(d, p, &mut Vec::new(), &mut out);
    out
}

/// Traces of `d` with at most `depth` labels; a tick ends a trace.
pub fn term_traces(d: &Declaration, depth: usize) -> BTreeSet<Vec<String>> {
    projected_traces(d, None, depth)
}

/// Restriction of a trace to `keep`; ticks always survive.
pub fn restrict(trace: &[String], keep: &HashSet<String>) -> Vec<String> {
    trace.iter().filter(|e| *e == TICK || keep.contains(*e)).cloned().collect()
}

/// `{ t restricted to keep | t in traces(d) }`, cut at `depth` labels.
/// Explores (term, restricted trace) pairs with a visited set, so runs of
/// hidden events of any length are covered.
pub fn projected_traces(d: &Declaration, keep: Option<&HashSet<String>>, depth: usize) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    let mut seen: HashSet<(*const ProcessExpr, Vec<String>)> = HashSet::new();
    let mut stack: Vec<(&ProcessExpr, Vec<String>)> = vec![(&d.body, Vec::new())];
    while let Some((p, trace)) = stack.pop() {
        if !seen.insert((p as *const _, trace.clone())) {
            continue;
        }
        out.insert(trace.clone());
        for s in initial_steps(d, p) {
            let (label, next) = match s {
                Step::Event(e, q) => (e.qualified_name(), Some(q)),
                Step::Tick => (TICK.to_string(), None),
            };
            let mut t = trace.clone();
            t.push(label);
            let t = match keep {
                Some(k) => restrict(&t, k),
                None => t,
            };
            if t.len() > depth {
                continue;
            }
            match next {
                Some(q) => stack.push((q, t)),
                None => {
                    out.insert(t);
                }
            }
        }
    }
    out
}

/// Traces that do not end in a tick.
pub fn without_tick(traces: &BTreeSet<Vec<String>>) -> BTreeSet<Vec<String>> {
    traces.iter().filter(|t| t.last().map(String::as_str) != Some(TICK)).cloned().collect()
}

pub fn lts_traces(l: &Lts, depth: usize) -> BTreeSet<Vec<String>> {
    l.traces_up_to(depth).iter().map(|t| l.trace_names(t)).collect()
}

// ---------------------------------------------------------------------------
// small random machines and a brute-force failures-divergences model

pub const MACHINE_EVENTS: [&str; 2] = ["a", "b"];

/// A machine with up to `max_states` live states over {a, b}. Ticks lead to
/// an extra terminal state with no transitions.
pub fn random_machine(rng: &mut impl Rng, max_states: usize) -> Lts {
    let n = rng.gen_range(1..=max_states);
    let done = n;
    let mut t: Vec<Vec<(Label, usize)>> = vec![Vec::new(); n + 1];
    for s in t.iter_mut().take(n) {
        for _ in 0..rng.gen_range(0..=3) {
            let r: f64 = rng.gen();
            let lab = if r < 0.35 {
                Label::Tau
            } else if r < 0.9 {
                Label::Event(rng.gen_range(0..MACHINE_EVENTS.len() as u32))
            } else {
                Label::Tick
            };
            let target = if lab == Label::Tick { done } else { rng.gen_range(0..n) };
            s.push((lab, target));
        }
    }
    machine(0, t)
}

pub fn machine(initial: usize, t: Vec<Vec<(Label, usize)>>) -> Lts {
    let names: Vec<String> = MACHINE_EVENTS.iter().map(|s| s.to_string()).collect();
    Lts::from_parts(initial, t, (0..names.len() as u32).collect(), Arc::new(names))
}

/// A copy of `m` with some internal choices resolved: states with several
/// tau moves may lose all but one of them. Always a refinement of `m`.
pub fn prune_taus(rng: &mut impl Rng, m: &Lts) -> Lts {
    let mut t = m.transitions.clone();
    for s in t.iter_mut() {
        let taus: Vec<usize> = (0..s.len()).filter(|&i| s[i].0 == Label::Tau).collect();
        if taus.len() < 2 || rng.gen_bool(0.4) {
            continue;
        }
        let keep = taus[rng.gen_range(0..taus.len())];
        let mut i = 0;
        s.retain(|(l, _)| {
            let k = *l != Label::Tau || i == keep;
            i += 1;
            k
        });
    }
    machine(m.initial, t)
}

/// Explicit failures-divergences observations of a machine, up to a depth.
pub struct BruteFd {
    /// Traces over {a, b}, with a terminating tick where possible.
    pub traces: BTreeSet<Vec<Label>>,
    pub divergences: BTreeSet<Vec<Label>>,
    /// (trace, refusal) with refusals drawn from {a, b, tick}.
    pub failures: BTreeSet<(Vec<Label>, BTreeSet<Label>)>,
}

fn all_refusals() -> Vec<BTreeSet<Label>> {
    let universe = [Label::Event(0), Label::Event(1), Label::Tick];
    (0..1u32 << universe.len())
        .map(|mask| (0..universe.len()).filter(|i| mask & (1 << i) != 0).map(|i| universe[i]).collect())
        .collect()
}

fn closure(m: &Lts, seeds: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
    let mut out: BTreeSet<usize> = BTreeSet::new();
    let mut stack: Vec<usize> = seeds.into_iter().collect();
    while let Some(s) = stack.pop() {
        if out.insert(s) {
            for (l, t) in &m.transitions[s] {
                if *l == Label::Tau {
                    stack.push(*t);
                }
            }
        }
    }
    out
}

/// States from which a tau path returns to themselves.
fn divergent_states(m: &Lts) -> Vec<bool> {
    (0..m.len())
        .map(|s| {
            let succ: Vec<usize> = m.transitions[s].iter().filter(|(l, _)| *l == Label::Tau).map(|(_, t)| *t).collect();
            closure(m, succ).contains(&s)
        })
        .collect()
}

pub fn brute_fd(m: &Lts, depth: usize) -> BruteFd {
    let div = divergent_states(m);
    let refusals = all_refusals();
    let mut fd = BruteFd { traces: BTreeSet::new(), divergences: BTreeSet::new(), failures: BTreeSet::new() };
    let mut frontier: Vec<(Vec<Label>, BTreeSet<usize>, bool)> = vec![(Vec::new(), closure(m, [m.initial]), false)];
    for level in 0..=depth {
        let mut next = Vec::new();
        for (trace, states, diverged) in frontier {
            let diverged = diverged || states.iter().any(|&s| div[s]);
            fd.traces.insert(trace.clone());
            if diverged {
                fd.divergences.insert(trace.clone());
            }
            for x in &refusals {
                let refused = diverged
                    || states.iter().any(|&s| {
                        let moves = &m.transitions[s];
                        !moves.iter().any(|(l, _)| *l == Label::Tau) && moves.iter().all(|(l, _)| !x.contains(l))
                    });
                if refused {
                    fd.failures.insert((trace.clone(), x.clone()));
                }
            }
            let ticks = states.iter().any(|&s| m.transitions[s].iter().any(|(l, _)| *l == Label::Tick));
            if ticks || diverged {
                let mut t = trace.clone();
                t.push(Label::Tick);
                fd.traces.insert(t.clone());
                if diverged {
                    fd.divergences.insert(t.clone());
                }
                for x in &refusals {
                    fd.failures.insert((t.clone(), x.clone()));
                }
            }
            if level == depth {
                continue;
            }
            for e in 0..MACHINE_EVENTS.len() as u32 {
                let targets: Vec<usize> = states
                    .iter()
                    .flat_map(|&s| m.transitions[s].iter().filter(|(l, _)| *l == Label::Event(e)).map(|(_, t)| *t))
                    .collect();
                if targets.is_empty() && !diverged {
                    continue;
                }
                let mut t = trace.clone();
                t.push(Label::Event(e));
                next.push((t, closure(m, targets), diverged));
            }
        }
        frontier = next;
    }
    fd
}

/// `spec [FD= imp` on the observations both machines make up to the depth
/// the models were built with.
pub fn brute_refines(spec: &BruteFd, imp: &BruteFd) -> bool {
    imp.divergences.is_subset(&spec.divergences)
        && imp.traces.is_subset(&spec.traces)
        && imp.failures.is_subset(&spec.failures)
}
