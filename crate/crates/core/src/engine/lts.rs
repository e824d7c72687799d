//! Process terms to explicit labelled transition systems.
//!
//! Terms are hash-consed, so a state is a term id and tail recursion closes
//! into a finite machine. Tick behaves as an ordinary event that every
//! parallel synchronizes on, followed by the terminated state.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use super::env::{Env, Ev, EvSet};
use super::EngineError;
use crate::codegen::cspm::Proc;

type Transitions = Vec<Vec<(Label, usize)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Tau,
    Event(Ev),
    Tick,
}

#[derive(Debug, Clone)]
pub struct Lts {
    pub initial: usize,
    /// Outgoing transitions per state, sorted and deduplicated.
    pub transitions: Vec<Vec<(Label, usize)>>,
    /// Declared alphabet, used for the refinement precondition.
    pub alphabet: EvSet,
    pub names: Arc<Vec<String>>,
}

pub const TICK_NAME: &str = "TICK";

impl Lts {
    pub fn from_parts(
        initial: usize,
        mut transitions: Vec<Vec<(Label, usize)>>,
        alphabet: EvSet,
        names: Arc<Vec<String>>,
    ) -> Self {
        for t in &mut transitions {
            t.sort();
            t.dedup();
        }
        Lts { initial, transitions, alphabet, names }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn label_name(&self, l: Label) -> String {
        match l {
            Label::Tau => "tau".into(),
            Label::Tick => TICK_NAME.into(),
            Label::Event(e) => self.names[e as usize].clone(),
        }
    }

    pub fn is_stable(&self, s: usize) -> bool {
        !self.transitions[s].iter().any(|(l, _)| *l == Label::Tau)
    }

    /// Visible labels offered by `s`, tick included.
    pub fn ready(&self, s: usize) -> BTreeSet<Label> {
        self.transitions[s].iter().map(|(l, _)| *l).filter(|l| *l != Label::Tau).collect()
    }

    /// States reachable from `seeds` by tau moves, seeds included.
    pub fn tau_closure(&self, seeds: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        while let Some(s) = stack.pop() {
            if seen.insert(s) {
                for (l, t) in &self.transitions[s] {
                    if *l == Label::Tau && !seen.contains(t) {
                        stack.push(*t);
                    }
                }
            }
        }
        seen
    }

    /// Whether each state lies on a tau cycle (self-loops included).
    pub fn on_tau_cycle(&self) -> Vec<bool> {
        let n = self.len();
        let mut out = vec![false; n];
        // iterative Tarjan restricted to tau edges
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut next = 0;
        let taus = |s: usize| -> Vec<usize> {
            self.transitions[s].iter().filter(|(l, _)| *l == Label::Tau).map(|(_, t)| *t).collect()
        };
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut work: Vec<(usize, Vec<usize>, usize)> = vec![(root, taus(root), 0)];
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some((v, succ, i)) = work.last_mut() {
                let v = *v;
                if *i < succ.len() {
                    let w = succ[*i];
                    *i += 1;
                    if w == v {
                        out[v] = true;
                    }
                    if index[w] == usize::MAX {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, taus(w), 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    work.pop();
                    if let Some((u, _, _)) = work.last() {
                        low[*u] = low[*u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut scc = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            scc.push(w);
                            if w == v {
                                break;
                            }
                        }
                        if scc.len() > 1 {
                            for w in scc {
                                out[w] = true;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// All traces with at most `depth` visible labels. A tick ends a trace.
    pub fn traces_up_to(&self, depth: usize) -> BTreeSet<Vec<Label>> {
        let mut out = BTreeSet::new();
        let mut frontier = vec![(Vec::new(), self.tau_closure([self.initial]))];
        out.insert(Vec::new());
        for _ in 0..depth {
            let mut next = Vec::new();
            for (trace, states) in frontier {
                let mut by_label: HashMap<Label, Vec<usize>> = HashMap::new();
                for &s in &states {
                    for (l, t) in &self.transitions[s] {
                        if *l != Label::Tau {
                            by_label.entry(*l).or_default().push(*t);
                        }
                    }
                }
                for (l, targets) in by_label {
                    let mut t = trace.clone();
                    t.push(l);
                    out.insert(t.clone());
                    if l != Label::Tick {
                        next.push((t, self.tau_closure(targets)));
                    }
                }
            }
            frontier = next;
        }
        out
    }

    pub fn trace_names(&self, trace: &[Label]) -> Vec<String> {
        trace.iter().map(|l| self.label_name(*l)).collect()
    }
}

type T = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Term {
    Stop,
    Skip,
    /// Successfully terminated.
    Omega,
    /// Unguarded recursion: diverges.
    Div,
    Prefix(Ev, T),
    Ext(T, T),
    Int(T, T),
    Ref(u32),
    Par(T, u32, T),
    Hide(T, u32),
    Rename(T, u32),
}

const STOP: T = 0;
const SKIP: T = 1;
const OMEGA: T = 2;
const DIV: T = 3;

/// Per-compilation term arena. Definitions are compiled on first use.
struct Builder<'e> {
    env: &'e Env,
    terms: Vec<Term>,
    index: HashMap<Term, T>,
    sets: Vec<EvSet>,
    set_index: HashMap<EvSet, u32>,
    renames: Vec<Vec<(Ev, Ev)>>,
    rename_index: HashMap<Vec<(Ev, Ev)>, u32>,
    def_ids: HashMap<String, u32>,
    defs: Vec<(String, Option<T>)>,
    /// Definitions that reach themselves without passing a prefix.
    unguarded: HashMap<String, bool>,
}

impl<'e> Builder<'e> {
    fn new(env: &'e Env) -> Self {
        let mut b = Builder {
            env,
            terms: Vec::new(),
            index: HashMap::new(),
            sets: Vec::new(),
            set_index: HashMap::new(),
            renames: Vec::new(),
            rename_index: HashMap::new(),
            def_ids: HashMap::new(),
            defs: Vec::new(),
            unguarded: HashMap::new(),
        };
        for t in [Term::Stop, Term::Skip, Term::Omega, Term::Div] {
            b.intern(t);
        }
        b
    }

    fn intern(&mut self, t: Term) -> T {
        if let Some(&id) = self.index.get(&t) {
            return id;
        }
        let id = self.terms.len() as T;
        self.terms.push(t.clone());
        self.index.insert(t, id);
        id
    }

    fn set(&mut self, s: EvSet) -> u32 {
        let next = self.sets.len() as u32;
        *self.set_index.entry(s.clone()).or_insert_with(|| {
            self.sets.push(s);
            next
        })
    }

    fn renaming(&mut self, mut r: Vec<(Ev, Ev)>) -> u32 {
        r.sort();
        r.dedup();
        let next = self.renames.len() as u32;
        *self.rename_index.entry(r.clone()).or_insert_with(|| {
            self.renames.push(r);
            next
        })
    }

    fn def_id(&mut self, name: &str) -> Result<u32, EngineError> {
        if let Some(&d) = self.def_ids.get(name) {
            return Ok(d);
        }
        if self.env.definition(name).is_none() {
            return Err(EngineError::Unresolved(name.to_string()));
        }
        let d = self.defs.len() as u32;
        self.defs.push((name.to_string(), None));
        self.def_ids.insert(name.to_string(), d);
        Ok(d)
    }

    fn def_body(&mut self, d: u32) -> Result<T, EngineError> {
        if let Some(t) = self.defs[d as usize].1 {
            return Ok(t);
        }
        let name = self.defs[d as usize].0.clone();
        let body = self.env.definition(&name).expect("checked in def_id").clone();
        let t = if self.is_unguarded(&name) { DIV } else { self.term(&body)? };
        self.defs[d as usize].1 = Some(t);
        Ok(t)
    }

    fn term(&mut self, p: &Proc) -> Result<T, EngineError> {
        let t = match p {
            Proc::Stop => return Ok(STOP),
            Proc::Skip => return Ok(SKIP),
            Proc::Ref(n) => Term::Ref(self.def_id(n)?),
            Proc::Prefix(e, rest) => {
                let e = self.env.event(e).ok_or_else(|| EngineError::Unresolved(e.clone()))?;
                Term::Prefix(e, self.term(rest)?)
            }
            Proc::Ext(l, r) => Term::Ext(self.term(l)?, self.term(r)?),
            Proc::Int(l, r) => Term::Int(self.term(l)?, self.term(r)?),
            Proc::Par(l, s, r) => {
                let s = self.env.eval_set(s)?;
                let l = self.term(l)?;
                let r = self.term(r)?;
                Term::Par(l, self.set(s), r)
            }
            Proc::Hide(inner, s) => {
                let s = self.env.eval_set(s)?;
                let inner = self.term(inner)?;
                Term::Hide(inner, self.set(s))
            }
            Proc::Rename(inner, r) => {
                let r = self.env.eval_renaming(r)?;
                let inner = self.term(inner)?;
                Term::Rename(inner, self.renaming(r))
            }
            Proc::Paren(inner) => return self.term(inner),
        };
        Ok(self.intern(t))
    }

    /// Whether `name` can reach itself through references that no prefix
    /// guards. Every operator is strict in divergence, so such a definition
    /// is divergence as a whole.
    fn is_unguarded(&mut self, name: &str) -> bool {
        if let Some(&u) = self.unguarded.get(name) {
            return u;
        }
        let mut seen: Vec<&str> = Vec::new();
        let mut stack: Vec<&str> = Vec::new();
        if let Some(p) = self.env.definition(name) {
            unguarded_refs(p, &mut stack);
        }
        let mut found = false;
        while let Some(n) = stack.pop() {
            if n == name {
                found = true;
                break;
            }
            if seen.contains(&n) {
                continue;
            }
            seen.push(n);
            if let Some(p) = self.env.definition(n) {
                unguarded_refs(p, &mut stack);
            }
        }
        self.unguarded.insert(name.to_string(), found);
        found
    }

    /// Unfolds references until a non-reference term; a reference cycle
    /// with no event in between is divergence.
    fn canon(&mut self, mut t: T) -> Result<T, EngineError> {
        let mut seen = Vec::new();
        while let Term::Ref(d) = self.terms[t as usize] {
            if seen.contains(&d) {
                return Ok(DIV);
            }
            seen.push(d);
            t = self.def_body(d)?;
        }
        Ok(t)
    }

    fn moves(&mut self, t: T, unfolding: &mut Vec<u32>) -> Result<Vec<(Label, T)>, EngineError> {
        let mut out = Vec::new();
        match self.terms[t as usize].clone() {
            Term::Stop | Term::Omega => {}
            Term::Skip => out.push((Label::Tick, OMEGA)),
            Term::Div => out.push((Label::Tau, DIV)),
            Term::Prefix(e, rest) => out.push((Label::Event(e), self.canon(rest)?)),
            Term::Int(l, r) => {
                out.push((Label::Tau, self.canon(l)?));
                out.push((Label::Tau, self.canon(r)?));
            }
            Term::Ref(d) => {
                if unfolding.contains(&d) {
                    out.push((Label::Tau, DIV));
                } else {
                    unfolding.push(d);
                    let body = self.def_body(d)?;
                    out = self.moves(body, unfolding)?;
                    unfolding.pop();
                }
            }
            Term::Ext(l, r) => {
                for (lab, l2) in self.moves(l, unfolding)? {
                    let next = if lab == Label::Tau { self.intern(Term::Ext(l2, r)) } else { l2 };
                    out.push((lab, next));
                }
                for (lab, r2) in self.moves(r, unfolding)? {
                    let next = if lab == Label::Tau { self.intern(Term::Ext(l, r2)) } else { r2 };
                    out.push((lab, next));
                }
            }
            Term::Par(l, s, r) => {
                let ml = self.moves(l, unfolding)?;
                let mr = self.moves(r, unfolding)?;
                if ml.iter().any(|(l, _)| *l == Label::Tick) && mr.iter().any(|(l, _)| *l == Label::Tick) {
                    out.push((Label::Tick, OMEGA));
                }
                let sync = |e: Ev, b: &Builder| b.sets[s as usize].contains(&e);
                for &(lab, l2) in &ml {
                    match lab {
                        Label::Tau => out.push((Label::Tau, self.intern(Term::Par(l2, s, r)))),
                        Label::Tick => {}
                        Label::Event(e) if !sync(e, self) => out.push((lab, self.intern(Term::Par(l2, s, r)))),
                        Label::Event(_) => {
                            for &(lab_r, r2) in &mr {
                                if lab_r == lab {
                                    out.push((lab, self.intern(Term::Par(l2, s, r2))));
                                }
                            }
                        }
                    }
                }
                for &(lab, r2) in &mr {
                    match lab {
                        Label::Tau => out.push((Label::Tau, self.intern(Term::Par(l, s, r2)))),
                        Label::Tick => {}
                        Label::Event(e) if !sync(e, self) => out.push((lab, self.intern(Term::Par(l, s, r2)))),
                        Label::Event(_) => {}
                    }
                }
            }
            Term::Hide(inner, s) => {
                for (lab, i2) in self.moves(inner, unfolding)? {
                    match lab {
                        Label::Tick => out.push((Label::Tick, OMEGA)),
                        Label::Event(e) if self.sets[s as usize].contains(&e) => {
                            out.push((Label::Tau, self.intern(Term::Hide(i2, s))))
                        }
                        _ => out.push((lab, self.intern(Term::Hide(i2, s)))),
                    }
                }
            }
            Term::Rename(inner, r) => {
                for (lab, i2) in self.moves(inner, unfolding)? {
                    let lab = match lab {
                        Label::Tick => {
                            out.push((Label::Tick, OMEGA));
                            continue;
                        }
                        Label::Event(e) => {
                            let map = &self.renames[r as usize];
                            match map.binary_search_by_key(&e, |(f, _)| *f) {
                                Ok(i) => Label::Event(map[i].1),
                                Err(_) => lab,
                            }
                        }
                        Label::Tau => Label::Tau,
                    };
                    out.push((lab, self.intern(Term::Rename(i2, r))));
                }
            }
        }
        Ok(out)
    }

    fn explore(&mut self, root: T, max_states: usize) -> Result<(usize, Transitions), EngineError> {
        let root = self.canon(root)?;
        let mut state_of: HashMap<T, usize> = HashMap::new();
        let mut terms = vec![root];
        state_of.insert(root, 0);
        let mut transitions = Vec::new();
        let mut queue = VecDeque::from([root]);
        while let Some(t) = queue.pop_front() {
            let mut row = Vec::new();
            for (lab, next) in self.moves(t, &mut Vec::new())? {
                let next = self.canon(next)?;
                let id = match state_of.get(&next) {
                    Some(&id) => id,
                    None => {
                        if terms.len() >= max_states {
                            return Err(EngineError::ResourceLimit { limit: max_states });
                        }
                        let id = terms.len();
                        terms.push(next);
                        state_of.insert(next, id);
                        queue.push_back(next);
                        id
                    }
                };
                row.push((lab, id));
            }
            transitions.push(row);
        }
        Ok((0, transitions))
    }
}

fn unguarded_refs<'p>(p: &'p Proc, out: &mut Vec<&'p str>) {
    match p {
        Proc::Ref(n) => out.push(n),
        Proc::Stop | Proc::Skip | Proc::Prefix(..) => {}
        Proc::Ext(l, r) | Proc::Int(l, r) | Proc::Par(l, _, r) => {
            unguarded_refs(l, out);
            unguarded_refs(r, out);
        }
        Proc::Hide(i, _) | Proc::Rename(i, _) | Proc::Paren(i) => unguarded_refs(i, out),
    }
}

impl Env {
    /// Compiles `p` to an explicit machine over this script's events.
    pub fn compile(&self, p: &Proc, max_states: usize) -> Result<Lts, EngineError> {
        let alphabet = self.alphabet(p)?;
        let mut b = Builder::new(self);
        let root = b.term(p)?;
        let (initial, transitions) = b.explore(root, max_states)?;
        Ok(Lts::from_parts(initial, transitions, alphabet, self.names().clone()))
    }

    pub fn compile_named(&self, name: &str, max_states: usize) -> Result<Lts, EngineError> {
        self.compile(&Proc::reference(name), max_states)
    }
}
