//! Name resolution over a generated script: declared events, named sets and
//! process definitions.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::EngineError;
use crate::codegen::cspm::{Item, Proc, Renaming, Script, SetExpr};

pub type Ev = u32;
pub type EvSet = BTreeSet<Ev>;

#[derive(Debug, Clone)]
pub struct Env {
    names: Arc<Vec<String>>,
    index: HashMap<String, Ev>,
    channels: HashMap<String, Vec<Ev>>,
    sets: HashMap<String, SetExpr>,
    defs: HashMap<String, Proc>,
    def_alphabets: HashMap<String, EvSet>,
}

impl Env {
    pub fn from_script(script: &Script) -> Result<Self, EngineError> {
        let mut names = Vec::new();
        let mut index = HashMap::new();
        let mut channels = HashMap::new();
        let mut sets = HashMap::new();
        let mut defs = HashMap::new();
        let mut intern = |n: String, names: &mut Vec<String>| -> Ev {
            *index.entry(n.clone()).or_insert_with(|| {
                names.push(n);
                (names.len() - 1) as Ev
            })
        };
        for item in &script.items {
            match item {
                Item::Channels(cs) => {
                    for c in cs {
                        let e = intern(c.clone(), &mut names);
                        channels.insert(c.clone(), vec![e]);
                    }
                }
                Item::TypedChannel { name, members } => {
                    let evs = members.iter().map(|m| intern(format!("{name}.{m}"), &mut names)).collect();
                    channels.insert(name.clone(), evs);
                }
                Item::Set { name, value } => {
                    if sets.insert(name.clone(), value.clone()).is_some() {
                        return Err(EngineError::Duplicate(name.clone()));
                    }
                }
                Item::Def { name, body, .. } => {
                    if defs.insert(name.clone(), body.clone()).is_some() {
                        return Err(EngineError::Duplicate(name.clone()));
                    }
                }
                Item::Line(_) | Item::Blank | Item::Assert { .. } => {}
            }
        }
        let mut env = Env {
            names: Arc::new(names),
            index,
            channels,
            sets,
            defs,
            def_alphabets: HashMap::new(),
        };
        env.def_alphabets = env.alphabet_fixpoint();
        Ok(env)
    }

    pub fn names(&self) -> &Arc<Vec<String>> {
        &self.names
    }

    pub fn event(&self, name: &str) -> Option<Ev> {
        self.index.get(name).copied()
    }

    pub fn definition(&self, name: &str) -> Option<&Proc> {
        self.defs.get(name)
    }

    fn lookup(&self, name: &str) -> Result<Ev, EngineError> {
        self.event(name).ok_or_else(|| EngineError::Unresolved(name.to_string()))
    }

    pub fn eval_set(&self, s: &SetExpr) -> Result<EvSet, EngineError> {
        self.eval_set_depth(s, 0)
    }

    fn eval_set_depth(&self, s: &SetExpr, depth: usize) -> Result<EvSet, EngineError> {
        if depth > 64 {
            return Err(EngineError::Unresolved("cyclic set definition".into()));
        }
        match s {
            SetExpr::Enum(items) => items.iter().map(|i| self.lookup(i)).collect(),
            SetExpr::Productions(items) => {
                let mut out = EvSet::new();
                for i in items {
                    match self.channels.get(i) {
                        Some(evs) => out.extend(evs),
                        None => {
                            out.insert(self.lookup(i)?);
                        }
                    }
                }
                Ok(out)
            }
            SetExpr::Named(n) => match self.sets.get(n) {
                Some(v) => self.eval_set_depth(v, depth + 1),
                None => Err(EngineError::Unresolved(n.clone())),
            },
            SetExpr::Diff(a, b) => {
                let b = self.eval_set_depth(b, depth + 1)?;
                Ok(self.eval_set_depth(a, depth + 1)?.difference(&b).copied().collect())
            }
            SetExpr::Union(a, b) => {
                let mut a = self.eval_set_depth(a, depth + 1)?;
                a.extend(self.eval_set_depth(b, depth + 1)?);
                Ok(a)
            }
        }
    }

    /// Relabelling as pairs `(from, to)`; events outside the domain keep
    /// their name.
    pub fn eval_renaming(&self, r: &Renaming) -> Result<Vec<(Ev, Ev)>, EngineError> {
        match r {
            Renaming::Channel { channel, over } => self
                .eval_set(over)?
                .into_iter()
                .map(|x| Ok((x, self.lookup(&format!("{channel}.{}", self.names[x as usize]))?)))
                .collect(),
            Renaming::Collapse { target, over } => {
                let t = self.lookup(target)?;
                Ok(self.eval_set(over)?.into_iter().map(|x| (x, t)).collect())
            }
        }
    }

    /// Every name a definition, set or renaming mentions that the script
    /// does not declare. Sorted and deduplicated.
    pub fn unresolved_references(&self) -> Vec<String> {
        let mut missing = BTreeSet::new();
        let mut note = |r: Result<(), EngineError>| {
            if let Err(EngineError::Unresolved(n)) = r {
                missing.insert(n);
            }
        };
        for s in self.sets.values() {
            note(self.eval_set(s).map(|_| ()));
        }
        for body in self.defs.values() {
            let mut stack = vec![body];
            while let Some(p) = stack.pop() {
                match p {
                    Proc::Stop | Proc::Skip => {}
                    Proc::Ref(n) => {
                        if !self.defs.contains_key(n) {
                            note(Err(EngineError::Unresolved(n.clone())));
                        }
                    }
                    Proc::Prefix(e, rest) => {
                        note(self.lookup(e).map(|_| ()));
                        stack.push(rest);
                    }
                    Proc::Ext(l, r) | Proc::Int(l, r) => {
                        stack.push(l);
                        stack.push(r);
                    }
                    Proc::Par(l, s, r) => {
                        note(self.eval_set(s).map(|_| ()));
                        stack.push(l);
                        stack.push(r);
                    }
                    Proc::Hide(inner, s) => {
                        note(self.eval_set(s).map(|_| ()));
                        stack.push(inner);
                    }
                    Proc::Rename(inner, r) => {
                        note(self.eval_renaming(r).map(|_| ()));
                        stack.push(inner);
                    }
                    Proc::Paren(inner) => stack.push(inner),
                }
            }
        }
        missing.into_iter().collect()
    }

    /// Syntactic alphabet. Parallel contributes its synchronization set, so
    /// `P [| A |] STOP` has alphabet `αP ∪ A`.
    pub fn alphabet(&self, p: &Proc) -> Result<EvSet, EngineError> {
        self.alphabet_in(p, &self.def_alphabets, true)
    }

    fn alphabet_in(&self, p: &Proc, defs: &HashMap<String, EvSet>, strict: bool) -> Result<EvSet, EngineError> {
        Ok(match p {
            Proc::Stop | Proc::Skip => EvSet::new(),
            Proc::Ref(n) => match defs.get(n) {
                Some(a) => a.clone(),
                None if strict => return Err(EngineError::Unresolved(n.clone())),
                None => EvSet::new(),
            },
            Proc::Prefix(e, rest) => {
                let mut a = self.alphabet_in(rest, defs, strict)?;
                a.insert(self.lookup(e)?);
                a
            }
            Proc::Ext(l, r) | Proc::Int(l, r) => {
                let mut a = self.alphabet_in(l, defs, strict)?;
                a.extend(self.alphabet_in(r, defs, strict)?);
                a
            }
            Proc::Par(l, s, r) => {
                let mut a = self.alphabet_in(l, defs, strict)?;
                a.extend(self.alphabet_in(r, defs, strict)?);
                a.extend(self.eval_set(s)?);
                a
            }
            Proc::Hide(inner, s) => {
                let hidden = self.eval_set(s)?;
                self.alphabet_in(inner, defs, strict)?.difference(&hidden).copied().collect()
            }
            Proc::Rename(inner, r) => {
                let map = self.eval_renaming(r)?;
                let mut out = EvSet::new();
                for e in self.alphabet_in(inner, defs, strict)? {
                    match map.iter().find(|(f, _)| *f == e) {
                        Some((_, t)) => out.insert(*t),
                        None => out.insert(e),
                    };
                }
                if let Renaming::Collapse { target, .. } = r {
                    out.insert(self.lookup(target)?);
                }
                out
            }
            Proc::Paren(inner) => self.alphabet_in(inner, defs, strict)?,
        })
    }

    fn alphabet_fixpoint(&self) -> HashMap<String, EvSet> {
        let mut alpha: HashMap<String, EvSet> = self.defs.keys().map(|k| (k.clone(), EvSet::new())).collect();
        loop {
            let mut changed = false;
            for (name, body) in &self.defs {
                // unresolved names surface when the definition is compiled
                let Ok(a) = self.alphabet_in(body, &alpha, false) else { continue };
                let slot = alpha.get_mut(name).expect("seeded above");
                if a.len() > slot.len() {
                    *slot = a;
                    changed = true;
                }
            }
            if !changed {
                return alpha;
            }
        }
    }
}
