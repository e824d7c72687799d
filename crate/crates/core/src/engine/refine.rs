//! Failures-divergences refinement of a machine against a normalized
//! specification, by breadth-first search over (impl state, spec node)
//! pairs so the first violation found has a shortest trace.

use std::collections::{BTreeSet, HashMap};

use super::lts::{Label, Lts, TICK_NAME};
use super::normal::FdModel;
use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A trace or a refusal the specification does not allow.
    Failure,
    Divergence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub trace: Vec<String>,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
    /// Product pairs visited.
    pub explored: usize,
}

pub fn check_alphabets(spec: &FdModel, imp: &Lts) -> Result<(), EngineError> {
    if spec.alphabet == imp.alphabet {
        return Ok(());
    }
    let name = |e: &u32| imp.names[*e as usize].clone();
    Err(EngineError::AlphabetMismatch {
        spec_only: spec.alphabet.difference(&imp.alphabet).map(name).collect(),
        impl_only: imp.alphabet.difference(&spec.alphabet).map(name).collect(),
    })
}

struct Search {
    pairs: Vec<(usize, usize)>,
    parent: Vec<Option<(usize, Label)>>,
    seen: HashMap<(usize, usize), usize>,
    max: usize,
}

impl Search {
    fn visit(&mut self, pair: (usize, usize), from: Option<(usize, Label)>) -> Result<Option<usize>, EngineError> {
        if self.seen.contains_key(&pair) {
            return Ok(None);
        }
        if self.pairs.len() >= self.max {
            return Err(EngineError::ResourceLimit { limit: self.max });
        }
        let id = self.pairs.len();
        self.seen.insert(pair, id);
        self.pairs.push(pair);
        self.parent.push(from);
        Ok(Some(id))
    }

    fn trace_to(&self, mut p: usize) -> Vec<Label> {
        let mut out = Vec::new();
        while let Some((q, lab)) = self.parent[p] {
            if lab != Label::Tau {
                out.push(lab);
            }
            p = q;
        }
        out.reverse();
        out
    }
}

pub fn check_refinement_fd(spec: &FdModel, imp: &Lts, max_states: usize) -> Result<Verdict, EngineError> {
    check_alphabets(spec, imp)?;
    let cyclic = imp.on_tau_cycle();
    let mut search = Search { pairs: Vec::new(), parent: Vec::new(), seen: HashMap::new(), max: max_states };
    let start = search.visit((imp.initial, spec.initial()), None)?.expect("first pair is new");
    let mut layer = vec![start];
    while !layer.is_empty() {
        // close the layer under implementation tau moves
        let mut stack = layer.clone();
        while let Some(p) = stack.pop() {
            let (i, n) = search.pairs[p];
            if spec.nodes[n].divergent {
                continue;
            }
            for (lab, j) in &imp.transitions[i] {
                if *lab == Label::Tau {
                    if let Some(q) = search.visit((*j, n), Some((p, Label::Tau)))? {
                        layer.push(q);
                        stack.push(q);
                    }
                }
            }
        }
        let mut next = Vec::new();
        for &p in &layer {
            let (i, n) = search.pairs[p];
            if spec.nodes[n].divergent {
                continue;
            }
            let fail = |kind, extra: Option<Label>, detail: String, search: &Search| {
                let mut trace = search.trace_to(p);
                trace.extend(extra);
                Verdict {
                    holds: false,
                    counterexample: Some(Counterexample { trace: imp.trace_names(&trace), kind, detail }),
                    explored: search.pairs.len(),
                }
            };
            if cyclic[i] {
                return Ok(fail(ViolationKind::Divergence, None, "diverges".into(), &search));
            }
            if imp.is_stable(i) {
                let ready = imp.ready(i);
                if !spec.accepts_ready(n, &ready) {
                    let refused: Vec<String> =
                        refusal_of(&ready, imp.alphabet.iter().copied()).into_iter().map(|l| imp.label_name(l)).collect();
                    let detail = format!("refuses {{{}}}", refused.join(", "));
                    return Ok(fail(ViolationKind::Failure, None, detail, &search));
                }
            }
            for (lab, j) in &imp.transitions[i] {
                match lab {
                    Label::Tau => {}
                    Label::Tick => {
                        if !spec.nodes[n].can_tick {
                            let detail = format!("performs {TICK_NAME}, which the specification does not allow");
                            return Ok(fail(ViolationKind::Failure, Some(Label::Tick), detail, &search));
                        }
                    }
                    Label::Event(e) => match spec.nodes[n].after.get(e) {
                        None => {
                            let detail = format!("performs {}, which the specification does not allow", imp.label_name(*lab));
                            return Ok(fail(ViolationKind::Failure, Some(*lab), detail, &search));
                        }
                        Some(&m) => {
                            if let Some(q) = search.visit((*j, m), Some((p, *lab)))? {
                                next.push(q);
                            }
                        }
                    },
                }
            }
        }
        layer = next;
    }
    Ok(Verdict { holds: true, counterexample: None, explored: search.pairs.len() })
}

/// Refusal of a stable state offering `ready`, within `alphabet` and tick.
pub fn refusal_of(ready: &BTreeSet<Label>, alphabet: impl IntoIterator<Item = u32>) -> BTreeSet<Label> {
    alphabet
        .into_iter()
        .map(Label::Event)
        .chain([Label::Tick])
        .filter(|l| !ready.contains(l))
        .collect()
}
