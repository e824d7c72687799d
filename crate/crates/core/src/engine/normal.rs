//! Normalization of a specification machine: subset construction over tau
//! closures, each node keeping its minimal acceptances and whether it
//! diverges.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::env::{Ev, EvSet};
use super::lts::{Label, Lts};
use super::EngineError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormNode {
    pub states: Vec<usize>,
    pub divergent: bool,
    pub can_tick: bool,
    /// Minimal ready sets of the node's stable states, tick included.
    pub acceptances: Vec<BTreeSet<Label>>,
    pub after: BTreeMap<Ev, usize>,
}

#[derive(Debug, Clone)]
pub struct FdModel {
    pub alphabet: EvSet,
    pub nodes: Vec<NormNode>,
    pub names: Arc<Vec<String>>,
}

/// Where a trace leads in a normalized model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Walk {
    Node(usize),
    /// The trace passed through a divergent node: every extension is a
    /// divergence.
    Divergent,
    Terminated,
    NotATrace,
}

pub fn normalize_fd(l: &Lts, max_nodes: usize) -> Result<FdModel, EngineError> {
    let cyclic = l.on_tau_cycle();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut nodes: Vec<NormNode> = Vec::new();
    let mut pending = vec![];
    let init: Vec<usize> = l.tau_closure([l.initial]).into_iter().collect();
    index.insert(init.clone(), 0);
    nodes.push(node(l, &cyclic, init));
    pending.push(0);
    while let Some(n) = pending.pop() {
        let mut by_event: BTreeMap<Ev, Vec<usize>> = BTreeMap::new();
        for &s in &nodes[n].states {
            for (lab, t) in &l.transitions[s] {
                if let Label::Event(e) = lab {
                    by_event.entry(*e).or_default().push(*t);
                }
            }
        }
        for (e, targets) in by_event {
            let set: Vec<usize> = l.tau_closure(targets).into_iter().collect();
            let id = match index.get(&set) {
                Some(&id) => id,
                None => {
                    if nodes.len() >= max_nodes {
                        return Err(EngineError::ResourceLimit { limit: max_nodes });
                    }
                    let id = nodes.len();
                    index.insert(set.clone(), id);
                    nodes.push(node(l, &cyclic, set));
                    pending.push(id);
                    id
                }
            };
            nodes[n].after.insert(e, id);
        }
    }
    Ok(FdModel { alphabet: l.alphabet.clone(), nodes, names: l.names.clone() })
}

fn node(l: &Lts, cyclic: &[bool], states: Vec<usize>) -> NormNode {
    let divergent = states.iter().any(|&s| cyclic[s]);
    let can_tick = states.iter().any(|&s| l.transitions[s].iter().any(|(lab, _)| *lab == Label::Tick));
    let mut readies: Vec<BTreeSet<Label>> = states.iter().filter(|&&s| l.is_stable(s)).map(|&s| l.ready(s)).collect();
    readies.sort_by_key(|r| r.len());
    readies.dedup();
    let mut acceptances: Vec<BTreeSet<Label>> = Vec::new();
    for r in readies {
        if !acceptances.iter().any(|a| a.is_subset(&r)) {
            acceptances.push(r);
        }
    }
    NormNode { states, divergent, can_tick, acceptances, after: BTreeMap::new() }
}

impl FdModel {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn walk(&self, trace: &[Label]) -> Walk {
        let mut n = 0;
        for (i, lab) in trace.iter().enumerate() {
            if self.nodes[n].divergent {
                return Walk::Divergent;
            }
            match lab {
                Label::Tau => {}
                Label::Tick if self.nodes[n].can_tick && i + 1 == trace.len() => return Walk::Terminated,
                Label::Tick => return Walk::NotATrace,
                Label::Event(e) => match self.nodes[n].after.get(e) {
                    Some(&m) => n = m,
                    None => return Walk::NotATrace,
                },
            }
        }
        if self.nodes[n].divergent {
            Walk::Divergent
        } else {
            Walk::Node(n)
        }
    }

    pub fn is_trace(&self, trace: &[Label]) -> bool {
        self.walk(trace) != Walk::NotATrace
    }

    pub fn is_divergence(&self, trace: &[Label]) -> bool {
        self.walk(trace) == Walk::Divergent
    }

    /// Whether `(trace, refusal)` is a failure.
    pub fn is_failure(&self, trace: &[Label], refusal: &BTreeSet<Label>) -> bool {
        match self.walk(trace) {
            Walk::NotATrace => false,
            Walk::Divergent | Walk::Terminated => true,
            Walk::Node(n) => self.node_refuses(n, refusal),
        }
    }

    pub(crate) fn node_refuses(&self, n: usize, refusal: &BTreeSet<Label>) -> bool {
        let node = &self.nodes[n];
        node.divergent || node.acceptances.iter().any(|a| a.is_disjoint(refusal))
    }

    /// Whether an implementation state offering exactly `ready` is allowed
    /// at node `n`.
    pub(crate) fn accepts_ready(&self, n: usize, ready: &BTreeSet<Label>) -> bool {
        let node = &self.nodes[n];
        node.divergent || node.acceptances.iter().any(|a| a.is_subset(ready))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lts(initial: usize, t: Vec<Vec<(Label, usize)>>, events: &[&str]) -> Lts {
        let names: Vec<String> = events.iter().map(|s| s.to_string()).collect();
        let alphabet = (0..names.len() as Ev).collect();
        Lts::from_parts(initial, t, alphabet, Arc::new(names))
    }

    fn set(ls: &[Label]) -> BTreeSet<Label> {
        ls.iter().copied().collect()
    }

    const A: Label = Label::Event(0);
    const B: Label = Label::Event(1);

    #[test]
    fn prefix_then_stop() {
        // a -> STOP over {a, b}
        let m = normalize_fd(&lts(0, vec![vec![(A, 1)], vec![]], &["a", "b"]), 100).unwrap();
        assert!(m.is_failure(&[], &set(&[B, Label::Tick])));
        assert!(!m.is_failure(&[], &set(&[A])));
        assert!(m.is_failure(&[A], &set(&[A, B, Label::Tick])));
        assert!(!m.is_trace(&[B]));
        assert!(m.nodes.iter().all(|n| !n.divergent));
    }

    #[test]
    fn tau_loop_diverges_immediately() {
        let m = normalize_fd(&lts(0, vec![vec![(Label::Tau, 0)]], &["a"]), 100).unwrap();
        assert!(m.is_divergence(&[]));
        assert!(m.is_divergence(&[A, A]));
    }

    #[test]
    fn internal_choice_keeps_both_acceptances() {
        // (a -> STOP) |~| (b -> STOP)
        let m = normalize_fd(
            &lts(0, vec![vec![(Label::Tau, 1), (Label::Tau, 2)], vec![(A, 3)], vec![(B, 3)], vec![]], &["a", "b"]),
            100,
        )
        .unwrap();
        assert_eq!(m.nodes[0].acceptances.len(), 2);
        assert!(m.is_failure(&[], &set(&[A])));
        assert!(m.is_failure(&[], &set(&[B])));
        assert!(!m.is_failure(&[], &set(&[A, B])));
    }

    #[test]
    fn offered_tick_is_not_refused() {
        // SKIP [] a -> STOP
        let m = normalize_fd(&lts(0, vec![vec![(Label::Tick, 1), (A, 1)], vec![]], &["a"]), 100).unwrap();
        assert!(!m.is_failure(&[], &set(&[A])));
        assert!(m.is_failure(&[Label::Tick], &set(&[A, Label::Tick])));
        assert!(!m.is_failure(&[], &set(&[A, Label::Tick])));
        assert_eq!(m.walk(&[Label::Tick]), Walk::Terminated);
    }
}
