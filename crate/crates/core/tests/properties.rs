mod support;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;
use wright_core::alphabet::compute_declaration_alphabet;
use wright_core::codegen::{emit, header_text, standalone_script, Item, Proc, SetExpr};
use wright_core::engine::{compile_declaration, normalize_fd, Env, Label, DEFAULT_MAX_STATES};
use wright_core::model::{Declaration, EventSet, Identifier, ProcessExpr, ProcessRelation};
use wright_core::parser::parse_source;
use wright_core::pipeline::check_source;
use wright_core::transform::{determinize, determinize_declaration, normalize_for_det, project_declaration};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Events a declaration can reach, found by walking bodies through
/// in-scope references.
fn walked_alphabet(d: &Declaration) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut seen: HashSet<&Identifier> = HashSet::new();
    let mut stack = vec![&d.name];
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        let body = if &d.name == n { &d.body } else { &d.local(n).unwrap().body };
        body.visit(&mut |p| match p {
            ProcessExpr::Prefix(e, _) => {
                out.insert(e.qualified_name());
            }
            ProcessExpr::Ref(r) if d.in_scope(r) => stack.push(r),
            _ => {}
        });
    }
    out
}

fn names(s: &EventSet) -> BTreeSet<String> {
    s.qualified_names().into_iter().collect()
}

const WRIGHT_WORDS: &[&str] = &[
    "Style", "Configuration", "Component", "Connector", "Port", "Role", "Glue", "Computation", "where", "{", "}",
    "=", "->", "[]", "|~|", "(", ")", "TICK", "SKIP", "Instances", "Attachments", "As", ":", ",", ".", "_", "a",
    "P", "Q", "End", "Constraints", "//", "\n",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parser_never_panics_on_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_source(&String::from_utf8_lossy(&bytes));
    }

    #[test]
    fn parser_never_panics_on_token_soup(words in proptest::collection::vec(0..WRIGHT_WORDS.len(), 0..60)) {
        let src: Vec<&str> = words.iter().map(|&i| WRIGHT_WORDS[i]).collect();
        let _ = parse_source(&src.join(" "));
    }

    #[test]
    fn determinize_leaves_no_internal_choice(seed in any::<u64>()) {
        let d = random_declaration(&mut rng(seed), 6);
        prop_assert_eq!(count_internal(&determinize(&d.body)), 0);
        let det = determinize_declaration(&d);
        prop_assert!(det.locals.iter().all(|l| count_internal(&l.body) == 0));
    }

    #[test]
    fn determinized_machine_has_the_same_traces(seed in any::<u64>()) {
        let d = random_declaration(&mut rng(seed), 6);
        let det = determinize_declaration(&d);
        let original = lts_traces(&compile_declaration(&d, DEFAULT_MAX_STATES).unwrap(), 8);
        let transformed = lts_traces(&compile_declaration(&det, DEFAULT_MAX_STATES).unwrap(), 8);
        prop_assert_eq!(&original, &transformed);
        // unguarded recursion is divergence in the engine but a least
        // fixed point in the trace oracle
        if is_guarded(&d) {
            prop_assert_eq!(&original, &term_traces(&d, 8));
        }
    }

    #[test]
    fn normalize_for_det_preserves_traces(seed in any::<u64>()) {
        let d = random_declaration(&mut rng(seed), 6);
        let mut n = d.clone();
        n.body = normalize_for_det(&d.body);
        for l in &mut n.locals {
            l.body = normalize_for_det(&l.body);
        }
        prop_assert_eq!(term_traces(&n, 8), term_traces(&d, 8));
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), mask in 0u8..8) {
        let d = random_declaration(&mut rng(seed), 6);
        let kept: Vec<&str> = EVENTS.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, e)| *e).collect();
        let keep = event_set(&kept);
        let (once, _) = project_declaration(&d, &keep);
        let (twice, _) = project_declaration(&once, &keep);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn alphabet_ignores_local_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let names = ["P", "L1", "L2", "L3"];
        let mut d = Declaration::new(wright_core::model::DeclKind::Role, ident("P"), ProcessExpr::Success);
        let mut budget = 4;
        d.body = random_term(&mut r, &mut budget, &EVENTS, &names);
        for n in &names[1..] {
            if r.gen_bool(0.8) {
                let mut b = 3;
                let body = random_term(&mut r, &mut b, &["d", "e", "a"], &names);
                d.locals.push(Declaration::new(wright_core::model::DeclKind::Local, ident(n), body));
            }
        }
        let (base, _) = compute_declaration_alphabet(&d);
        let mut shuffled = d.clone();
        shuffled.locals.reverse();
        if shuffled.locals.len() > 2 {
            shuffled.locals.swap(0, 1);
        }
        let (other, _) = compute_declaration_alphabet(&shuffled);
        prop_assert_eq!(names_of(&base.total), names_of(&other.total));
        prop_assert_eq!(names_of(&base.total), walked_alphabet(&d));
    }

    #[test]
    fn event_set_agrees_with_sorted_lists(a in proptest::collection::vec(0u8..40, 0..32), b in proptest::collection::vec(0u8..40, 0..32)) {
        let name = |i: &u8| format!("e{i}");
        let sa = event_set(&a.iter().map(name).collect::<Vec<_>>().iter().map(String::as_str).collect::<Vec<_>>());
        let sb = event_set(&b.iter().map(name).collect::<Vec<_>>().iter().map(String::as_str).collect::<Vec<_>>());
        let mut la: Vec<String> = a.iter().map(name).collect();
        la.sort();
        la.dedup();
        let mut lb: Vec<String> = b.iter().map(name).collect();
        lb.sort();
        lb.dedup();
        let mut union: Vec<String> = la.iter().chain(lb.iter()).cloned().collect();
        union.sort();
        union.dedup();
        let minus: Vec<String> = la.iter().filter(|x| lb.binary_search(x).is_err()).cloned().collect();
        prop_assert_eq!(names(&sa.union(&sb)).into_iter().collect::<Vec<_>>(), union);
        prop_assert_eq!(names(&sa.minus(&sb)).into_iter().collect::<Vec<_>>(), minus);
    }

    #[test]
    fn relation_closure_is_idempotent(pairs in proptest::collection::vec((0u8..6, 0u8..6), 0..15)) {
        let mut r = ProcessRelation::new();
        for (a, b) in &pairs {
            r.insert(&ident(&format!("N{a}")), &ident(&format!("N{b}")));
        }
        let once = r.closure();
        let pairs = |r: &ProcessRelation| r.pairs().into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<BTreeSet<_>>();
        prop_assert_eq!(pairs(&once.closure()), pairs(&once));
    }

    #[test]
    fn augmentation_keeps_unterminated_traces(seed in any::<u64>()) {
        let d = random_declaration(&mut rng(seed), 6);
        let mut script = standalone_script(&d);
        script.push(Item::Channels(vec!["x".into()]));
        script.push(Item::def("PLUS", Proc::par(Proc::reference("P"), SetExpr::Enum(vec!["x".into()]), Proc::Stop)));
        let env = Env::from_script(&script).unwrap();
        let p = lts_traces(&env.compile_named("P", DEFAULT_MAX_STATES).unwrap(), 7);
        let plus = lts_traces(&env.compile_named("PLUS", DEFAULT_MAX_STATES).unwrap(), 7);
        prop_assert_eq!(without_tick(&p), without_tick(&plus));
    }

    #[test]
    fn normalizing_a_deterministic_machine(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let t: Vec<Vec<(Label, usize)>> = (0..n)
            .map(|_| {
                let mut moves = Vec::new();
                for e in 0..MACHINE_EVENTS.len() as u32 {
                    if r.gen_bool(0.6) {
                        moves.push((Label::Event(e), r.gen_range(0..n)));
                    }
                }
                moves
            })
            .collect();
        let m = machine(0, t);
        let fd = normalize_fd(&m, 1000).unwrap();
        prop_assert_eq!(fd.nodes.len(), reachable(&m));
        // walk every trace to depth 6 alongside the machine
        let mut frontier = vec![(Vec::new(), m.initial)];
        for _ in 0..6 {
            let mut next = Vec::new();
            for (trace, s) in frontier {
                let wright_core::engine::Walk::Node(node) = fd.walk(&trace) else {
                    return Err(TestCaseError::fail(format!("{trace:?} not a node")));
                };
                prop_assert_eq!(&fd.nodes[node].states, &vec![s]);
                let ready = m.ready(s);
                let all: Vec<Label> = vec![Label::Event(0), Label::Event(1), Label::Tick];
                for mask in 0..8u32 {
                    let x: BTreeSet<Label> = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| all[i]).collect();
                    prop_assert_eq!(fd.is_failure(&trace, &x), ready.is_disjoint(&x));
                }
                for (l, t) in &m.transitions[s] {
                    let mut tr = trace.clone();
                    tr.push(*l);
                    next.push((tr, *t));
                }
            }
            frontier = next;
        }
    }
}

fn names_of(s: &EventSet) -> BTreeSet<String> {
    names(s)
}

fn reachable(m: &wright_core::engine::Lts) -> usize {
    let mut seen = BTreeSet::from([m.initial]);
    let mut stack = vec![m.initial];
    while let Some(s) = stack.pop() {
        for (_, t) in &m.transitions[s] {
            if seen.insert(*t) {
                stack.push(*t);
            }
        }
    }
    seen.len()
}

#[test]
fn emission_and_header_are_byte_identical_across_runs() {
    assert_eq!(header_text(), header_text());
    for name in ["dt1.wrt", "dt3.wrt", "calcul_formule.wrt", "pipe_conn.wrt"] {
        let c = check_source(&fixture(name), Default::default()).unwrap();
        let first = emit(&c.spec, &c.alphabets).0.text;
        let again = check_source(&fixture(name), Default::default()).unwrap();
        assert_eq!(first, emit(&again.spec, &again.alphabets).0.text, "{name}");
    }
}

#[test]
fn fixture_alphabets_match_a_reference_walk() {
    for name in ["dt1.wrt", "dt3.wrt", "calcul_formule.wrt", "pipe_conn.wrt", "double.wrt"] {
        let c = check_source(&fixture(name), Default::default()).unwrap();
        for t in c.spec.types() {
            let decls: Vec<&Declaration> = match t {
                wright_core::model::TypeDecl::Component(c) => c.ports.iter().chain([&c.computation]).collect(),
                wright_core::model::TypeDecl::Connector(c) => c.roles.iter().chain([&c.glue]).collect(),
            };
            for d in decls {
                let (a, _) = compute_declaration_alphabet(d);
                assert_eq!(names_of(&a.total), walked_alphabet(d), "{name}: {}", d.name);
            }
        }
    }
}

#[test]
fn analysis_is_deterministic_on_every_fixture() {
    let mut by_file: BTreeMap<String, String> = BTreeMap::new();
    for round in 0..2 {
        for entry in std::fs::read_dir(fixture_path("")).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_none_or(|x| x != "wrt") {
                continue;
            }
            let out = format!("{:?}", check_source(&std::fs::read_to_string(&path).unwrap(), Default::default()).map(|c| c.diagnostics));
            let key = path.display().to_string();
            if round == 0 {
                by_file.insert(key, out);
            } else {
                assert_eq!(by_file[&key], out, "{key}");
            }
        }
    }
}
