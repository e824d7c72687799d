mod support;

use support::*;
use wright_core::analyzer::AnalyzerOptions;
use wright_core::engine::{discharge_assertions, CheckOptions, Mode, ViolationKind};
use wright_core::parser::{parse_source, to_wright};
use wright_core::pipeline::compile_source;

const ACCEPTED: &[&str] = &[
    "dt1.wrt",
    "dt2.wrt",
    "dt3.wrt",
    "dt3_unterminated.wrt",
    "dt4.wrt",
    "dt5.wrt",
    "pipe_conn.wrt",
    "double.wrt",
    "calcul_formule.wrt",
    "jammed_connector.wrt",
];

#[test]
fn printing_and_reparsing_gives_the_same_spec() {
    for name in ACCEPTED {
        let first = parse_source(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}")).spec;
        let printed = to_wright(&first);
        let second = parse_source(&printed).unwrap_or_else(|e| panic!("{name} reprinted: {e}\n{printed}")).spec;
        assert_eq!(first, second, "{name}");
    }
}

#[test]
fn unterminated_computation_fails_only_its_port_check() {
    let c = compile_source(&fixture("dt3_unterminated.wrt"), AnalyzerOptions::default()).unwrap();
    let results = discharge_assertions(&c.plan, CheckOptions::default()).unwrap();
    let failing: Vec<_> = results.iter().filter(|d| !d.holds()).collect();
    assert_eq!(failing.len(), 1, "{failing:?}");
    assert_eq!(failing[0].assertion.label, "assert InputG [FD= COMPInput");
    let cx = failing[0].verdict.as_ref().unwrap().counterexample.clone().unwrap();
    assert_eq!(cx.kind, ViolationKind::Failure);
    assert!(cx.trace.is_empty());
    assert_eq!(cx.detail, "refuses {TICK}");
}

#[test]
fn sequential_and_parallel_discharge_agree_on_fixtures() {
    for name in ACCEPTED.iter().filter(|n| **n != "dt5.wrt") {
        let c = compile_source(&fixture(name), AnalyzerOptions::default()).unwrap();
        let run = |mode| {
            discharge_assertions(&c.plan, CheckOptions { mode, ..Default::default() })
                .unwrap()
                .into_iter()
                .map(|d| (d.assertion.label, d.verdict.map_err(|e| e.to_string())))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(Mode::Sequential), run(Mode::Parallel), "{name}");
    }
}

#[test]
fn every_accepted_fixture_defines_what_it_references() {
    for name in ACCEPTED.iter().filter(|n| **n != "dt5.wrt") {
        let c = compile_source(&fixture(name), AnalyzerOptions::default()).unwrap();
        let env = wright_core::engine::Env::from_script(&c.plan.script).unwrap();
        assert!(env.unresolved_references().is_empty(), "{name}: {:?}", env.unresolved_references());
    }
}

#[test]
fn style_fixtures_hold_everywhere() {
    for name in ["dt1.wrt", "dt2.wrt", "dt4.wrt", "pipe_conn.wrt", "double.wrt"] {
        let c = compile_source(&fixture(name), AnalyzerOptions::default()).unwrap();
        for d in discharge_assertions(&c.plan, CheckOptions::default()).unwrap() {
            assert!(d.holds(), "{name}: {} -> {:?}", d.assertion.label, d.verdict);
        }
    }
}

#[test]
fn a_tight_state_cap_is_reported_not_fatal() {
    let c = compile_source(&fixture("dt3.wrt"), AnalyzerOptions::default()).unwrap();
    let results = discharge_assertions(&c.plan, CheckOptions { max_states: 2, mode: Mode::Sequential }).unwrap();
    assert!(results.iter().any(|d| matches!(d.verdict, Err(wright_core::engine::EngineError::ResourceLimit { limit: 2 }))));
}
