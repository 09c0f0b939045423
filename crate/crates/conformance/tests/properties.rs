//! Property tests over generated machines: structural laws of the
//! trace sets and of the refinement relation.
//!
//! Refinement chains are built by adding error-stereotyped completion
//! moves, the one extension that can only grow a trace set: error
//! moves never carry the run-to-completion priority that would let a
//! new transition suppress an old behaviour.

use std::collections::BTreeSet;

use proptest::prelude::*;

use sosc_conformance::{contract_traces, refines, TraceOptions, Verdict};
use sosc_core::{
    Contract, ProtocolStateMachine, State, Stereotype, Transition, Trigger, Visibility,
};
use sosc_testkit::{flat_machine, machine_with_error, MachineCfg};

fn host(name: &str, m: ProtocolStateMachine) -> Contract {
    let mut c = Contract::new(name);
    c.protocol = m;
    c
}

fn opts(injection: bool) -> TraceOptions {
    TraceOptions { injection, ..TraceOptions::default() }
}

/// Adds an unreachable state whose tagged completion loops put every
/// label of `labels` into the machine's visible alphabet without
/// touching its behaviour. Keeps the default label map an identity
/// between machines anchored on the same set.
fn anchored(mut m: ProtocolStateMachine, labels: &BTreeSet<String>) -> ProtocolStateMachine {
    m.root.states.push(State::simple("anchor"));
    for l in labels {
        m.root.transitions.push(Transition {
            source: "anchor".into(),
            target: "anchor".into(),
            trigger: Trigger::Completion,
            guard: None,
            actions: vec![],
            event: Some(l.clone()),
            stereotype: Stereotype::Nominal,
            visibility: Visibility::Visible,
        });
    }
    m
}

fn shared_alphabet(machines: &[&ProtocolStateMachine]) -> BTreeSet<String> {
    machines.iter().flat_map(|m| m.alphabet()).collect()
}

/// Extends the machine with internal error completions retargeted
/// across its states: strictly more behaviour under injection, none
/// removed.
fn with_extra_errors(m: &ProtocolStateMachine, count: usize, shift: usize) -> ProtocolStateMachine {
    let mut out = m.clone();
    let states: Vec<String> = m.root.states.iter().map(|s| s.name.clone()).collect();
    for (idx, t) in m.root.transitions.iter().enumerate().take(count) {
        out.root.transitions.push(Transition {
            source: t.source.clone(),
            target: states[(idx + shift) % states.len()].clone(),
            trigger: Trigger::Completion,
            guard: None,
            actions: vec![],
            event: None,
            stereotype: Stereotype::Error,
            visibility: Visibility::Internal,
        });
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_is_reflexive(m in flat_machine(MachineCfg::default()), depth in 0u32..4) {
        let c = host("Gen", m);
        let report = refines(&c, &c, depth).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Conforms);
        prop_assert!(report.witness.is_none());
    }

    #[test]
    fn trace_sets_are_prefix_closed_bounded_and_within_alphabet(
        m in machine_with_error(MachineCfg::default()),
        depth in 0u32..5,
        injection in any::<bool>(),
    ) {
        let ts = contract_traces(&host("Gen", m), depth, &opts(injection)).unwrap();
        prop_assert!(ts.contains(&[]));
        for trace in &ts.traces {
            prop_assert!(trace.len() <= depth as usize);
            if !trace.is_empty() {
                prop_assert!(ts.traces.contains(&trace[..trace.len() - 1]));
            }
            for label in trace {
                prop_assert!(ts.alphabet.contains(label), "`{label}` escaped the alphabet");
            }
        }
    }

    #[test]
    fn injection_only_adds_traces(
        m in machine_with_error(MachineCfg::default()),
        depth in 0u32..5,
    ) {
        let c = host("Gen", m);
        let plain = contract_traces(&c, depth, &opts(false)).unwrap();
        let injected = contract_traces(&c, depth, &opts(true)).unwrap();
        prop_assert!(plain.is_subset(&injected));
    }

    #[test]
    fn error_extension_chains_refine_upward(
        m in flat_machine(MachineCfg::default()),
        count in 1usize..4,
        shift in 1usize..4,
    ) {
        let a = m;
        let b = with_extra_errors(&a, count, shift);
        let c = with_extra_errors(&b, count + 2, shift + 1);
        let (a, b, c) = (host("A", a), host("B", b), host("C", c));
        prop_assert_eq!(refines(&a, &b, 3).unwrap().verdict, Verdict::Conforms);
        prop_assert_eq!(refines(&b, &c, 3).unwrap().verdict, Verdict::Conforms);
        prop_assert_eq!(refines(&a, &c, 3).unwrap().verdict, Verdict::Conforms);
    }

    #[test]
    fn conformance_is_transitive_on_a_shared_alphabet(
        x in flat_machine(MachineCfg::default()),
        y in flat_machine(MachineCfg::default()),
        z in flat_machine(MachineCfg::default()),
    ) {
        let labels = shared_alphabet(&[&x, &y, &z]);
        let x = host("X", anchored(x, &labels));
        let y = host("Y", anchored(y, &labels));
        let z = host("Z", anchored(z, &labels));
        if refines(&x, &y, 3).unwrap().verdict == Verdict::Conforms
            && refines(&y, &z, 3).unwrap().verdict == Verdict::Conforms
        {
            prop_assert_eq!(refines(&x, &z, 3).unwrap().verdict, Verdict::Conforms);
        }
    }

    #[test]
    fn a_violation_persists_at_every_greater_depth(
        x in flat_machine(MachineCfg::default()),
        y in flat_machine(MachineCfg::default()),
    ) {
        let labels = shared_alphabet(&[&x, &y]);
        let x = host("X", anchored(x, &labels));
        let y = host("Y", anchored(y, &labels));
        let shallow = refines(&x, &y, 2).unwrap();
        if shallow.verdict == Verdict::Violates {
            for depth in 3..=4 {
                let deeper = refines(&x, &y, depth).unwrap();
                prop_assert_eq!(deeper.verdict, Verdict::Violates);
                // Depth-d sets are exact, so the minimal witness is
                // already minimal at every greater depth.
                prop_assert_eq!(deeper.witness.as_ref(), shallow.witness.as_ref());
            }
        }
    }
}
