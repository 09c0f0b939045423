//! Property tests over generated machines: execution never panics or
//! errors, seeds determine traces exactly, and injection respects
//! budgets. Two generated machines face each other over links that
//! carry exactly what the peer can consume, so every emission either
//! routes cleanly or is a pure observable.

use std::collections::BTreeMap;

use proptest::prelude::*;

use sosc_core::{Connection, Contract, Endpoint, InstanceDecl, ProtocolStateMachine, SoSComposition};
use sosc_engine::{
    explore, simulate, write_trace, ExecutionConfig, ExploreConfig, ExploreOutcome, FaultPolicy,
    System,
};
use sosc_testkit::{machine_with_error, MachineCfg};

fn paired_system(a: ProtocolStateMachine, b: ProtocolStateMachine) -> System {
    let mut ca = Contract::new("Left");
    ca.protocol = a;
    let mut cb = Contract::new("Right");
    cb.protocol = b;

    let mut comp = SoSComposition::new("pair");
    for (n, c) in [("a", "Left"), ("b", "Right")] {
        comp.instances.push(InstanceDecl {
            name: n.into(),
            contract: c.into(),
            actuals: vec![],
            multiplicity: 1,
        });
    }
    let ep = |i: &str| Endpoint { instance: i.into(), port: "p".into() };
    let to_b = cb.protocol.input_alphabet();
    if !to_b.is_empty() {
        comp.connections.push(Connection { from: ep("a"), to: ep("b"), labels: to_b });
    }
    let to_a = ca.protocol.input_alphabet();
    if !to_a.is_empty() {
        comp.connections.push(Connection { from: ep("b"), to: ep("a"), labels: to_a });
    }

    let timeouts: BTreeMap<String, u64> = BTreeMap::from([("t_poll".to_string(), 2)]);
    System::build(&[ca, cb], &comp, timeouts).expect("generated pair builds")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn seeded_runs_are_reproducible_and_error_free(
        a in machine_with_error(MachineCfg::default()),
        b in machine_with_error(MachineCfg::default()),
        seed in 0u64..1000,
    ) {
        let sys = paired_system(a, b);
        let exec = ExecutionConfig { max_steps: 150, seed, ..ExecutionConfig::default() };
        let policy = FaultPolicy::Exhaustive { budget: 2, per_message: false, data_only: false };
        let r1 = simulate(&sys, &policy, &exec).unwrap();
        let r2 = simulate(&sys, &policy, &exec).unwrap();
        prop_assert_eq!(write_trace(&r1.trace), write_trace(&r2.trace));
        prop_assert_eq!(&r1.final_config, &r2.final_config);
        prop_assert!(r1.injected <= 2, "injected {} over budget", r1.injected);
        prop_assert!(r1.injected <= r1.opportunities);
    }

    #[test]
    fn exploration_terminates_within_its_caps(
        a in machine_with_error(MachineCfg::default()),
        b in machine_with_error(MachineCfg::default()),
    ) {
        let sys = paired_system(a, b);
        let config = ExploreConfig { max_depth: 8, max_states: 20_000 };
        let policy = FaultPolicy::Exhaustive { budget: 1, per_message: false, data_only: false };
        // No properties and no invariants: the outcome can only be a
        // pass or a cap stop, never a failure or an engine error.
        match explore(&sys, &policy, &config, &[]).unwrap() {
            ExploreOutcome::Pass(stats) => prop_assert!(stats.states <= 20_000),
            ExploreOutcome::StateCapExceeded(_) => {}
            ExploreOutcome::Fail { property, message, .. } => {
                prop_assert!(false, "unexpected failure: {property}: {message}");
            }
        }
    }
}
