//! Properties of the stepping relation over generated machines.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;
use sosc_core::{
    has_enabled_completion, initial_config, step, ProtocolConfig, ProtocolStateMachine,
    Stereotype, Stimulus, Value,
};
use sosc_testkit::{flat_machine, machine_with_error, MachineCfg};

fn stimuli(machine: &ProtocolStateMachine) -> Vec<Stimulus> {
    let mut out = vec![Stimulus::Internal];
    for label in machine.input_alphabet() {
        out.push(Stimulus::Event { label, payload: Value::Unit });
    }
    out.push(Stimulus::Timer { timeout: "t_poll".into(), source: None });
    out
}

/// Breadth-first reachable configs under full injection, capped.
fn reachable(machine: &ProtocolStateMachine, cap: usize) -> Vec<ProtocolConfig> {
    let params = BTreeMap::new();
    let init = initial_config(machine, &[], &params).unwrap();
    let mut seen: BTreeSet<ProtocolConfig> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(init.clone());
    queue.push_back(init);
    while let Some(cfg) = queue.pop_front() {
        if seen.len() >= cap {
            break;
        }
        for st in stimuli(machine) {
            for f in step(machine, &params, &cfg, &st, true).unwrap() {
                if seen.insert(f.config.clone()) {
                    queue.push_back(f.config);
                }
            }
        }
    }
    seen.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Disabling injection never removes a nominal move and never
    /// allows an error-stereotyped one.
    #[test]
    fn injection_off_is_a_nominal_restriction(machine in machine_with_error(MachineCfg::default())) {
        let params = BTreeMap::new();
        for cfg in reachable(&machine, 60) {
            for st in stimuli(&machine) {
                let with = step(&machine, &params, &cfg, &st, true).unwrap();
                let without = step(&machine, &params, &cfg, &st, false).unwrap();
                let with_keys: BTreeSet<_> = with
                    .iter()
                    .map(|f| (f.config.clone(), f.label.clone(), f.source.clone()))
                    .collect();
                for f in &without {
                    prop_assert!(f.stereotype == Stereotype::Nominal);
                    let key = (f.config.clone(), f.label.clone(), f.source.clone());
                    prop_assert!(with_keys.contains(&key));
                }
                let nominal = with.iter().filter(|f| f.stereotype == Stereotype::Nominal).count();
                prop_assert_eq!(without.len(), nominal);
            }
        }
    }

    /// An enabled nominal completion blocks event and timer consumption.
    #[test]
    fn completion_preempts_other_stimuli(machine in flat_machine(MachineCfg::default())) {
        let params = BTreeMap::new();
        for cfg in reachable(&machine, 60) {
            if has_enabled_completion(&machine, &params, &cfg, false).unwrap() {
                for st in stimuli(&machine) {
                    if matches!(st, Stimulus::Internal) {
                        continue;
                    }
                    prop_assert!(step(&machine, &params, &cfg, &st, true).unwrap().is_empty());
                }
            }
        }
    }

    /// Stepping never invents variables: every firing's valuation has
    /// exactly the declared keys.
    #[test]
    fn valuation_keys_are_stable(machine in flat_machine(MachineCfg::default())) {
        let params = BTreeMap::new();
        let declared: BTreeSet<String> =
            machine.local_vars.iter().map(|v| v.name.clone()).collect();
        for cfg in reachable(&machine, 60) {
            for st in stimuli(&machine) {
                for f in step(&machine, &params, &cfg, &st, true).unwrap() {
                    let keys: BTreeSet<String> = f.config.vars.keys().cloned().collect();
                    prop_assert_eq!(&keys, &declared);
                }
            }
        }
    }
}
