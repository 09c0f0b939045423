//! Seeded single-run execution.
//!
//! Scheduling is round robin over instances: starting from a rotating
//! cursor, the first instance with an enabled move fires. When the
//! chosen instance also has injectable error moves, the fault policy
//! decides between its error set and its nominal set; the seeded
//! generator breaks remaining ties. Equal seeds give equal traces,
//! byte for byte.

use thiserror::Error;

use sosc_core::{Event, Terminal, Trace, Visibility};

use crate::moves::{
    initial_global, invariant_violation, quiescent, structural_choices, timer_choices, EngineError,
    StepChoice,
};
use crate::policy::{FaultPolicy, PolicyError};
use crate::rng::Rng;
use crate::system::System;

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionConfig {
    pub max_steps: u64,
    pub seed: u64,
    /// Record internal firings in the trace alongside visible ones.
    pub record_internal: bool,
}

impl Default for ExecutionConfig {
    fn default() -> ExecutionConfig {
        ExecutionConfig { max_steps: 10_000, seed: 0, record_internal: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub trace: Trace,
    pub steps: u64,
    /// Error moves actually fired.
    pub injected: u64,
    /// Policy-eligible decision points offered.
    pub opportunities: u64,
    pub violation: Option<String>,
    pub final_config: crate::moves::GlobalConfig,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

pub fn simulate(
    sys: &System,
    policy: &FaultPolicy,
    exec: &ExecutionConfig,
) -> Result<SimReport, SimError> {
    policy.validate()?;
    let mut g = initial_global(sys)?;
    g.inject = policy.initial_state();

    let mut events = Vec::new();
    let mut steps: u64 = 0;
    let mut injected: u64 = 0;
    let mut opportunities: u64 = 0;
    let mut violation: Option<String> = None;
    let mut rng = Rng::new(exec.seed);
    let mut rr: usize = 0;
    let mut occurrences: Vec<u64> = vec![0; sys.instances.len()];

    for i in 0..sys.instances.len() {
        if let Some(v) = invariant_violation(sys, i, &g.machines[i])? {
            violation = Some(v);
        }
    }

    let terminal = loop {
        if violation.is_some() {
            break Terminal::InvariantViolation;
        }
        if steps >= exec.max_steps {
            break Terminal::MaxSteps;
        }
        let choices = structural_choices(sys, &g)?;

        let n = sys.instances.len();
        let mut chosen: Option<(StepChoice, bool)> = None;
        for k in 0..n {
            let i = (rr + k) % n;
            let nominal: Vec<&StepChoice> =
                choices.iter().filter(|c| c.instance == i && !c.error).collect();
            let errors: Vec<&StepChoice> =
                choices.iter().filter(|c| c.instance == i && c.error).collect();
            if nominal.is_empty() && errors.is_empty() {
                continue;
            }
            let mut take_error = false;
            if let Some(first) = errors.first() {
                if policy.eligible(first.message.as_ref()) {
                    let occ = occurrences[i];
                    occurrences[i] += 1;
                    opportunities += 1;
                    take_error = policy.decide(
                        &sys.instances[i].id,
                        occ,
                        first.message.as_ref(),
                        &mut g.inject,
                        &mut rng,
                        steps,
                    );
                }
            }
            if take_error {
                let c = errors[rng.pick(errors.len())].clone();
                chosen = Some((c, true));
                rr = (i + 1) % n;
                break;
            }
            if !nominal.is_empty() {
                let c = nominal[rng.pick(nominal.len())].clone();
                chosen = Some((c, false));
                rr = (i + 1) % n;
                break;
            }
            // Error moves exist but were not injected: the instance
            // has nothing mandatory to do, keep scanning.
        }

        let (choice, was_injected) = match chosen {
            Some(x) => x,
            None => {
                // Quiescent: let time pass. Among expired timers the
                // first in (instance, state path, name) order fires;
                // several enabled transitions of that one timer are a
                // seeded pick.
                debug_assert!(quiescent(&choices));
                let timers = timer_choices(sys, &g)?;
                let Some(first) = timers.first() else {
                    break Terminal::DeadlockBeforeBound;
                };
                let same_site: Vec<&StepChoice> = timers
                    .iter()
                    .filter(|c| c.instance == first.instance && c.kind == first.kind)
                    .collect();
                (same_site[rng.pick(same_site.len())].clone(), false)
            }
        };

        // The policy may have charged its budget after the choices
        // were computed; keep the charged state, not the snapshot.
        let inject_now = g.inject.clone();
        g = choice.next.clone();
        g.inject = inject_now;
        if was_injected {
            injected += 1;
        }
        if exec.record_internal || choice.visibility == Visibility::Visible {
            events.push(Event {
                t: steps,
                inst: sys.instances[choice.instance].id.clone(),
                label: choice.label.clone(),
                kind: choice.visibility,
                payload: choice.payload.clone(),
            });
        }
        steps += 1;
        if choice.violation.is_some() {
            violation = choice.violation.clone();
        }
    };

    Ok(SimReport {
        trace: Trace { events, terminal: Some(terminal) },
        steps,
        injected,
        opportunities,
        violation,
        final_config: g,
    })
}
