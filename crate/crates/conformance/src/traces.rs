//! Bounded visible-trace enumeration.
//!
//! The trace set of a model is the prefix-closed set of label
//! sequences its visible firings can produce within a depth bound.
//! Internal firings are invisible: each enumeration level closes the
//! current configurations under them, then branches on every enabled
//! visible firing.
//!
//! At machine level the environment is maximally permissive: every
//! consumable label may be offered (with a unit payload) at any
//! point, and an armed delay may fire whenever no completion is
//! pending. Relative durations are abstracted away; a lone machine
//! has no clock. At composition level the moves are exactly the
//! executor's, including its quiescence rule for timers.
//!
//! Invariants are not evaluated here: trace semantics is purely
//! observational, and invariant checking belongs to execution.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use sosc_core::{
    armed_timers_by, step, visit_regions, Contract, ProtocolConfig, ProtocolStateMachine,
    StepError, Stereotype, Stimulus, Value, Visibility,
};
use sosc_engine::{
    initial_global, quiescent, structural_choices, timer_choices, EngineError, GlobalConfig,
    System,
};

/// Default cap on configuration visits per enumeration.
pub const DEFAULT_CONFIG_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceOptions {
    /// Enables error-stereotyped transitions.
    pub injection: bool,
    /// Aborts with `STATE_EXPLOSION` beyond this many configuration
    /// visits. Revisits in different trace contexts are charged.
    pub max_configs: usize,
    /// Parameter bindings for a machine whose expressions need them.
    pub params: BTreeMap<String, Value>,
}

impl Default for TraceOptions {
    fn default() -> TraceOptions {
        TraceOptions { injection: false, max_configs: DEFAULT_CONFIG_CAP, params: BTreeMap::new() }
    }
}

/// Prefix-closed set of visible traces of one model at one depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSet {
    pub depth: u32,
    /// Labels of visible transitions admitted under the injection
    /// setting; every trace element is drawn from it.
    pub alphabet: BTreeSet<String>,
    pub traces: BTreeSet<Vec<String>>,
}

impl TraceSet {
    pub fn contains(&self, trace: &[String]) -> bool {
        self.traces.contains(trace)
    }

    pub fn is_subset(&self, other: &TraceSet) -> bool {
        self.traces.is_subset(&other.traces)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("STATE_EXPLOSION: enumeration visited more than {cap} configurations")]
    StateExplosion { cap: usize },
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Work meter shared across one enumeration.
struct Budget {
    used: usize,
    cap: usize,
}

impl Budget {
    fn charge(&mut self) -> Result<(), TraceError> {
        self.used += 1;
        if self.used > self.cap {
            return Err(TraceError::StateExplosion { cap: self.cap });
        }
        Ok(())
    }
}

/// A stepped model: configurations plus labelled successor moves.
/// `None` labels are invisible.
trait Space {
    type Config: Clone + Ord;
    fn initial(&self) -> Result<Self::Config, TraceError>;
    fn successors(
        &self,
        cfg: &Self::Config,
    ) -> Result<Vec<(Option<String>, Self::Config)>, TraceError>;
}

struct MachineSpace<'a> {
    contract: &'a Contract,
    params: &'a BTreeMap<String, Value>,
    injection: bool,
}

impl Space for MachineSpace<'_> {
    type Config = ProtocolConfig;

    fn initial(&self) -> Result<ProtocolConfig, TraceError> {
        Ok(sosc_core::initial_config(
            &self.contract.protocol,
            &self.contract.state_vars,
            self.params,
        )?)
    }

    fn successors(
        &self,
        cfg: &ProtocolConfig,
    ) -> Result<Vec<(Option<String>, ProtocolConfig)>, TraceError> {
        let m = &self.contract.protocol;
        let mut firings = step(m, self.params, cfg, &Stimulus::Internal, self.injection)?;
        for label in m.input_alphabet() {
            let stim = Stimulus::Event { label, payload: Value::Unit };
            firings.extend(step(m, self.params, cfg, &stim, self.injection)?);
        }
        let injection = self.injection;
        let armed = armed_timers_by(m, cfg, &move |t| {
            injection || t.stereotype != Stereotype::Error
        });
        for (path, name) in armed {
            let stim = Stimulus::Timer { timeout: name, source: Some(path) };
            firings.extend(step(m, self.params, cfg, &stim, self.injection)?);
        }
        Ok(firings
            .into_iter()
            .map(|f| {
                let label = (f.visibility == Visibility::Visible).then_some(f.label);
                (label, f.config)
            })
            .collect())
    }
}

struct CompositionSpace<'a> {
    sys: &'a System,
    injection: bool,
}

impl Space for CompositionSpace<'_> {
    type Config = GlobalConfig;

    fn initial(&self) -> Result<GlobalConfig, TraceError> {
        Ok(initial_global(self.sys)?)
    }

    fn successors(
        &self,
        cfg: &GlobalConfig,
    ) -> Result<Vec<(Option<String>, GlobalConfig)>, TraceError> {
        let choices = structural_choices(self.sys, cfg)?;
        let mut out: Vec<(Option<String>, GlobalConfig)> = choices
            .iter()
            .filter(|c| self.injection || !c.error)
            .map(|c| {
                let label = (c.visibility == Visibility::Visible).then(|| c.label.clone());
                (label, c.next.clone())
            })
            .collect();
        if quiescent(&choices) {
            for c in timer_choices(self.sys, cfg)? {
                let label = (c.visibility == Visibility::Visible).then(|| c.label.clone());
                out.push((label, c.next));
            }
        }
        Ok(out)
    }
}

/// Closes a seed set under invisible moves.
fn close<S: Space>(
    space: &S,
    seeds: Vec<S::Config>,
    budget: &mut Budget,
) -> Result<BTreeSet<S::Config>, TraceError> {
    let mut set = BTreeSet::new();
    let mut stack = seeds;
    while let Some(c) = stack.pop() {
        if set.contains(&c) {
            continue;
        }
        budget.charge()?;
        for (label, next) in space.successors(&c)? {
            if label.is_none() {
                stack.push(next);
            }
        }
        set.insert(c);
    }
    Ok(set)
}

/// Level-by-level enumeration: the frontier maps each trace to the
/// closed set of configurations reachable by it.
fn enumerate<S: Space>(
    space: &S,
    depth: u32,
    cap: usize,
) -> Result<BTreeSet<Vec<String>>, TraceError> {
    let mut budget = Budget { used: 0, cap };
    let mut traces: BTreeSet<Vec<String>> = BTreeSet::from([Vec::new()]);
    let init = close(space, vec![space.initial()?], &mut budget)?;
    let mut frontier: BTreeMap<Vec<String>, BTreeSet<S::Config>> =
        BTreeMap::from([(Vec::new(), init)]);

    for _ in 0..depth {
        let mut seeds: BTreeMap<Vec<String>, Vec<S::Config>> = BTreeMap::new();
        for (trace, configs) in &frontier {
            for c in configs {
                budget.charge()?;
                for (label, next) in space.successors(c)? {
                    let Some(l) = label else { continue };
                    let mut extended = trace.clone();
                    extended.push(l);
                    seeds.entry(extended).or_default().push(next);
                }
            }
        }
        if seeds.is_empty() {
            break;
        }
        frontier = BTreeMap::new();
        for (trace, found) in seeds {
            let closed = close(space, found, &mut budget)?;
            traces.insert(trace.clone());
            frontier.insert(trace, closed);
        }
    }
    Ok(traces)
}

/// Labels that can appear in a visible trace of the machine.
fn machine_alphabet(m: &ProtocolStateMachine, injection: bool) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    visit_regions(&m.root, &mut |r| {
        for t in &r.transitions {
            if t.visibility == Visibility::Visible
                && (injection || t.stereotype != Stereotype::Error)
            {
                out.insert(t.event_label().to_string());
            }
        }
    });
    out
}

/// Visible traces of one contract's machine, driven by a maximally
/// permissive environment.
pub fn contract_traces(
    contract: &Contract,
    depth: u32,
    opts: &TraceOptions,
) -> Result<TraceSet, TraceError> {
    let space = MachineSpace { contract, params: &opts.params, injection: opts.injection };
    let traces = enumerate(&space, depth, opts.max_configs)?;
    Ok(TraceSet {
        depth,
        alphabet: machine_alphabet(&contract.protocol, opts.injection),
        traces,
    })
}

/// Visible traces of a built composition under the executor's move
/// rules. `opts.params` is ignored; instances carry their bindings.
pub fn composition_traces(
    sys: &System,
    depth: u32,
    opts: &TraceOptions,
) -> Result<TraceSet, TraceError> {
    let space = CompositionSpace { sys, injection: opts.injection };
    let traces = enumerate(&space, depth, opts.max_configs)?;
    let mut alphabet = BTreeSet::new();
    for inst in &sys.instances {
        let contract = &sys.contracts[&inst.contract];
        alphabet.extend(machine_alphabet(&contract.protocol, opts.injection));
    }
    Ok(TraceSet { depth, alphabet, traces })
}
