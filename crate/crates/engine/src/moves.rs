//! Global configurations and enabled-move enumeration.
//!
//! A step of the whole system is one firing of one machine:
//! - an internal move (a completion transition, nominal or injected);
//! - a delivery move (a machine consumes the head of an incoming
//!   queue; queues are FIFO per link and the head blocks);
//! - a timer move, possible only at quiescence.
//!
//! Time is a synchronous abstraction: firings are instantaneous, and
//! armed timers count down only when no nominal internal or delivery
//! move is enabled anywhere. At that point the clock advances by the
//! smallest remaining time and the timers that reach zero may fire.
//! An expired timer with no enabled transition is disarmed.

use std::collections::BTreeMap;

use thiserror::Error;

use sosc_core::{
    armed_timers_by, initial_config, step, Envelope, EvalError, Firing, ProtocolConfig, Scope,
    SemType, StepError, Stereotype, Stimulus, Value, Visibility,
};

use crate::policy::InjectState;
use crate::system::{RouteError, System};

/// Timer site: state path, timeout name, remaining ticks.
pub type TimerSite = (Vec<String>, String, u64);

/// Complete execution state of a system. Ordered and hashable so
/// exploration can key visited sets on it directly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalConfig {
    /// One configuration per instance, in instance order.
    pub machines: Vec<ProtocolConfig>,
    /// One FIFO queue per link, in link order.
    pub queues: Vec<Vec<(String, Value)>>,
    /// Armed timers per instance, sorted by (path, name).
    pub timers: Vec<Vec<TimerSite>>,
    /// Injection bookkeeping; part of the state so exploration
    /// distinguishes budgets already spent.
    pub inject: InjectState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChoiceKind {
    Internal,
    Deliver { link: usize },
    Timer { path: Vec<String>, name: String },
}

/// One enabled move, already applied: `next` embeds routing of the
/// emissions and re-arming of timers. The caller decides injection
/// admission (for error choices) and owns the `inject` field.
#[derive(Debug, Clone)]
pub struct StepChoice {
    pub instance: usize,
    pub kind: ChoiceKind,
    pub label: String,
    pub payload: Value,
    pub visibility: Visibility,
    pub error: bool,
    /// The instance's message-typed variable at the moment of the
    /// firing; policies filter injection eligibility on it.
    pub message: Option<Envelope>,
    pub next: GlobalConfig,
    /// Invariant violated by this move, if any.
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("instance `{instance}`: {source}")]
    Step {
        instance: String,
        #[source]
        source: StepError,
    },
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("instance `{instance}`: timeout `{name}` has no configured duration")]
    UnknownTimeout { instance: String, name: String },
    #[error("link `{from}` -> `{to}`: queued label `{label}` is not consumable by the receiver")]
    DeadLetter { from: String, to: String, label: String },
    #[error("instance `{instance}`: invariant evaluation failed: {source}")]
    Invariant {
        instance: String,
        #[source]
        source: EvalError,
    },
}

fn step_err(sys: &System, instance: usize, source: StepError) -> EngineError {
    EngineError::Step { instance: sys.instances[instance].id.clone(), source }
}

/// The value of the instance's unique message-typed variable, when it
/// currently holds a message.
pub fn site_message(sys: &System, instance: usize, cfg: &ProtocolConfig) -> Option<Envelope> {
    let c = sys.contract_of(instance);
    let mut decls = c
        .state_vars
        .iter()
        .chain(c.protocol.local_vars.iter())
        .filter(|d| d.ty == SemType::Msg);
    let decl = decls.next()?;
    if decls.next().is_some() {
        return None;
    }
    match cfg.vars.get(&decl.name) {
        Some(Value::Msg(env)) => Some(env.clone()),
        _ => None,
    }
}

/// Evaluates the instance's contract invariants against a machine
/// configuration; returns a description of the first violation.
pub fn invariant_violation(
    sys: &System,
    instance: usize,
    cfg: &ProtocolConfig,
) -> Result<Option<String>, EngineError> {
    let c = sys.contract_of(instance);
    let scope = Scope::new(&sys.instances[instance].params, &cfg.vars);
    for (k, inv) in c.invariants.iter().enumerate() {
        let holds = sosc_core::eval(inv, &scope)
            .and_then(|v| v.as_bool())
            .map_err(|e| EngineError::Invariant {
                instance: sys.instances[instance].id.clone(),
                source: e,
            })?;
        if !holds {
            return Ok(Some(format!(
                "instance `{}` violates invariant {} of contract `{}`",
                sys.instances[instance].id,
                k + 1,
                c.name,
            )));
        }
    }
    Ok(None)
}

fn nominal_only(t: &sosc_core::Transition) -> bool {
    t.stereotype == Stereotype::Nominal
}

/// Armed nominal timer sites of a machine configuration, with fresh
/// durations from the system's timeout table.
fn arm_sites(
    sys: &System,
    instance: usize,
    cfg: &ProtocolConfig,
) -> Result<BTreeMap<(Vec<String>, String), u64>, EngineError> {
    let c = sys.contract_of(instance);
    let mut out = BTreeMap::new();
    for (path, name) in armed_timers_by(&c.protocol, cfg, &nominal_only) {
        let d = *sys.timeouts.get(&name).ok_or_else(|| EngineError::UnknownTimeout {
            instance: sys.instances[instance].id.clone(),
            name: name.clone(),
        })?;
        out.insert((path, name), d);
    }
    Ok(out)
}

/// Initial global configuration: every machine at its initial
/// configuration, empty queues, timers armed fresh. The injection
/// field starts unbounded; executors overwrite it from their policy.
pub fn initial_global(sys: &System) -> Result<GlobalConfig, EngineError> {
    let mut machines = Vec::new();
    let mut timers = Vec::new();
    for i in 0..sys.instances.len() {
        let c = sys.contract_of(i);
        let m = initial_config(&c.protocol, &c.state_vars, &sys.instances[i].params)
            .map_err(|e| step_err(sys, i, e))?;
        let armed = arm_sites(sys, i, &m)?;
        timers.push(armed.into_iter().map(|((p, n), d)| (p, n, d)).collect());
        machines.push(m);
    }
    Ok(GlobalConfig {
        machines,
        queues: vec![Vec::new(); sys.links.len()],
        timers,
        inject: InjectState::Unbounded,
    })
}

/// Applies one firing of one instance: swap in the machine
/// configuration, consume a queue head if this was a delivery, route
/// the emissions, re-arm timers, and check the instance's invariants.
fn apply(
    sys: &System,
    base: &GlobalConfig,
    instance: usize,
    firing: &Firing,
    consume: Option<usize>,
) -> Result<(GlobalConfig, Option<String>), EngineError> {
    let mut next = base.clone();
    next.machines[instance] = firing.config.clone();
    if let Some(l) = consume {
        next.queues[l].remove(0);
    }

    for em in &firing.emissions {
        if em.broadcast {
            for l in sys.carrying_links(instance, &em.label) {
                next.queues[l].push((em.label.clone(), em.value.clone()));
            }
        } else if let Some(l) = sys.route_emission(instance, &em.label, &em.value)? {
            next.queues[l].push((em.label.clone(), em.value.clone()));
        }
    }

    // Sites keep their remaining time unless the firing re-entered
    // their state; new and re-entered sites arm fresh.
    let fresh = arm_sites(sys, instance, &firing.config)?;
    let old: BTreeMap<(Vec<String>, String), u64> = base.timers[instance]
        .iter()
        .map(|(p, n, r)| ((p.clone(), n.clone()), *r))
        .collect();
    let mut armed = BTreeMap::new();
    for ((path, name), duration) in fresh {
        let kept = old.get(&(path.clone(), name.clone())).copied();
        let rem = match kept {
            Some(r) if !firing.entered.contains(&path) => r,
            _ => duration,
        };
        armed.insert((path, name), rem);
    }
    next.timers[instance] = armed.into_iter().map(|((p, n), d)| (p, n, d)).collect();

    let violation = invariant_violation(sys, instance, &firing.config)?;
    Ok((next, violation))
}

fn choice_of(
    instance: usize,
    kind: ChoiceKind,
    firing: &Firing,
    message: Option<Envelope>,
    next: GlobalConfig,
    violation: Option<String>,
) -> StepChoice {
    StepChoice {
        instance,
        kind,
        label: firing.label.clone(),
        payload: firing.payload.clone(),
        visibility: firing.visibility,
        error: firing.stereotype == Stereotype::Error,
        message,
        next,
        violation,
    }
}

/// Internal and delivery moves, nominal and injectable, fully
/// applied. Timer moves are excluded; they exist only at quiescence.
pub fn structural_choices(sys: &System, cfg: &GlobalConfig) -> Result<Vec<StepChoice>, EngineError> {
    let mut out = Vec::new();
    for i in 0..sys.instances.len() {
        let c = sys.contract_of(i);
        let msg = site_message(sys, i, &cfg.machines[i]);
        let firings = step(&c.protocol, &sys.instances[i].params, &cfg.machines[i], &Stimulus::Internal, true)
            .map_err(|e| step_err(sys, i, e))?;
        for f in firings {
            let (next, violation) = apply(sys, cfg, i, &f, None)?;
            out.push(choice_of(i, ChoiceKind::Internal, &f, msg.clone(), next, violation));
        }
    }
    for (l, link) in sys.links.iter().enumerate() {
        let Some((label, value)) = cfg.queues[l].first() else { continue };
        let i = link.to;
        let c = sys.contract_of(i);
        if !c.protocol.input_alphabet().iter().any(|x| x == label) {
            return Err(EngineError::DeadLetter {
                from: sys.instances[link.from].id.clone(),
                to: sys.instances[i].id.clone(),
                label: label.clone(),
            });
        }
        let msg = site_message(sys, i, &cfg.machines[i]);
        let stim = Stimulus::Event { label: label.clone(), payload: value.clone() };
        let firings = step(&c.protocol, &sys.instances[i].params, &cfg.machines[i], &stim, true)
            .map_err(|e| step_err(sys, i, e))?;
        for f in firings {
            let (next, violation) = apply(sys, cfg, i, &f, Some(l))?;
            out.push(choice_of(i, ChoiceKind::Deliver { link: l }, &f, msg.clone(), next, violation));
        }
    }
    Ok(out)
}

/// Quiescence: no nominal structural move anywhere. Error choices are
/// optional injections and do not hold the clock.
pub fn quiescent(choices: &[StepChoice]) -> bool {
    choices.iter().all(|c| c.error)
}

/// Timer moves from a quiescent configuration. Advances the clock by
/// the minimum remaining time, disarms expired timers whose
/// transitions are not enabled, and repeats until some expired timer
/// can fire or none is left. The returned choices all share the
/// advanced baseline.
pub fn timer_choices(sys: &System, cfg: &GlobalConfig) -> Result<Vec<StepChoice>, EngineError> {
    let mut base = cfg.clone();
    loop {
        let min = base
            .timers
            .iter()
            .flat_map(|ts| ts.iter().map(|(_, _, r)| *r))
            .min();
        let Some(delta) = min else { return Ok(Vec::new()) };
        for ts in &mut base.timers {
            for t in ts.iter_mut() {
                t.2 -= delta;
            }
        }

        let mut fired = Vec::new();
        let mut dead: Vec<(usize, usize)> = Vec::new();
        for i in 0..sys.instances.len() {
            let c = sys.contract_of(i);
            let msg = site_message(sys, i, &base.machines[i]);
            for (k, (path, name, rem)) in base.timers[i].iter().enumerate() {
                if *rem != 0 {
                    continue;
                }
                let stim = Stimulus::Timer { timeout: name.clone(), source: Some(path.clone()) };
                let firings = step(&c.protocol, &sys.instances[i].params, &base.machines[i], &stim, false)
                    .map_err(|e| step_err(sys, i, e))?;
                if firings.is_empty() {
                    dead.push((i, k));
                    continue;
                }
                for f in firings {
                    let (next, violation) = apply(sys, &base, i, &f, None)?;
                    let kind = ChoiceKind::Timer { path: path.clone(), name: name.clone() };
                    fired.push(choice_of(i, kind, &f, msg.clone(), next, violation));
                }
            }
        }
        if !fired.is_empty() {
            return Ok(fired);
        }
        if dead.is_empty() {
            return Ok(Vec::new());
        }
        for (i, k) in dead.into_iter().rev() {
            base.timers[i].remove(k);
        }
    }
}

/// All instances with at least one error choice in `choices`, in
/// order. Exploration advances occurrence counters for each of them.
pub fn instances_with_error_choices(choices: &[StepChoice]) -> Vec<usize> {
    let mut out: Vec<usize> = choices.iter().filter(|c| c.error).map(|c| c.instance).collect();
    out.sort_unstable();
    out.dedup();
    out
}
