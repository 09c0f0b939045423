//! Guarded hierarchical state machines.
//!
//! A machine is a tree of states: simple states, composite states with
//! one child region, and parallel states with two or more child
//! regions. Each region owns its transitions; a transition may only
//! connect sibling states of that region. Exactly one state per active
//! region is active at a time.
//!
//! Firing rules:
//! - completion transitions (no trigger) have priority over triggered
//!   and timer transitions from the same configuration;
//! - parallel regions interleave, one region fires per step;
//! - transitions stereotyped `Error` are considered only when the
//!   caller asks for injected behaviour.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{eval, EvalError, Expr, Scope, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stereotype {
    Nominal,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Visibility {
    Visible,
    Internal,
}

/// What causes a transition to fire.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Trigger {
    /// No trigger: fires as soon as its guard holds.
    Completion,
    /// Consumes an event with this label; the payload may be bound to
    /// an identifier visible in the guard and actions.
    On { label: String, bind: Option<String> },
    /// Fires when the named timeout expires for the source state.
    After { timeout: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Assign { var: String, value: Expr },
    /// Names a declared operation; records intent, has no state effect.
    Invoke { op: String, args: Vec<Expr> },
    /// Produce an event. The execution environment routes it to at
    /// most one connection; without a route it is a pure observable.
    Emit { label: String, payload: Option<Expr> },
    /// Produce one copy of the event per connection carrying the label.
    Broadcast { label: String, payload: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub trigger: Trigger,
    pub guard: Option<Expr>,
    pub actions: Vec<Action>,
    /// Explicit event label for the trace; defaults are derived from
    /// the trigger, the first invocation, or the first emission.
    pub event: Option<String>,
    pub stereotype: Stereotype,
    pub visibility: Visibility,
}

impl Transition {
    pub fn event_label(&self) -> &str {
        if let Some(e) = &self.event {
            return e;
        }
        if let Trigger::On { label, .. } = &self.trigger {
            return label;
        }
        for a in &self.actions {
            match a {
                Action::Invoke { op, .. } => return op,
                Action::Emit { label, .. } | Action::Broadcast { label, .. } => return label,
                Action::Assign { .. } => {}
            }
        }
        "tau"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateKind {
    Simple,
    Composite(Region),
    Parallel(Vec<Region>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub name: String,
    pub kind: StateKind,
}

impl State {
    pub fn simple(name: &str) -> State {
        State { name: name.to_string(), kind: StateKind::Simple }
    }
}

/// One region: a set of sibling states with a designated initial state
/// and the transitions between them. A region with no states is legal
/// and describes an inert machine.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    pub name: Option<String>,
    pub states: Vec<State>,
    pub initial: Option<String>,
    pub transitions: Vec<Transition>,
}

impl Region {
    pub fn empty() -> Region {
        Region { name: None, states: Vec::new(), initial: None, transitions: Vec::new() }
    }

    pub fn state(&self, name: &str) -> Option<&State> {
        self.states.iter().find(|s| s.name == name)
    }
}

/// Typed variable declaration with an initial-value expression that
/// may reference instance parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub ty: SemType,
    pub init: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemType {
    Int,
    Bool,
    Msg,
}

impl SemType {
    pub fn name(self) -> &'static str {
        match self {
            SemType::Int => "int",
            SemType::Bool => "bool",
            SemType::Msg => "msg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProtocolStateMachine {
    pub root: Region,
    /// Machine-local variables, in addition to the owning contract's
    /// state variables. Both live in one flat namespace at runtime.
    pub local_vars: Vec<VarDecl>,
    /// When set, two enabled transitions of equal priority in one
    /// region with different targets are reported as a conflict.
    pub deterministic: bool,
}

impl ProtocolStateMachine {
    pub fn inert() -> ProtocolStateMachine {
        ProtocolStateMachine { root: Region::empty(), local_vars: Vec::new(), deterministic: false }
    }

    /// Labels the machine can consume.
    pub fn input_alphabet(&self) -> Vec<String> {
        let mut out = Vec::new();
        visit_regions(&self.root, &mut |r| {
            for t in &r.transitions {
                if let Trigger::On { label, .. } = &t.trigger {
                    if !out.contains(label) {
                        out.push(label.clone());
                    }
                }
            }
        });
        out
    }

    /// Every label the machine can exhibit in a trace: consumed
    /// labels, emitted labels, and explicit event names.
    pub fn alphabet(&self) -> Vec<String> {
        let mut out = Vec::new();
        visit_regions(&self.root, &mut |r| {
            for t in &r.transitions {
                let l = t.event_label().to_string();
                if !out.contains(&l) {
                    out.push(l);
                }
                for a in &t.actions {
                    if let Action::Emit { label, .. } | Action::Broadcast { label, .. } = a {
                        if !out.contains(label) {
                            out.push(label.clone());
                        }
                    }
                }
            }
        });
        out
    }

    /// Timeout names referenced by `after` triggers.
    pub fn timeout_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        visit_regions(&self.root, &mut |r| {
            for t in &r.transitions {
                if let Trigger::After { timeout } = &t.trigger {
                    if !out.contains(timeout) {
                        out.push(timeout.clone());
                    }
                }
            }
        });
        out
    }

    pub fn has_error_transitions(&self) -> bool {
        let mut found = false;
        visit_regions(&self.root, &mut |r| {
            if r.transitions.iter().any(|t| t.stereotype == Stereotype::Error) {
                found = true;
            }
        });
        found
    }
}

pub fn visit_regions(region: &Region, f: &mut impl FnMut(&Region)) {
    f(region);
    for s in &region.states {
        match &s.kind {
            StateKind::Simple => {}
            StateKind::Composite(r) => visit_regions(r, f),
            StateKind::Parallel(rs) => {
                for r in rs {
                    visit_regions(r, f);
                }
            }
        }
    }
}

/// Active-state tree for one region: either the region is empty, or
/// exactly one of its states is active, with one child node per child
/// region of that state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActiveState {
    Empty,
    At { state: String, children: Vec<ActiveState> },
}

/// A machine configuration: the active-state tree plus the variable
/// valuation. Ordered and hashable so configurations can key visited
/// sets directly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProtocolConfig {
    pub active: ActiveState,
    pub vars: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("UNKNOWN_EVENT: label `{0}` is not in the machine's input alphabet")]
    UnknownEvent(String),
    #[error("CONFLICTING_TRANSITIONS: state `{state}` enables transitions to `{a}` and `{b}` in a deterministic machine")]
    ConflictingTransitions { state: String, a: String, b: String },
    #[error("state `{0}` not found while stepping")]
    UnknownState(String),
    #[error("initial state missing for a non-empty region")]
    MissingInitial,
    #[error("evaluation failed in {context}: {source}")]
    Eval {
        context: String,
        #[source]
        source: EvalError,
    },
}

/// What the environment offers to the machine for one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stimulus {
    /// Let an enabled completion transition fire.
    Internal,
    /// Offer an event for consumption.
    Event { label: String, payload: Value },
    /// Let an expired timer fire. The optional source path restricts
    /// firing to the timer armed on that state.
    Timer { timeout: String, source: Option<Vec<String>> },
}

/// An emitted event awaiting routing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub label: String,
    pub value: Value,
    pub broadcast: bool,
}

/// One way the machine can move from a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub config: ProtocolConfig,
    pub label: String,
    pub payload: Value,
    pub visibility: Visibility,
    pub stereotype: Stereotype,
    pub emissions: Vec<Emission>,
    /// Paths of states entered by this firing, target first. A
    /// self-loop re-enters its target.
    pub entered: Vec<Vec<String>>,
    /// Paths of states exited by this firing.
    pub exited: Vec<Vec<String>>,
    /// Path of the source state of the fired transition.
    pub source: Vec<String>,
}

/// Builds the initial configuration: variables from their initial
/// expressions (parameters in scope), each active region at its
/// initial state.
pub fn initial_config(
    machine: &ProtocolStateMachine,
    contract_vars: &[VarDecl],
    params: &BTreeMap<String, Value>,
) -> Result<ProtocolConfig, StepError> {
    let mut vars = BTreeMap::new();
    for decl in contract_vars.iter().chain(machine.local_vars.iter()) {
        let scope = Scope::new(params, &vars);
        let v = eval(&decl.init, &scope).map_err(|e| StepError::Eval {
            context: format!("initial value of `{}`", decl.name),
            source: e,
        })?;
        vars.insert(decl.name.clone(), v);
    }
    let active = enter_region(&machine.root)?;
    Ok(ProtocolConfig { active, vars })
}

fn enter_region(region: &Region) -> Result<ActiveState, StepError> {
    if region.states.is_empty() {
        return Ok(ActiveState::Empty);
    }
    let init = region.initial.as_deref().ok_or(StepError::MissingInitial)?;
    let state = region.state(init).ok_or_else(|| StepError::UnknownState(init.to_string()))?;
    enter_state(region, state)
}

fn enter_state(region: &Region, state: &State) -> Result<ActiveState, StepError> {
    let _ = region;
    let children = match &state.kind {
        StateKind::Simple => Vec::new(),
        StateKind::Composite(r) => vec![enter_region(r)?],
        StateKind::Parallel(rs) => rs.iter().map(enter_region).collect::<Result<_, _>>()?,
    };
    Ok(ActiveState::At { state: state.name.clone(), children })
}

/// All state paths active in a configuration, outermost first.
pub fn active_paths(machine: &ProtocolStateMachine, cfg: &ProtocolConfig) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    collect_active(&machine.root, &cfg.active, &mut Vec::new(), &mut out);
    out
}

fn collect_active(
    region: &Region,
    active: &ActiveState,
    prefix: &mut Vec<String>,
    out: &mut Vec<Vec<String>>,
) {
    let ActiveState::At { state, children } = active else { return };
    prefix.push(state.clone());
    out.push(prefix.clone());
    if let Some(s) = region.state(state) {
        match (&s.kind, children.as_slice()) {
            (StateKind::Composite(r), [c]) => collect_active(r, c, prefix, out),
            (StateKind::Parallel(rs), cs) => {
                for (r, c) in rs.iter().zip(cs) {
                    collect_active(r, c, prefix, out);
                }
            }
            _ => {}
        }
    }
    prefix.pop();
}

/// Timer sites: (path of the state, timeout name) for every active
/// state that has an outgoing `after` transition.
pub fn armed_timers(machine: &ProtocolStateMachine, cfg: &ProtocolConfig) -> Vec<(Vec<String>, String)> {
    armed_timers_by(machine, cfg, &|_| true)
}

/// Timer sites restricted to `after` transitions accepted by `pred`.
/// Execution arms only nominal timers; injected behaviour never comes
/// from the clock.
pub fn armed_timers_by(
    machine: &ProtocolStateMachine,
    cfg: &ProtocolConfig,
    pred: &dyn Fn(&Transition) -> bool,
) -> Vec<(Vec<String>, String)> {
    let mut out = Vec::new();
    collect_timers(&machine.root, &cfg.active, &mut Vec::new(), pred, &mut out);
    out
}

fn collect_timers(
    region: &Region,
    active: &ActiveState,
    prefix: &mut Vec<String>,
    pred: &dyn Fn(&Transition) -> bool,
    out: &mut Vec<(Vec<String>, String)>,
) {
    let ActiveState::At { state, children } = active else { return };
    prefix.push(state.clone());
    for t in &region.transitions {
        if t.source == *state && pred(t) {
            if let Trigger::After { timeout } = &t.trigger {
                let site = (prefix.clone(), timeout.clone());
                if !out.contains(&site) {
                    out.push(site);
                }
            }
        }
    }
    if let Some(s) = region.state(state) {
        match (&s.kind, children.as_slice()) {
            (StateKind::Composite(r), [c]) => collect_timers(r, c, prefix, pred, out),
            (StateKind::Parallel(rs), cs) => {
                for (r, c) in rs.iter().zip(cs) {
                    collect_timers(r, c, prefix, pred, out);
                }
            }
            _ => {}
        }
    }
    prefix.pop();
}

/// True when some completion transition is enabled. Used by callers
/// to give completion transitions priority over everything else.
pub fn has_enabled_completion(
    machine: &ProtocolStateMachine,
    params: &BTreeMap<String, Value>,
    cfg: &ProtocolConfig,
    injection: bool,
) -> Result<bool, StepError> {
    Ok(!step(machine, params, cfg, &Stimulus::Internal, injection)?.is_empty())
}

/// Computes every configuration reachable by firing one enabled
/// transition matching the stimulus. Error-stereotyped transitions
/// participate only when `injection` is set. Offering an event while
/// a completion transition is enabled yields no successors: the
/// machine must run to completion first.
pub fn step(
    machine: &ProtocolStateMachine,
    params: &BTreeMap<String, Value>,
    cfg: &ProtocolConfig,
    stimulus: &Stimulus,
    injection: bool,
) -> Result<Vec<Firing>, StepError> {
    if let Stimulus::Event { label, .. } = stimulus {
        if !machine.input_alphabet().iter().any(|l| l == label) {
            return Err(StepError::UnknownEvent(label.clone()));
        }
    }
    // Only nominal completions impose run-to-completion priority; an
    // injectable error move is optional and must not block inputs.
    if !matches!(stimulus, Stimulus::Internal)
        && has_enabled_completion(machine, params, cfg, false)?
    {
        return Ok(Vec::new());
    }
    let mut firings = Vec::new();
    step_region(
        machine,
        &machine.root,
        &cfg.active,
        &mut Vec::new(),
        params,
        &cfg.vars,
        stimulus,
        injection,
        &mut |region_active_update, firing| firings.push((region_active_update, firing)),
    )?;

    let mut out = Vec::new();
    for (rebuilt, partial) in firings {
        out.push(Firing {
            config: ProtocolConfig { active: rebuilt, vars: partial.vars },
            label: partial.label,
            payload: partial.payload,
            visibility: partial.visibility,
            stereotype: partial.stereotype,
            emissions: partial.emissions,
            entered: partial.entered,
            exited: partial.exited,
            source: partial.source,
        });
    }

    if machine.deterministic && out.len() > 1 {
        // Two enabled firings from the same source state conflict.
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                if out[i].source == out[j].source && out[i].config.active != out[j].config.active {
                    return Err(StepError::ConflictingTransitions {
                        state: out[i].source.join("/"),
                        a: out[i].label.clone(),
                        b: out[j].label.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

struct PartialFiring {
    vars: BTreeMap<String, Value>,
    label: String,
    payload: Value,
    visibility: Visibility,
    stereotype: Stereotype,
    emissions: Vec<Emission>,
    entered: Vec<Vec<String>>,
    exited: Vec<Vec<String>>,
    source: Vec<String>,
}

/// Walks the active tree; for each active region, tries its
/// transitions from the active state. On a match the whole active
/// tree is rebuilt with only that region changed.
#[allow(clippy::too_many_arguments)]
fn step_region(
    machine: &ProtocolStateMachine,
    region: &Region,
    active: &ActiveState,
    prefix: &mut Vec<String>,
    params: &BTreeMap<String, Value>,
    vars: &BTreeMap<String, Value>,
    stimulus: &Stimulus,
    injection: bool,
    found: &mut dyn FnMut(ActiveState, PartialFiring),
) -> Result<(), StepError> {
    let ActiveState::At { state, children } = active else { return Ok(()) };

    for t in &region.transitions {
        if t.source != *state {
            continue;
        }
        if t.stereotype == Stereotype::Error && !injection {
            continue;
        }
        let binding: Option<(&str, &Value)> = match (&t.trigger, stimulus) {
            (Trigger::Completion, Stimulus::Internal) => None,
            (Trigger::On { label, bind }, Stimulus::Event { label: offered, payload })
                if label == offered =>
            {
                bind.as_deref().map(|b| (b, payload))
            }
            (Trigger::After { timeout }, Stimulus::Timer { timeout: offered, source })
                if timeout == offered =>
            {
                let mut path = prefix.clone();
                path.push(state.clone());
                if let Some(want) = source {
                    if *want != path {
                        continue;
                    }
                }
                None
            }
            _ => continue,
        };
        let scope = match binding {
            Some((n, v)) => Scope::new(params, vars).with_binding(n, v),
            None => Scope::new(params, vars),
        };
        if let Some(g) = &t.guard {
            let ok = eval(g, &scope)
                .and_then(|v| v.as_bool())
                .map_err(|e| StepError::Eval {
                    context: format!("guard on `{}` -> `{}`", t.source, t.target),
                    source: e,
                })?;
            if !ok {
                continue;
            }
        }

        // Execute actions against a copy of the valuation.
        let mut new_vars = vars.clone();
        let mut emissions = Vec::new();
        for a in &t.actions {
            let scope = match binding {
                Some((n, v)) => Scope::new(params, &new_vars).with_binding(n, v),
                None => Scope::new(params, &new_vars),
            };
            match a {
                Action::Assign { var, value } => {
                    let v = eval(value, &scope).map_err(|e| StepError::Eval {
                        context: format!("assignment to `{var}`"),
                        source: e,
                    })?;
                    new_vars.insert(var.clone(), v);
                }
                Action::Invoke { op, args } => {
                    for arg in args {
                        eval(arg, &scope).map_err(|e| StepError::Eval {
                            context: format!("argument of `{op}`"),
                            source: e,
                        })?;
                    }
                }
                Action::Emit { label, payload } => {
                    let v = match payload {
                        Some(p) => eval(p, &scope).map_err(|e| StepError::Eval {
                            context: format!("payload of `{label}`"),
                            source: e,
                        })?,
                        None => Value::Unit,
                    };
                    emissions.push(Emission { label: label.clone(), value: v, broadcast: false });
                }
                Action::Broadcast { label, payload } => {
                    let v = eval(payload, &scope).map_err(|e| StepError::Eval {
                        context: format!("payload of `{label}`"),
                        source: e,
                    })?;
                    emissions.push(Emission { label: label.clone(), value: v, broadcast: true });
                }
            }
        }

        let target = region
            .state(&t.target)
            .ok_or_else(|| StepError::UnknownState(t.target.clone()))?;

        let mut source_path = prefix.clone();
        source_path.push(state.clone());
        let mut exited = Vec::new();
        collect_subtree_paths(region, active, prefix, &mut exited);

        let new_active = enter_state(region, target)?;
        let mut entered = Vec::new();
        collect_subtree_paths(region, &new_active, prefix, &mut entered);

        let payload_value = match (&binding, emissions.first()) {
            (Some((_, v)), _) => (*v).clone(),
            (None, Some(e)) => e.value.clone(),
            (None, None) => Value::Unit,
        };

        found(
            new_active.clone(),
            PartialFiring {
                vars: new_vars,
                label: t.event_label().to_string(),
                payload: payload_value,
                visibility: t.visibility,
                stereotype: t.stereotype,
                emissions,
                entered,
                exited,
                source: source_path,
            },
        );
    }

    // Recurse into the active state's child regions; a firing below
    // keeps this level's state and replaces the relevant child.
    if let Some(s) = region.state(state) {
        prefix.push(state.clone());
        match (&s.kind, children.as_slice()) {
            (StateKind::Composite(r), [c]) => {
                let state_name = state.clone();
                step_region(machine, r, c, prefix, params, vars, stimulus, injection, &mut |sub, pf| {
                    found(ActiveState::At { state: state_name.clone(), children: vec![sub] }, pf);
                })?;
            }
            (StateKind::Parallel(rs), cs) => {
                for (i, (r, c)) in rs.iter().zip(cs).enumerate() {
                    let state_name = state.clone();
                    let children_copy = children.clone();
                    step_region(machine, r, c, prefix, params, vars, stimulus, injection, &mut |sub, pf| {
                        let mut kids = children_copy.clone();
                        kids[i] = sub;
                        found(ActiveState::At { state: state_name.clone(), children: kids }, pf);
                    })?;
                }
            }
            _ => {}
        }
        prefix.pop();
    }
    Ok(())
}

/// Paths of every state in an active subtree, relative to `prefix`.
fn collect_subtree_paths(
    region: &Region,
    active: &ActiveState,
    prefix: &[String],
    out: &mut Vec<Vec<String>>,
) {
    let mut p = prefix.to_vec();
    collect_active(region, active, &mut p, out);
}

/// Rebuilds a full-machine firing from a subregion firing when the
/// machine root is itself the region stepped. Exposed for the
/// execution engine's convenience.
pub fn config_with_active(cfg: &ProtocolConfig, active: ActiveState) -> ProtocolConfig {
    ProtocolConfig { active, vars: cfg.vars.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinOp;

    fn flat_machine() -> ProtocolStateMachine {
        // A -> B on go, B -> A (completion, x := x + 1), B -> C on stop [x > 0]
        ProtocolStateMachine {
            root: Region {
                name: None,
                states: vec![State::simple("A"), State::simple("B"), State::simple("C")],
                initial: Some("A".into()),
                transitions: vec![
                    Transition {
                        source: "A".into(),
                        target: "B".into(),
                        trigger: Trigger::On { label: "go".into(), bind: None },
                        guard: None,
                        actions: vec![],
                        event: None,
                        stereotype: Stereotype::Nominal,
                        visibility: Visibility::Visible,
                    },
                    Transition {
                        source: "B".into(),
                        target: "A".into(),
                        trigger: Trigger::Completion,
                        guard: None,
                        actions: vec![Action::Assign {
                            var: "x".into(),
                            value: Expr::bin(BinOp::Add, Expr::var("x"), Expr::int(1)),
                        }],
                        event: Some("bump".into()),
                        stereotype: Stereotype::Nominal,
                        visibility: Visibility::Internal,
                    },
                ],
            },
            local_vars: vec![VarDecl { name: "x".into(), ty: SemType::Int, init: Expr::int(0) }],
            deterministic: false,
        }
    }

    #[test]
    fn initial_and_event_step() {
        let m = flat_machine();
        let params = BTreeMap::new();
        let cfg = initial_config(&m, &[], &params).unwrap();
        assert_eq!(cfg.vars["x"], Value::Int(0));

        let fs = step(
            &m,
            &params,
            &cfg,
            &Stimulus::Event { label: "go".into(), payload: Value::Unit },
            false,
        )
        .unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].label, "go");
        assert_eq!(fs[0].entered, vec![vec!["B".to_string()]]);
    }

    #[test]
    fn completion_has_priority_over_events() {
        let m = flat_machine();
        let params = BTreeMap::new();
        let cfg = initial_config(&m, &[], &params).unwrap();
        let at_b = step(
            &m,
            &params,
            &cfg,
            &Stimulus::Event { label: "go".into(), payload: Value::Unit },
            false,
        )
        .unwrap()
        .remove(0)
        .config;

        // From B a completion is enabled, so offering `go` yields nothing.
        let fs = step(
            &m,
            &params,
            &at_b,
            &Stimulus::Event { label: "go".into(), payload: Value::Unit },
            false,
        )
        .unwrap();
        assert!(fs.is_empty());

        let fs = step(&m, &params, &at_b, &Stimulus::Internal, false).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].label, "bump");
        assert_eq!(fs[0].config.vars["x"], Value::Int(1));
    }

    #[test]
    fn unknown_event_is_an_error() {
        let m = flat_machine();
        let params = BTreeMap::new();
        let cfg = initial_config(&m, &[], &params).unwrap();
        let err = step(
            &m,
            &params,
            &cfg,
            &Stimulus::Event { label: "nope".into(), payload: Value::Unit },
            false,
        )
        .unwrap_err();
        assert_eq!(err, StepError::UnknownEvent("nope".into()));
    }

    #[test]
    fn error_transitions_require_injection() {
        let mut m = flat_machine();
        m.root.transitions.push(Transition {
            source: "A".into(),
            target: "C".into(),
            trigger: Trigger::Completion,
            guard: None,
            actions: vec![],
            event: Some("break".into()),
            stereotype: Stereotype::Error,
            visibility: Visibility::Internal,
        });
        let params = BTreeMap::new();
        let cfg = initial_config(&m, &[], &params).unwrap();
        assert!(step(&m, &params, &cfg, &Stimulus::Internal, false).unwrap().is_empty());
        let with = step(&m, &params, &cfg, &Stimulus::Internal, true).unwrap();
        assert_eq!(with.len(), 1);
        assert_eq!(with[0].stereotype, Stereotype::Error);
    }

    #[test]
    fn parallel_regions_interleave_one_at_a_time() {
        let region = |tag: &str| Region {
            name: Some(tag.into()),
            states: vec![State::simple(&format!("{tag}0")), State::simple(&format!("{tag}1"))],
            initial: Some(format!("{tag}0")),
            transitions: vec![Transition {
                source: format!("{tag}0"),
                target: format!("{tag}1"),
                trigger: Trigger::Completion,
                guard: None,
                actions: vec![],
                event: Some(format!("{tag}-adv")),
                stereotype: Stereotype::Nominal,
                visibility: Visibility::Internal,
            }],
        };
        let m = ProtocolStateMachine {
            root: Region {
                name: None,
                states: vec![State {
                    name: "P".into(),
                    kind: StateKind::Parallel(vec![region("l"), region("r")]),
                }],
                initial: Some("P".into()),
                transitions: vec![],
            },
            local_vars: vec![],
            deterministic: false,
        };
        let params = BTreeMap::new();
        let cfg = initial_config(&m, &[], &params).unwrap();
        let fs = step(&m, &params, &cfg, &Stimulus::Internal, false).unwrap();
        // One successor per region; each advances exactly one region.
        assert_eq!(fs.len(), 2);
        assert_ne!(fs[0].config.active, fs[1].config.active);
    }

    #[test]
    fn timer_step_matches_source_path() {
        let m = ProtocolStateMachine {
            root: Region {
                name: None,
                states: vec![State::simple("W"), State::simple("D")],
                initial: Some("W".into()),
                transitions: vec![Transition {
                    source: "W".into(),
                    target: "D".into(),
                    trigger: Trigger::After { timeout: "t".into() },
                    guard: None,
                    actions: vec![],
                    event: Some("expired".into()),
                    stereotype: Stereotype::Nominal,
                    visibility: Visibility::Visible,
                }],
            },
            local_vars: vec![],
            deterministic: false,
        };
        let params = BTreeMap::new();
        let cfg = initial_config(&m, &[], &params).unwrap();
        assert_eq!(armed_timers(&m, &cfg), vec![(vec!["W".to_string()], "t".to_string())]);

        let fs = step(
            &m,
            &params,
            &cfg,
            &Stimulus::Timer { timeout: "t".into(), source: Some(vec!["W".into()]) },
            false,
        )
        .unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].label, "expired");

        let none = step(
            &m,
            &params,
            &cfg,
            &Stimulus::Timer { timeout: "t".into(), source: Some(vec!["X".into()]) },
            false,
        )
        .unwrap();
        assert!(none.is_empty());
    }
}
