//! Bounded breadth-first exploration of every schedule.
//!
//! Each node is a global configuration; each edge fires one move.
//! Injection decisions branch: an eligible error move with budget
//! left adds one successor beside the nominal ones. Timer moves are
//! added only at quiescent nodes. Breadth-first order makes the first
//! counterexample found a minimal one.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use sosc_core::{Event, Trace};

use crate::moves::{
    initial_global, invariant_violation, quiescent, structural_choices, timer_choices, EngineError,
    GlobalConfig, StepChoice,
};
use crate::policy::{FaultPolicy, InjectState, PolicyError};
use crate::system::System;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploreConfig {
    /// Maximum number of firings along any explored path.
    pub max_depth: u32,
    /// Cap on stored configurations; exceeding it aborts the search.
    pub max_states: usize,
}

impl Default for ExploreConfig {
    fn default() -> ExploreConfig {
        ExploreConfig { max_depth: 50, max_states: 1_000_000 }
    }
}

/// A safety property checked during exploration.
pub trait Property {
    fn name(&self) -> &str;
    /// Checked on every explored edge, given the event fired and the
    /// configuration after it.
    fn check_event(&self, _sys: &System, _event: &Event, _after: &GlobalConfig) -> Option<String> {
        None
    }
    /// Checked on every terminal configuration (no move enabled at
    /// all), given the full path that reached it.
    fn check_terminal(
        &self,
        _sys: &System,
        _path: &[Event],
        _terminal: &GlobalConfig,
    ) -> Option<String> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExploreStats {
    /// Distinct configurations reached.
    pub states: usize,
    /// Edges traversed (including revisits).
    pub transitions: u64,
    /// Distinct terminal configurations.
    pub terminals: usize,
    /// Nodes left unexpanded because they sat at the depth bound;
    /// zero means the bound covered every schedule.
    pub frontier_at_bound: usize,
    pub max_depth_reached: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExploreOutcome {
    Pass(ExploreStats),
    Fail { property: String, message: String, counterexample: Trace, stats: ExploreStats },
    StateCapExceeded(ExploreStats),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploreError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

struct Node {
    cfg: GlobalConfig,
    parent: Option<usize>,
    event: Option<Event>,
    depth: u32,
}

fn path_to(arena: &[Node], mut idx: usize) -> Vec<Event> {
    let mut events = Vec::new();
    loop {
        let node = &arena[idx];
        if let Some(e) = &node.event {
            events.push(e.clone());
        }
        match node.parent {
            Some(p) => idx = p,
            None => break,
        }
    }
    events.reverse();
    events
}

/// Advances per-instance occurrence counters for every instance that
/// offered an eligible error move at the expanded node.
fn bump_occurrences(sys: &System, inject: &InjectState, offered: &[usize]) -> InjectState {
    let InjectState::Occurrences { counts } = inject else { return inject.clone() };
    let mut counts = counts.clone();
    for &i in offered {
        *counts.entry(sys.instances[i].id.clone()).or_insert(0) += 1;
    }
    InjectState::Occurrences { counts }
}

pub fn explore(
    sys: &System,
    policy: &FaultPolicy,
    config: &ExploreConfig,
    properties: &[&dyn Property],
) -> Result<ExploreOutcome, ExploreError> {
    policy.validate()?;
    if !policy.explorable() {
        return Err(ExploreError::Policy(PolicyError::NotExplorable));
    }

    let mut root = initial_global(sys)?;
    root.inject = policy.initial_state();
    for i in 0..sys.instances.len() {
        if let Some(v) = invariant_violation(sys, i, &root.machines[i])? {
            return Ok(ExploreOutcome::Fail {
                property: "invariant".into(),
                message: v,
                counterexample: Trace::default(),
                stats: ExploreStats { states: 1, ..ExploreStats::default() },
            });
        }
    }

    let mut arena = vec![Node { cfg: root.clone(), parent: None, event: None, depth: 0 }];
    let mut visited: HashSet<GlobalConfig> = HashSet::from([root]);
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut stats = ExploreStats { states: 1, ..ExploreStats::default() };

    while let Some(idx) = queue.pop_front() {
        let depth = arena[idx].depth;
        stats.max_depth_reached = stats.max_depth_reached.max(depth);
        if depth >= config.max_depth {
            stats.frontier_at_bound += 1;
            continue;
        }

        let choices = structural_choices(sys, &arena[idx].cfg)?;
        let offered: Vec<usize> = choices
            .iter()
            .filter(|c| c.error && policy.eligible(c.message.as_ref()))
            .map(|c| c.instance)
            .fold(Vec::new(), |mut acc, i| {
                if !acc.contains(&i) {
                    acc.push(i);
                }
                acc
            });

        // Successor list: (choice, charged injection state).
        let mut succs: Vec<(StepChoice, InjectState)> = Vec::new();
        for c in &choices {
            if c.error {
                let occurrence = match &arena[idx].cfg.inject {
                    InjectState::Occurrences { counts } => {
                        counts.get(&sys.instances[c.instance].id).copied().unwrap_or(0)
                    }
                    _ => 0,
                };
                if let Some(charged) = policy.branch(
                    &sys.instances[c.instance].id,
                    occurrence,
                    c.message.as_ref(),
                    &arena[idx].cfg.inject,
                ) {
                    succs.push((c.clone(), charged));
                }
            } else {
                succs.push((c.clone(), arena[idx].cfg.inject.clone()));
            }
        }
        if quiescent(&choices) {
            for c in timer_choices(sys, &arena[idx].cfg)? {
                let inject = arena[idx].cfg.inject.clone();
                succs.push((c, inject));
            }
        }

        if succs.is_empty() {
            stats.terminals += 1;
            let path = path_to(&arena, idx);
            for p in properties {
                if let Some(message) = p.check_terminal(sys, &path, &arena[idx].cfg) {
                    return Ok(ExploreOutcome::Fail {
                        property: p.name().to_string(),
                        message,
                        counterexample: Trace { events: path, terminal: None },
                        stats,
                    });
                }
            }
            continue;
        }

        for (choice, charged) in succs {
            stats.transitions += 1;
            let mut next = choice.next;
            next.inject = bump_occurrences(sys, &charged, &offered);
            let event = Event {
                t: depth as u64,
                inst: sys.instances[choice.instance].id.clone(),
                label: choice.label,
                kind: choice.visibility,
                payload: choice.payload,
            };

            if let Some(v) = choice.violation {
                let mut path = path_to(&arena, idx);
                path.push(event);
                return Ok(ExploreOutcome::Fail {
                    property: "invariant".into(),
                    message: v,
                    counterexample: Trace { events: path, terminal: None },
                    stats,
                });
            }
            for p in properties {
                if let Some(message) = p.check_event(sys, &event, &next) {
                    let mut path = path_to(&arena, idx);
                    path.push(event);
                    return Ok(ExploreOutcome::Fail {
                        property: p.name().to_string(),
                        message,
                        counterexample: Trace { events: path, terminal: None },
                        stats,
                    });
                }
            }

            if visited.contains(&next) {
                continue;
            }
            if arena.len() >= config.max_states {
                return Ok(ExploreOutcome::StateCapExceeded(stats));
            }
            visited.insert(next.clone());
            stats.states += 1;
            arena.push(Node { cfg: next, parent: Some(idx), event: Some(event), depth: depth + 1 });
            queue.push_back(arena.len() - 1);
        }
    }

    Ok(ExploreOutcome::Pass(stats))
}
