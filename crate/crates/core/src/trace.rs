//! Execution traces.
//!
//! A trace is the ordered list of events produced by one run: each
//! fired transition contributes one event carrying the logical
//! timestamp, the instance that moved, the event label, the payload,
//! and whether the event is externally visible.

use crate::expr::Value;
use crate::protocol::Visibility;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub t: u64,
    pub inst: String,
    pub label: String,
    pub kind: Visibility,
    pub payload: Value,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    /// Nothing enabled and no pending timer before the step bound.
    DeadlockBeforeBound,
    /// The step bound was reached with work still enabled.
    MaxSteps,
    /// A contract invariant evaluated to false after a firing.
    InvariantViolation,
}

impl Terminal {
    pub fn name(self) -> &'static str {
        match self {
            Terminal::DeadlockBeforeBound => "DEADLOCK_BEFORE_BOUND",
            Terminal::MaxSteps => "MAX_STEPS",
            Terminal::InvariantViolation => "INVARIANT_VIOLATION",
        }
    }

    pub fn parse(s: &str) -> Option<Terminal> {
        match s {
            "DEADLOCK_BEFORE_BOUND" => Some(Terminal::DeadlockBeforeBound),
            "MAX_STEPS" => Some(Terminal::MaxSteps),
            "INVARIANT_VIOLATION" => Some(Terminal::InvariantViolation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub events: Vec<Event>,
    pub terminal: Option<Terminal>,
}

impl Trace {
    /// Projects the trace onto its visible events. Timestamps are
    /// preserved; applying the projection twice changes nothing.
    pub fn hide_internal(&self) -> Trace {
        Trace {
            events: self
                .events
                .iter()
                .filter(|e| e.kind == Visibility::Visible)
                .cloned()
                .collect(),
            terminal: self.terminal,
        }
    }

    /// Visible labels in order, the trace's refinement-level view.
    pub fn visible_labels(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter(|e| e.kind == Visibility::Visible)
            .map(|e| e.label.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: u64, label: &str, kind: Visibility) -> Event {
        Event { t, inst: "i".into(), label: label.into(), kind, payload: Value::Unit }
    }

    #[test]
    fn hide_internal_keeps_order_and_timestamps() {
        let tr = Trace {
            events: vec![
                ev(0, "a", Visibility::Visible),
                ev(1, "x", Visibility::Internal),
                ev(2, "b", Visibility::Visible),
            ],
            terminal: Some(Terminal::DeadlockBeforeBound),
        };
        let vis = tr.hide_internal();
        assert_eq!(vis.events.len(), 2);
        assert_eq!(vis.events[0].t, 0);
        assert_eq!(vis.events[1].t, 2);
        assert_eq!(vis.events[1].label, "b");
        assert_eq!(vis.terminal, Some(Terminal::DeadlockBeforeBound));
    }

    #[test]
    fn hide_internal_is_idempotent() {
        let tr = Trace {
            events: vec![ev(0, "a", Visibility::Visible), ev(1, "x", Visibility::Internal)],
            terminal: None,
        };
        assert_eq!(tr.hide_internal(), tr.hide_internal().hide_internal());
    }
}
