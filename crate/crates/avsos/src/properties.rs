//! What a correct election run looks like, phrased as exploration
//! properties.

use std::collections::BTreeMap;

use sosc_core::{Event, MsgKind, Value, Visibility};
use sosc_engine::{GlobalConfig, Property, System};

use crate::catalog::{ELECTED, SEND};

pub fn is_device(sys: &System, idx: usize) -> bool {
    sys.instances[idx].contract == "LE_Device"
}

pub fn is_wrapper(sys: &System, idx: usize) -> bool {
    sys.instances[idx].contract == "LE_Wrapper"
}

/// Decided leader per device instance; 0 means undecided.
pub fn leaders(sys: &System, cfg: &GlobalConfig) -> BTreeMap<String, i64> {
    let mut out = BTreeMap::new();
    for (i, inst) in sys.instances.iter().enumerate() {
        if is_device(sys, i) {
            let v = match cfg.machines[i].vars.get("leader") {
                Some(Value::Int(k)) => *k,
                _ => 0,
            };
            out.insert(inst.id.clone(), v);
        }
    }
    out
}

/// Every announced decision names `expected`, and no device is left
/// undecided once the run has nowhere further to go.
pub struct Agreement {
    pub expected: i64,
}

impl Property for Agreement {
    fn name(&self) -> &str {
        "agreement"
    }

    fn check_event(&self, _sys: &System, event: &Event, _after: &GlobalConfig) -> Option<String> {
        if event.label == ELECTED && event.payload != Value::Int(self.expected) {
            return Some(format!(
                "`{}` announced leader {:?}, expected {}",
                event.inst, event.payload, self.expected
            ));
        }
        None
    }

    fn check_terminal(
        &self,
        sys: &System,
        _path: &[Event],
        terminal: &GlobalConfig,
    ) -> Option<String> {
        for (id, leader) in leaders(sys, terminal) {
            if leader != self.expected {
                return Some(format!(
                    "run ended with `{id}` on leader {leader}, expected {}",
                    self.expected
                ));
            }
        }
        None
    }
}

/// A device announces at most one decision per run.
pub struct SingleDecision;

impl Property for SingleDecision {
    fn name(&self) -> &str {
        "no-duplicate-decision"
    }

    fn check_terminal(
        &self,
        _sys: &System,
        path: &[Event],
        _terminal: &GlobalConfig,
    ) -> Option<String> {
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for e in path {
            if e.label == ELECTED {
                let c = counts.entry(e.inst.as_str()).or_default();
                *c += 1;
                if *c > 1 {
                    return Some(format!("`{}` announced a second decision", e.inst));
                }
            }
        }
        None
    }
}

/// A wrapper transmits each sequence number at most `1 + max_retries`
/// times before giving up.
pub struct GiveUpBound {
    pub max_retries: i64,
}

impl Property for GiveUpBound {
    fn name(&self) -> &str {
        "give-up-bound"
    }

    fn check_terminal(
        &self,
        sys: &System,
        path: &[Event],
        _terminal: &GlobalConfig,
    ) -> Option<String> {
        let wrappers: Vec<&str> = sys
            .instances
            .iter()
            .enumerate()
            .filter(|(i, _)| is_wrapper(sys, *i))
            .map(|(_, inst)| inst.id.as_str())
            .collect();
        let mut sends: BTreeMap<(&str, i64), i64> = BTreeMap::new();
        for e in path {
            // Visible sends are actual transmissions; the internal
            // consumption of the owner's message shares the label.
            if e.label != SEND
                || e.kind != Visibility::Visible
                || !wrappers.contains(&e.inst.as_str())
            {
                continue;
            }
            let Value::Msg(env) = &e.payload else { continue };
            if env.kind != MsgKind::Data {
                continue;
            }
            let c = sends.entry((e.inst.as_str(), env.seq)).or_default();
            *c += 1;
            if *c > 1 + self.max_retries {
                return Some(format!(
                    "`{}` transmitted seq {} more than {} times",
                    e.inst,
                    env.seq,
                    1 + self.max_retries
                ));
            }
        }
        None
    }
}
