//! Fault injection policies. A policy decides, per opportunity,
//! whether an error-stereotyped transition fires. An opportunity
//! arises whenever such a transition is enabled at a decision point.

use std::collections::BTreeMap;

use thiserror::Error;

use sosc_core::{Envelope, MsgKind};

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum FaultPolicy {
    /// Never inject: nominal behaviour only.
    None,
    /// Independent coin per opportunity. `drop_acks: false` exempts
    /// acknowledgement messages. `window` limits injection to the
    /// first so many steps.
    Probabilistic { drop_prob: f64, drop_acks: bool, window: Option<u64> },
    /// Inject exactly at the listed `(instance, occurrence)` pairs,
    /// counting opportunities per instance from zero.
    Scheduled { points: Vec<(String, u64)> },
    /// Inject wherever a budget remains. With `per_message` the
    /// budget applies separately per message identity (src, dst, seq,
    /// kind); otherwise it is one global pool. `data_only` exempts
    /// acknowledgements entirely.
    Exhaustive { budget: u32, per_message: bool, data_only: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("drop probability {0} is not within [0, 1]")]
    Probability(String),
    #[error("a probabilistic policy cannot drive exhaustive exploration")]
    NotExplorable,
}

impl FaultPolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if let FaultPolicy::Probabilistic { drop_prob, .. } = self {
            if !(0.0..=1.0).contains(drop_prob) || drop_prob.is_nan() {
                return Err(PolicyError::Probability(format!("{drop_prob}")));
            }
        }
        Ok(())
    }

    /// Exploration branches on injection decisions, which requires
    /// them to be state-determined rather than random.
    pub fn explorable(&self) -> bool {
        !matches!(self, FaultPolicy::Probabilistic { .. })
    }

    pub fn initial_state(&self) -> InjectState {
        match self {
            FaultPolicy::None | FaultPolicy::Probabilistic { .. } => InjectState::Unbounded,
            FaultPolicy::Scheduled { .. } => InjectState::Occurrences { counts: BTreeMap::new() },
            FaultPolicy::Exhaustive { budget, per_message: false, .. } => {
                InjectState::Budget { remaining: *budget }
            }
            FaultPolicy::Exhaustive { per_message: true, .. } => {
                InjectState::PerMessage { used: BTreeMap::new() }
            }
        }
    }

    /// Whether the message at a site is even a candidate under this
    /// policy's kind filters.
    pub fn eligible(&self, message: Option<&Envelope>) -> bool {
        let is_ack = message.map(|m| m.kind == MsgKind::Ack).unwrap_or(false);
        match self {
            FaultPolicy::None => false,
            FaultPolicy::Probabilistic { drop_acks, .. } => *drop_acks || !is_ack,
            FaultPolicy::Scheduled { .. } => true,
            FaultPolicy::Exhaustive { data_only, .. } => !(*data_only && is_ack),
        }
    }

    /// Single-run decision: consumes rng draws and budget state.
    /// `occurrence` is the per-instance opportunity index.
    pub fn decide(
        &self,
        instance: &str,
        occurrence: u64,
        message: Option<&Envelope>,
        state: &mut InjectState,
        rng: &mut Rng,
        step: u64,
    ) -> bool {
        if !self.eligible(message) {
            return false;
        }
        match (self, state) {
            (FaultPolicy::None, _) => false,
            (FaultPolicy::Probabilistic { drop_prob, window, .. }, _) => {
                if let Some(w) = window {
                    if step >= *w {
                        return false;
                    }
                }
                rng.bernoulli(*drop_prob)
            }
            (FaultPolicy::Scheduled { points }, _) => {
                points.iter().any(|(i, k)| i == instance && *k == occurrence)
            }
            (FaultPolicy::Exhaustive { .. }, InjectState::Budget { remaining }) => {
                if *remaining > 0 {
                    *remaining -= 1;
                    true
                } else {
                    false
                }
            }
            (FaultPolicy::Exhaustive { budget, .. }, InjectState::PerMessage { used }) => {
                let Some(key) = message.map(MsgKey::of) else { return false };
                let n = used.entry(key).or_insert(0);
                if *n < *budget {
                    *n += 1;
                    true
                } else {
                    false
                }
            }
            _ => false,
        }
    }

    /// Exploration variant: may the error branch be taken from here?
    /// Returns the successor injection state when it may.
    pub fn branch(
        &self,
        instance: &str,
        occurrence: u64,
        message: Option<&Envelope>,
        state: &InjectState,
    ) -> Option<InjectState> {
        if !self.eligible(message) {
            return None;
        }
        match (self, state) {
            (FaultPolicy::None, _) => None,
            (FaultPolicy::Probabilistic { .. }, _) => None,
            (FaultPolicy::Scheduled { points }, st) => points
                .iter()
                .any(|(i, k)| i == instance && *k == occurrence)
                .then(|| st.clone()),
            (FaultPolicy::Exhaustive { .. }, InjectState::Budget { remaining }) => {
                (*remaining > 0).then(|| InjectState::Budget { remaining: remaining - 1 })
            }
            (FaultPolicy::Exhaustive { budget, .. }, InjectState::PerMessage { used }) => {
                let key = MsgKey::of(message?);
                let n = used.get(&key).copied().unwrap_or(0);
                (n < *budget).then(|| {
                    let mut used = used.clone();
                    used.insert(key, n + 1);
                    InjectState::PerMessage { used }
                })
            }
            _ => None,
        }
    }
}

/// Message identity for per-message budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MsgKey {
    pub src: i64,
    pub dst: i64,
    pub seq: i64,
    pub kind: MsgKind,
}

impl MsgKey {
    pub fn of(m: &Envelope) -> MsgKey {
        MsgKey { src: m.src, dst: m.dst, seq: m.seq, kind: m.kind }
    }
}

/// Injection bookkeeping carried in the global configuration, so
/// exploration distinguishes states with different budgets left.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InjectState {
    Unbounded,
    Budget { remaining: u32 },
    PerMessage { used: BTreeMap<MsgKey, u32> },
    Occurrences { counts: BTreeMap<String, u64> },
}
