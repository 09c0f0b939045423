//! Faults, errors, and failures, and how they relate to the model.
//!
//! A fault is the adjudged cause of an error; an error is the part of
//! system state liable to lead to failure; a failure is the event of
//! delivered service deviating from the specification. Dysfunctions
//! live at either the constituent-system or whole-system level and
//! chain causally: fault to error, error to failure at the same
//! level, and a constituent failure to a system-level fault.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Constituent system.
    Cs,
    /// System of systems.
    Sos,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Cs => write!(f, "CS"),
            Level::Sos => write!(f, "SOS"),
        }
    }
}

/// Whether the dysfunction's presence is bounded in time or
/// continuous from its occurrence onward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Persistence {
    Transient,
    Permanent,
    Unspecified,
}

impl fmt::Display for Persistence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Persistence::Transient => write!(f, "TRANSIENT"),
            Persistence::Permanent => write!(f, "PERMANENT"),
            Persistence::Unspecified => write!(f, "UNSPECIFIED"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DysfunctionKind {
    Fault,
    Error,
    Failure,
}

impl fmt::Display for DysfunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DysfunctionKind::Fault => write!(f, "fault"),
            DysfunctionKind::Error => write!(f, "error"),
            DysfunctionKind::Failure => write!(f, "failure"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dysfunction {
    pub id: String,
    pub name: String,
    pub description: String,
    pub level: Level,
    pub persistence: Persistence,
}

/// Typed relations between dysfunctions and model elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DepEdge {
    /// Dysfunction-to-dysfunction causality.
    Causes { from: String, to: String },
    /// The dysfunction exists within the named contract or composition.
    LocatedIn { dysfunction: String, model: String },
    /// The dysfunction degrades the named contract.
    Affects { dysfunction: String, model: String },
    /// The named contract exhibits the dysfunction.
    ExhibitedBy { dysfunction: String, model: String },
    /// The named contract mitigates the dysfunction.
    MitigatedBy { dysfunction: String, model: String },
}

/// Recorded decision to leave a dysfunction unmitigated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Waiver {
    pub dysfunction: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependabilityModel {
    pub faults: Vec<Dysfunction>,
    pub errors: Vec<Dysfunction>,
    pub failures: Vec<Dysfunction>,
    pub edges: Vec<DepEdge>,
    pub waived: Vec<Waiver>,
}

impl DependabilityModel {
    pub fn all(&self) -> impl Iterator<Item = (&Dysfunction, DysfunctionKind)> {
        self.faults
            .iter()
            .map(|d| (d, DysfunctionKind::Fault))
            .chain(self.errors.iter().map(|d| (d, DysfunctionKind::Error)))
            .chain(self.failures.iter().map(|d| (d, DysfunctionKind::Failure)))
    }

    pub fn kind_of(&self, id: &str) -> Option<DysfunctionKind> {
        self.all().find(|(d, _)| d.id == id).map(|(_, k)| k)
    }

    pub fn dysfunction(&self, id: &str) -> Option<&Dysfunction> {
        self.all().find(|(d, _)| d.id == id).map(|(d, _)| d)
    }

    pub fn is_waived(&self, id: &str) -> bool {
        self.waived.iter().any(|w| w.dysfunction == id)
    }
}
