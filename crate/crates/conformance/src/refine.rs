//! Refinement as bounded trace inclusion.
//!
//! A subject refines a contract at a depth when every visible trace
//! the subject can produce, translated through a label map, is also a
//! trace of the contract. Both sides are enumerated with injection
//! enabled: refinement judges everything a model can do, injected
//! behaviour included, which is what makes the relation reflexive for
//! faulty models.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use sosc_core::Contract;

use crate::traces::{contract_traces, TraceError, TraceOptions, TraceSet};

/// How one subject label shows up on the contract side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapEntry {
    To(String),
    Hide,
}

/// Subject-to-contract label translation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelMap {
    /// Identity on labels both alphabets share; hides the rest.
    #[default]
    SharedIdentity,
    /// Explicit table; must cover the whole subject alphabet, and
    /// every renaming target must lie in the contract alphabet.
    Table(BTreeMap<String, MapEntry>),
}

impl LabelMap {
    /// Checks coverage and targets up front so a verdict never rests
    /// on a half-usable table.
    fn validate(&self, subject: &TraceSet, contract: &TraceSet) -> Result<(), RefineError> {
        let LabelMap::Table(table) = self else { return Ok(()) };
        for label in &subject.alphabet {
            match table.get(label) {
                None => return Err(RefineError::UnmappedLabel(label.clone())),
                Some(MapEntry::To(target)) if !contract.alphabet.contains(target) => {
                    return Err(RefineError::TargetOutsideAlphabet {
                        label: label.clone(),
                        target: target.clone(),
                    });
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    fn apply(&self, trace: &[String], contract: &TraceSet) -> Vec<String> {
        let mut out = Vec::with_capacity(trace.len());
        for label in trace {
            match self {
                LabelMap::SharedIdentity => {
                    if contract.alphabet.contains(label) {
                        out.push(label.clone());
                    }
                }
                LabelMap::Table(table) => match &table[label] {
                    MapEntry::To(target) => out.push(target.clone()),
                    MapEntry::Hide => {}
                },
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Conforms,
    Violates,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Conforms => "CONFORMS",
            Verdict::Violates => "VIOLATES",
        }
    }
}

/// Outcome of one refinement check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConformanceReport {
    pub subject: String,
    pub contract: String,
    pub depth: u32,
    pub verdict: Verdict,
    /// Shortest subject trace whose translation the contract cannot
    /// produce; present exactly when the verdict is `Violates`.
    pub witness: Option<Vec<String>>,
}

impl ConformanceReport {
    /// Single JSON object with fixed key order.
    pub fn to_json(&self) -> String {
        let quote = |s: &str| serde_json::to_string(s).expect("string encodes");
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"subject\":{},\"contract\":{},\"depth\":{},\"verdict\":\"{}\"",
            quote(&self.subject),
            quote(&self.contract),
            self.depth,
            self.verdict.name(),
        );
        if let Some(w) = &self.witness {
            let labels: Vec<String> = w.iter().map(|l| quote(l)).collect();
            let _ = write!(out, ",\"witness\":[{}]", labels.join(","));
        }
        out.push('}');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("ALPHABET_MISMATCH: no table entry for subject label `{0}`")]
    UnmappedLabel(String),
    #[error("ALPHABET_MISMATCH: subject label `{label}` maps to `{target}`, which is outside the contract alphabet")]
    TargetOutsideAlphabet { label: String, target: String },
    #[error("subject and contract sets were computed at depths {subject} and {contract}")]
    DepthMismatch { subject: u32, contract: u32 },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Inclusion check over already-computed sets. The witness is the
/// shortest offending subject trace, ties broken lexicographically.
pub fn refines_sets(
    subject_name: &str,
    subject: &TraceSet,
    contract_name: &str,
    contract: &TraceSet,
    map: &LabelMap,
) -> Result<ConformanceReport, RefineError> {
    if subject.depth != contract.depth {
        return Err(RefineError::DepthMismatch {
            subject: subject.depth,
            contract: contract.depth,
        });
    }
    map.validate(subject, contract)?;

    let mut witness: Option<&Vec<String>> = None;
    for trace in &subject.traces {
        if contract.traces.contains(&map.apply(trace, contract)) {
            continue;
        }
        let better = match witness {
            None => true,
            Some(w) => (trace.len(), trace) < (w.len(), w),
        };
        if better {
            witness = Some(trace);
        }
    }

    Ok(ConformanceReport {
        subject: subject_name.to_string(),
        contract: contract_name.to_string(),
        depth: subject.depth,
        verdict: if witness.is_some() { Verdict::Violates } else { Verdict::Conforms },
        witness: witness.cloned(),
    })
}

/// Refinement between two contract machines with an explicit map.
pub fn refines_with(
    subject: &Contract,
    contract: &Contract,
    depth: u32,
    map: &LabelMap,
) -> Result<ConformanceReport, RefineError> {
    let opts = TraceOptions { injection: true, ..TraceOptions::default() };
    let s = contract_traces(subject, depth, &opts)?;
    let c = contract_traces(contract, depth, &opts)?;
    refines_sets(&subject.name, &s, &contract.name, &c, map)
}

/// Refinement between two contract machines under the default map.
pub fn refines(
    subject: &Contract,
    contract: &Contract,
    depth: u32,
) -> Result<ConformanceReport, RefineError> {
    refines_with(subject, contract, depth, &LabelMap::SharedIdentity)
}
