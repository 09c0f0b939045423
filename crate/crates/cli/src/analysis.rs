//! Cross-view fault-model validation.
//!
//! The dependability section and the contract annotations describe
//! the same dysfunctions from two sides, and each claim must appear
//! on both: a `mitigates` tag needs the matching MITIGATED_BY edge
//! and vice versa, a listed failure mode needs the matching
//! EXHIBITED_BY edge and vice versa, and every system-level fault
//! needs a mitigation or a recorded waiver. Structural checks of the
//! dependability section itself (reference resolution, the causal
//! chain) are included so a clean result means the whole fault story
//! is coherent.

use std::collections::BTreeSet;

use sosc_core::{
    validate_dependability, DepEdge, DependabilityModel, Diagnostic, DysfunctionKind, Level,
    Severity,
};
use sosc_dsl::ModelDocument;

pub mod rules {
    pub const UNMITIGATED_SOS_FAULT: &str = "UNMITIGATED_SOS_FAULT";
    pub const MITIGATES_TAG_MISMATCH: &str = "MITIGATES_TAG_MISMATCH";
    pub const FMCV_FEFDV_INCONSISTENT: &str = "FMCV_FEFDV_INCONSISTENT";
    pub const WAIVED_FAULT: &str = "WAIVED_FAULT";
}

fn diag(
    element: String,
    rule: &'static str,
    severity: Severity,
    message: String,
) -> Diagnostic {
    Diagnostic { element, rule, severity, message }
}

pub fn validate_fault_model(doc: &ModelDocument) -> Vec<Diagnostic> {
    let empty = DependabilityModel::default();
    let d = doc.dependability.as_ref().unwrap_or(&empty);
    let mut out = validate_dependability(d);

    let mitigated: BTreeSet<&str> = d
        .edges
        .iter()
        .filter_map(|e| match e {
            DepEdge::MitigatedBy { dysfunction, .. } => Some(dysfunction.as_str()),
            _ => None,
        })
        .collect();

    // A system-level fault nobody mitigates is one diagnostic; tags
    // naming it are not separately mismatched on top.
    let mut unmitigated: BTreeSet<&str> = BTreeSet::new();
    for f in &d.faults {
        if f.level != Level::Sos || mitigated.contains(f.id.as_str()) {
            continue;
        }
        if let Some(w) = d.waived.iter().find(|w| w.dysfunction == f.id) {
            out.push(diag(
                format!("dependability.{}", f.id),
                rules::WAIVED_FAULT,
                Severity::Warning,
                format!("fault `{}` is deliberately unmitigated: {}", f.id, w.reason),
            ));
        } else {
            unmitigated.insert(f.id.as_str());
            out.push(diag(
                format!("dependability.{}", f.id),
                rules::UNMITIGATED_SOS_FAULT,
                Severity::Error,
                format!("fault `{}` has no MITIGATED_BY edge and no waiver", f.id),
            ));
        }
    }

    // Tag side: `mitigates F` without the edge. Tags naming
    // undeclared dysfunctions are a reference error, not a mismatch.
    for c in &doc.contracts {
        for tag in &c.mitigates {
            if d.kind_of(tag) != Some(DysfunctionKind::Fault)
                || unmitigated.contains(tag.as_str())
            {
                continue;
            }
            let paired = d.edges.iter().any(|e| {
                matches!(e, DepEdge::MitigatedBy { dysfunction, model }
                    if dysfunction == tag && *model == c.name)
            });
            if !paired {
                out.push(diag(
                    format!("{}.mitigates", c.name),
                    rules::MITIGATES_TAG_MISMATCH,
                    Severity::Error,
                    format!(
                        "contract `{}` lists `{tag}` under mitigates, but no MITIGATED_BY edge links `{tag}` to `{}`",
                        c.name, c.name
                    ),
                ));
            }
        }
    }

    // Edge side: MITIGATED_BY pointing at a contract without the
    // tag. Edges naming undeclared dysfunctions are a reference
    // error, not a mismatch.
    for (i, e) in d.edges.iter().enumerate() {
        let DepEdge::MitigatedBy { dysfunction, model } = e else { continue };
        if d.kind_of(dysfunction) != Some(DysfunctionKind::Fault) {
            continue;
        }
        let Some(c) = doc.contract(model) else { continue };
        if !c.mitigates.contains(dysfunction) {
            out.push(diag(
                format!("dependability.edge[{i}]"),
                rules::MITIGATES_TAG_MISMATCH,
                Severity::Error,
                format!(
                    "MITIGATED_BY links `{dysfunction}` to contract `{model}`, but `{model}` does not list `{dysfunction}` under mitigates"
                ),
            ));
        }
    }

    // Listed failure modes need the matching EXHIBITED_BY edge.
    for c in &doc.contracts {
        for fm in &c.failure_modes {
            if d.kind_of(fm) != Some(DysfunctionKind::Failure) {
                continue;
            }
            let paired = d.edges.iter().any(|e| {
                matches!(e, DepEdge::ExhibitedBy { dysfunction, model }
                    if dysfunction == fm && *model == c.name)
            });
            if !paired {
                out.push(diag(
                    format!("{}.failure_modes", c.name),
                    rules::FMCV_FEFDV_INCONSISTENT,
                    Severity::Error,
                    format!(
                        "contract `{}` lists `{fm}` as a failure mode, but no EXHIBITED_BY edge links `{fm}` to `{}`",
                        c.name, c.name
                    ),
                ));
            }
        }
    }

    // The reverse holds for failures only: EXHIBITED_BY edges for
    // errors describe erroneous transitions, not failure modes.
    for (i, e) in d.edges.iter().enumerate() {
        let DepEdge::ExhibitedBy { dysfunction, model } = e else { continue };
        if d.kind_of(dysfunction) != Some(DysfunctionKind::Failure) {
            continue;
        }
        let Some(c) = doc.contract(model) else { continue };
        if !c.failure_modes.contains(dysfunction) {
            out.push(diag(
                format!("dependability.edge[{i}]"),
                rules::FMCV_FEFDV_INCONSISTENT,
                Severity::Error,
                format!(
                    "EXHIBITED_BY links failure `{dysfunction}` to contract `{model}`, but `{model}` does not list it as a failure mode"
                ),
            ));
        }
    }

    out
}
