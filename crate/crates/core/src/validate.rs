//! Structural validation.
//!
//! Checks well-formedness of contracts, compositions, and
//! dependability models, and the references between them when
//! validated together as one document. Diagnostics carry a stable
//! rule identifier so tooling can match on them.

use std::collections::BTreeSet;
use std::fmt;

use crate::composition::{expand_instances, SoSComposition};
use crate::contract::Contract;
use crate::dependability::{DepEdge, DependabilityModel, DysfunctionKind, Level};
use crate::expr::Expr;
use crate::protocol::{Action, Region, StateKind, Trigger};

pub mod rules {
    pub const DUPLICATE_ID: &str = "DUPLICATE_ID";
    pub const NO_INITIAL_STATE: &str = "NO_INITIAL_STATE";
    pub const UNRESOLVED_STATE: &str = "UNRESOLVED_STATE";
    pub const TRANSITION_CROSS_REGION: &str = "TRANSITION_CROSS_REGION";
    pub const UNRESOLVED_IDENTIFIER: &str = "UNRESOLVED_IDENTIFIER";
    pub const UNDECLARED_OPERATION: &str = "UNDECLARED_OPERATION";
    pub const BAD_ARITY: &str = "BAD_ARITY";
    pub const UNRESOLVED_CONTRACT: &str = "UNRESOLVED_CONTRACT";
    pub const UNRESOLVED_ENDPOINT: &str = "UNRESOLVED_ENDPOINT";
    pub const CONST_EVAL: &str = "CONST_EVAL";
    pub const DANGLING_DYSFUNCTION_REF: &str = "DANGLING_DYSFUNCTION_REF";
    pub const CAUSAL_CHAIN_VIOLATION: &str = "CAUSAL_CHAIN_VIOLATION";
    pub const UNRESOLVED_MODEL_REF: &str = "UNRESOLVED_MODEL_REF";
    pub const EMPTY_LABEL_SET: &str = "EMPTY_LABEL_SET";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "warning"),
            Severity::Error => write!(f, "error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Dotted path of the offending element, e.g. `TL_Faulty.protocol`.
    pub element: String,
    pub rule: &'static str,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(element: impl Into<String>, rule: &'static str, message: impl Into<String>) -> Diagnostic {
        Diagnostic { element: element.into(), rule, severity: Severity::Error, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}[{}]: {}", self.element, self.severity, self.rule, self.message)
    }
}

/// Validates one contract in isolation: name scoping of every
/// expression, machine structure, operation references.
pub fn validate_contract(c: &Contract) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let el = |suffix: &str| {
        if suffix.is_empty() { c.name.clone() } else { format!("{}.{}", c.name, suffix) }
    };

    check_unique(c.params.iter().map(|p| p.name.as_str()), &el("params"), &mut out);
    check_unique(c.state_vars.iter().map(|v| v.name.as_str()), &el("vars"), &mut out);
    check_unique(c.operations.iter().map(|o| o.name.as_str()), &el("ops"), &mut out);

    let params: BTreeSet<&str> = c.params.iter().map(|p| p.name.as_str()).collect();

    // Initial-value expressions see parameters and earlier variables.
    let mut seen: BTreeSet<&str> = params.clone();
    for v in c.state_vars.iter().chain(c.protocol.local_vars.iter()) {
        check_scope(&v.init, &seen, &el(&format!("var.{}", v.name)), &mut out);
        seen.insert(v.name.as_str());
    }

    // `seen` now holds params plus every variable.
    let full_scope = seen;
    for (i, inv) in c.invariants.iter().enumerate() {
        check_scope(inv, &full_scope, &el(&format!("invariant[{i}]")), &mut out);
    }

    for op in &c.operations {
        let mut op_scope = full_scope.clone();
        for a in &op.args {
            op_scope.insert(a.name.as_str());
        }
        if let Some(pre) = &op.pre {
            check_scope(pre, &op_scope, &el(&format!("op.{}.pre", op.name)), &mut out);
        }
        if let Some(post) = &op.post {
            // Primed state variables name the post-state.
            let primed: Vec<String> =
                c.state_vars.iter().map(|v| format!("{}'", v.name)).collect();
            let mut post_scope = op_scope.clone();
            for p in &primed {
                post_scope.insert(p.as_str());
            }
            check_scope(post, &post_scope, &el(&format!("op.{}.post", op.name)), &mut out);
        }
    }

    validate_region(c, &c.protocol.root, &el("protocol"), &full_scope, &mut out);
    out
}

fn validate_region(
    c: &Contract,
    region: &Region,
    element: &str,
    scope: &BTreeSet<&str>,
    out: &mut Vec<Diagnostic>,
) {
    check_unique(region.states.iter().map(|s| s.name.as_str()), element, out);

    if region.states.is_empty() {
        if region.initial.is_some() {
            out.push(Diagnostic::error(
                element,
                rules::UNRESOLVED_STATE,
                "initial state named in a region with no states",
            ));
        }
    } else {
        match &region.initial {
            None => out.push(Diagnostic::error(
                element,
                rules::NO_INITIAL_STATE,
                "non-empty region has no initial state",
            )),
            Some(init) if region.state(init).is_none() => out.push(Diagnostic::error(
                element,
                rules::UNRESOLVED_STATE,
                format!("initial state `{init}` is not declared in this region"),
            )),
            Some(_) => {}
        }
    }

    let names: BTreeSet<&str> = region.states.iter().map(|s| s.name.as_str()).collect();
    for (i, t) in region.transitions.iter().enumerate() {
        let tel = format!("{element}.trans[{i}]");
        for (role, name) in [("source", &t.source), ("target", &t.target)] {
            if !names.contains(name.as_str()) {
                out.push(Diagnostic::error(
                    &tel,
                    rules::TRANSITION_CROSS_REGION,
                    format!("{role} state `{name}` is not a sibling state of this region"),
                ));
            }
        }
        let mut tscope = scope.clone();
        if let Trigger::On { bind: Some(b), .. } = &t.trigger {
            tscope.insert(b.as_str());
        }
        if let Some(g) = &t.guard {
            check_scope(g, &tscope, &format!("{tel}.guard"), out);
        }
        for (k, a) in t.actions.iter().enumerate() {
            let ael = format!("{tel}.action[{k}]");
            match a {
                Action::Assign { var, value } => {
                    if !scope.contains(var.as_str()) {
                        out.push(Diagnostic::error(
                            &ael,
                            rules::UNRESOLVED_IDENTIFIER,
                            format!("assignment target `{var}` is not a declared variable"),
                        ));
                    }
                    check_scope(value, &tscope, &ael, out);
                }
                Action::Invoke { op, args } => match c.operation(op) {
                    None => out.push(Diagnostic::error(
                        &ael,
                        rules::UNDECLARED_OPERATION,
                        format!("operation `{op}` is not declared by this contract"),
                    )),
                    Some(sig) => {
                        if sig.args.len() != args.len() {
                            out.push(Diagnostic::error(
                                &ael,
                                rules::BAD_ARITY,
                                format!(
                                    "operation `{op}` takes {} arguments, {} given",
                                    sig.args.len(),
                                    args.len()
                                ),
                            ));
                        }
                        for arg in args {
                            check_scope(arg, &tscope, &ael, out);
                        }
                    }
                },
                Action::Emit { payload, .. } => {
                    if let Some(p) = payload {
                        check_scope(p, &tscope, &ael, out);
                    }
                }
                Action::Broadcast { payload, .. } => check_scope(payload, &tscope, &ael, out),
            }
        }
    }

    for s in &region.states {
        match &s.kind {
            StateKind::Simple => {}
            StateKind::Composite(r) => {
                validate_region(c, r, &format!("{element}.{}", s.name), scope, out)
            }
            StateKind::Parallel(rs) => {
                if rs.len() < 2 {
                    out.push(Diagnostic::error(
                        format!("{element}.{}", s.name),
                        rules::UNRESOLVED_STATE,
                        "parallel state needs at least two regions",
                    ));
                }
                for (i, r) in rs.iter().enumerate() {
                    let tag = r
                        .name
                        .clone()
                        .unwrap_or_else(|| format!("region[{i}]"));
                    validate_region(c, r, &format!("{element}.{}.{tag}", s.name), scope, out);
                }
            }
        }
    }
}

/// Validates a composition against the contracts it instantiates.
pub fn validate_composition(comp: &SoSComposition, contracts: &[Contract]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let el = |suffix: &str| format!("{}.{}", comp.name, suffix);

    for decl in &comp.instances {
        let Some(c) = contracts.iter().find(|c| c.name == decl.contract) else {
            out.push(Diagnostic::error(
                el(&decl.name),
                rules::UNRESOLVED_CONTRACT,
                format!("contract `{}` is not defined", decl.contract),
            ));
            continue;
        };
        if c.params.len() != decl.actuals.len() {
            out.push(Diagnostic::error(
                el(&decl.name),
                rules::BAD_ARITY,
                format!(
                    "contract `{}` takes {} parameters, {} given",
                    c.name,
                    c.params.len(),
                    decl.actuals.len()
                ),
            ));
        }
    }

    match expand_instances(comp) {
        Err(e) => out.push(Diagnostic::error(comp.name.clone(), rules::CONST_EVAL, e.to_string())),
        Ok(resolved) => {
            check_unique(resolved.iter().map(|r| r.id.as_str()), &comp.name, &mut out);
            let ids: BTreeSet<&str> = resolved.iter().map(|r| r.id.as_str()).collect();
            for (i, conn) in comp.connections.iter().enumerate() {
                let cel = el(&format!("connect[{i}]"));
                for ep in [&conn.from, &conn.to] {
                    if !ids.contains(ep.instance.as_str()) {
                        out.push(Diagnostic::error(
                            &cel,
                            rules::UNRESOLVED_ENDPOINT,
                            format!("endpoint `{}.{}` names no instance", ep.instance, ep.port),
                        ));
                    }
                }
                if conn.labels.is_empty() {
                    out.push(Diagnostic::error(
                        &cel,
                        rules::EMPTY_LABEL_SET,
                        "connection carries no labels",
                    ));
                }
            }
        }
    }
    out
}

/// Validates a dependability model in isolation: identifier
/// uniqueness, reference resolution of dysfunction ids, and the
/// causal chain discipline.
pub fn validate_dependability(d: &DependabilityModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_unique(d.all().map(|(dy, _)| dy.id.as_str()), "dependability", &mut out);

    let check_ref = |id: &str, ctx: &str, out: &mut Vec<Diagnostic>| {
        if d.kind_of(id).is_none() {
            out.push(Diagnostic::error(
                format!("dependability.{ctx}"),
                rules::DANGLING_DYSFUNCTION_REF,
                format!("`{id}` is not a declared fault, error, or failure"),
            ));
        }
    };

    for (i, e) in d.edges.iter().enumerate() {
        match e {
            DepEdge::Causes { from, to } => {
                let ctx = format!("causes[{i}]");
                check_ref(from, &ctx, &mut out);
                check_ref(to, &ctx, &mut out);
                if let (Some(fk), Some(tk)) = (d.kind_of(from), d.kind_of(to)) {
                    let fl = d.dysfunction(from).map(|x| x.level);
                    let tl = d.dysfunction(to).map(|x| x.level);
                    let ok = match (fk, tk) {
                        (DysfunctionKind::Fault, DysfunctionKind::Error) => fl == tl,
                        (DysfunctionKind::Error, DysfunctionKind::Failure) => fl == tl,
                        (DysfunctionKind::Failure, DysfunctionKind::Fault) => {
                            fl == Some(Level::Cs) && tl == Some(Level::Sos)
                        }
                        _ => false,
                    };
                    if !ok {
                        out.push(Diagnostic::error(
                            format!("dependability.{ctx}"),
                            rules::CAUSAL_CHAIN_VIOLATION,
                            format!(
                                "`{from}` ({fk}, {}) may not cause `{to}` ({tk}, {}): the chain runs fault->error, error->failure at one level, and CS failure->SOS fault",
                                fl.map(|l| l.to_string()).unwrap_or_default(),
                                tl.map(|l| l.to_string()).unwrap_or_default(),
                            ),
                        ));
                    }
                }
            }
            DepEdge::LocatedIn { dysfunction, .. }
            | DepEdge::Affects { dysfunction, .. }
            | DepEdge::ExhibitedBy { dysfunction, .. }
            | DepEdge::MitigatedBy { dysfunction, .. } => {
                check_ref(dysfunction, &format!("edge[{i}]"), &mut out);
            }
        }
    }
    for (i, w) in d.waived.iter().enumerate() {
        check_ref(&w.dysfunction, &format!("waived[{i}]"), &mut out);
    }
    out
}

/// Validates a set of models as one document: every model
/// individually, plus the references between views. Contract
/// `failure_modes` and `mitigates` entries must name declared
/// dysfunctions, and dependability edges must point at declared
/// contracts or compositions.
pub fn validate_document(
    contracts: &[Contract],
    compositions: &[SoSComposition],
    dep: Option<&DependabilityModel>,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_unique(
        contracts
            .iter()
            .map(|c| c.name.as_str())
            .chain(compositions.iter().map(|s| s.name.as_str())),
        "document",
        &mut out,
    );

    for c in contracts {
        out.extend(validate_contract(c));
    }
    for s in compositions {
        out.extend(validate_composition(s, contracts));
    }
    if let Some(d) = dep {
        out.extend(validate_dependability(d));
    }

    let empty = DependabilityModel::default();
    let d = dep.unwrap_or(&empty);

    for c in contracts {
        for f in &c.failure_modes {
            if !matches!(d.kind_of(f), Some(DysfunctionKind::Failure)) {
                out.push(Diagnostic::error(
                    format!("{}.failure_modes", c.name),
                    rules::DANGLING_DYSFUNCTION_REF,
                    format!("`{f}` is not a declared failure"),
                ));
            }
        }
        for m in &c.mitigates {
            if !matches!(d.kind_of(m), Some(DysfunctionKind::Fault)) {
                out.push(Diagnostic::error(
                    format!("{}.mitigates", c.name),
                    rules::DANGLING_DYSFUNCTION_REF,
                    format!("`{m}` is not a declared fault"),
                ));
            }
        }
    }

    if dep.is_some() {
        let models: BTreeSet<&str> = contracts
            .iter()
            .map(|c| c.name.as_str())
            .chain(compositions.iter().map(|s| s.name.as_str()))
            .collect();
        for (i, e) in d.edges.iter().enumerate() {
            let model = match e {
                DepEdge::Causes { .. } => None,
                DepEdge::LocatedIn { model, .. }
                | DepEdge::Affects { model, .. }
                | DepEdge::ExhibitedBy { model, .. }
                | DepEdge::MitigatedBy { model, .. } => Some(model),
            };
            if let Some(m) = model {
                if !models.contains(m.as_str()) {
                    out.push(Diagnostic::error(
                        format!("dependability.edge[{i}]"),
                        rules::UNRESOLVED_MODEL_REF,
                        format!("`{m}` names no contract or composition in this document"),
                    ));
                }
            }
        }
    }
    out
}

fn check_scope(expr: &Expr, scope: &BTreeSet<&str>, element: &str, out: &mut Vec<Diagnostic>) {
    for v in expr.free_vars() {
        if !scope.contains(v) {
            out.push(Diagnostic::error(
                element,
                rules::UNRESOLVED_IDENTIFIER,
                format!("`{v}` is not in scope here"),
            ));
        }
    }
}

fn check_unique<'a>(
    names: impl Iterator<Item = &'a str>,
    element: &str,
    out: &mut Vec<Diagnostic>,
) {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            out.push(Diagnostic::error(
                element,
                rules::DUPLICATE_ID,
                format!("`{n}` is declared more than once"),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::{Connection, Endpoint, InstanceDecl};
    use crate::contract::Param;
    use crate::dependability::{Dysfunction, Persistence};
    use crate::expr::{BinOp, Expr};
    use crate::protocol::SemType;

    #[test]
    fn clean_contract_has_no_diagnostics() {
        let mut c = Contract::new("C");
        c.params.push(Param { name: "myId".into(), ty: SemType::Int });
        c.invariants.push(Expr::bin(BinOp::Ge, Expr::var("myId"), Expr::int(1)));
        assert!(validate_contract(&c).is_empty());
    }

    #[test]
    fn unresolved_identifier_in_invariant() {
        let mut c = Contract::new("C");
        c.invariants.push(Expr::var("ghost"));
        let ds = validate_contract(&c);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].rule, rules::UNRESOLVED_IDENTIFIER);
    }

    #[test]
    fn unresolved_connection_endpoint() {
        let comp = SoSComposition {
            name: "S".into(),
            instances: vec![InstanceDecl {
                name: "a".into(),
                contract: "C".into(),
                actuals: vec![],
                multiplicity: 1,
            }],
            connections: vec![Connection {
                from: Endpoint { instance: "a".into(), port: "p".into() },
                to: Endpoint { instance: "ghost".into(), port: "q".into() },
                labels: vec!["l".into()],
            }],
        };
        let ds = validate_composition(&comp, &[Contract::new("C")]);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].rule, rules::UNRESOLVED_ENDPOINT);
    }

    #[test]
    fn causal_chain_rejects_sos_failure_to_fault() {
        let d = DependabilityModel {
            faults: vec![Dysfunction {
                id: "F".into(),
                name: "f".into(),
                description: String::new(),
                level: Level::Sos,
                persistence: Persistence::Unspecified,
            }],
            errors: vec![],
            failures: vec![Dysfunction {
                id: "X".into(),
                name: "x".into(),
                description: String::new(),
                level: Level::Sos,
                persistence: Persistence::Unspecified,
            }],
            edges: vec![DepEdge::Causes { from: "X".into(), to: "F".into() }],
            waived: vec![],
        };
        let ds = validate_dependability(&d);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].rule, rules::CAUSAL_CHAIN_VIOLATION);
    }

    #[test]
    fn mitigates_requires_declared_fault_even_without_model() {
        let mut c = Contract::new("C");
        c.mitigates.push("UnknownFault".into());
        let ds = validate_document(&[c], &[], None);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].rule, rules::DANGLING_DYSFUNCTION_REF);
    }
}
