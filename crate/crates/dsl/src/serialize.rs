//! Canonical text form. Two-space indentation, declaration order
//! preserved, grouped per kind. Reparsing the output yields the same
//! document, and serializing again yields identical bytes.

use std::fmt::Write;

use sosc_core::{
    Action, BinOp, Contract, DepEdge, DependabilityModel, Dysfunction, DysfunctionKind, Expr,
    Persistence, ProtocolStateMachine, Region, SoSComposition, State, StateKind, Stereotype,
    Transition, Trigger, UnOp, Value, Visibility,
};

use crate::ModelDocument;

pub fn serialize_document(doc: &ModelDocument) -> String {
    let mut blocks = Vec::new();
    for c in &doc.contracts {
        blocks.push(contract_block(c));
    }
    for s in &doc.compositions {
        blocks.push(composition_block(s));
    }
    if let Some(d) = &doc.dependability {
        blocks.push(dependability_block(d));
    }
    let mut out = blocks.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

fn contract_block(c: &Contract) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "contract {} {{", c.name);
    for p in &c.params {
        let _ = writeln!(s, "  param {}: {};", p.name, p.ty.name());
    }
    for v in &c.state_vars {
        let _ = writeln!(s, "  var {}: {} := {};", v.name, v.ty.name(), expr_to_string(&v.init));
    }
    for op in &c.operations {
        let args: Vec<String> =
            op.args.iter().map(|a| format!("{}: {}", a.name, a.ty.name())).collect();
        let _ = write!(s, "  op {}({})", op.name, args.join(", "));
        if let Some(pre) = &op.pre {
            let _ = write!(s, " pre {}", expr_to_string(pre));
        }
        if let Some(post) = &op.post {
            let _ = write!(s, " post {}", expr_to_string(post));
        }
        s.push_str(";\n");
    }
    for inv in &c.invariants {
        let _ = writeln!(s, "  invariant {};", expr_to_string(inv));
    }
    if !c.failure_modes.is_empty() {
        let _ = writeln!(s, "  failure_modes {};", c.failure_modes.join(", "));
    }
    if !c.mitigates.is_empty() {
        let _ = writeln!(s, "  mitigates {};", c.mitigates.join(", "));
    }
    if !is_inert(&c.protocol) {
        machine(&mut s, &c.protocol);
    }
    s.push_str("}\n");
    s
}

fn is_inert(m: &ProtocolStateMachine) -> bool {
    m.local_vars.is_empty()
        && m.root.states.is_empty()
        && m.root.transitions.is_empty()
        && m.root.initial.is_none()
        && !m.deterministic
}

fn machine(s: &mut String, m: &ProtocolStateMachine) {
    let head = if m.deterministic { "  protocol deterministic {" } else { "  protocol {" };
    let _ = writeln!(s, "{head}");
    for v in &m.local_vars {
        let _ = writeln!(s, "    var {}: {} := {};", v.name, v.ty.name(), expr_to_string(&v.init));
    }
    region_items(s, &m.root, 2);
    s.push_str("  }\n");
}

fn indent(s: &mut String, depth: usize) {
    for _ in 0..depth {
        s.push_str("  ");
    }
}

fn region_items(s: &mut String, r: &Region, depth: usize) {
    if let Some(init) = &r.initial {
        indent(s, depth);
        let _ = writeln!(s, "initial state {init};");
    }
    for st in &r.states {
        state(s, st, depth);
    }
    for t in &r.transitions {
        transition(s, t, depth);
    }
}

fn state(s: &mut String, st: &State, depth: usize) {
    indent(s, depth);
    match &st.kind {
        StateKind::Simple => {
            let _ = writeln!(s, "state {};", st.name);
        }
        StateKind::Composite(r) => {
            let _ = writeln!(s, "state {} {{", st.name);
            region_items(s, r, depth + 1);
            indent(s, depth);
            s.push_str("}\n");
        }
        StateKind::Parallel(rs) => {
            let _ = writeln!(s, "state {} parallel {{", st.name);
            for r in rs {
                indent(s, depth + 1);
                match &r.name {
                    Some(n) => {
                        let _ = writeln!(s, "region {n} {{");
                    }
                    None => s.push_str("region {\n"),
                }
                region_items(s, r, depth + 2);
                indent(s, depth + 1);
                s.push_str("}\n");
            }
            indent(s, depth);
            s.push_str("}\n");
        }
    }
}

fn transition(s: &mut String, t: &Transition, depth: usize) {
    indent(s, depth);
    let _ = write!(s, "trans {} -> {}", t.source, t.target);
    match &t.trigger {
        Trigger::Completion => {}
        Trigger::On { label, bind } => {
            let _ = write!(s, " on {label}");
            if let Some(b) = bind {
                let _ = write!(s, "({b})");
            }
        }
        Trigger::After { timeout } => {
            let _ = write!(s, " after {timeout}");
        }
    }
    if let Some(g) = &t.guard {
        let _ = write!(s, " [{}]", expr_to_string(g));
    }
    if !t.actions.is_empty() {
        let parts: Vec<String> = t.actions.iter().map(action).collect();
        let _ = write!(s, " / {}", parts.join(", "));
    }
    if let Some(e) = &t.event {
        let _ = write!(s, " as {e}");
    }
    if t.stereotype == Stereotype::Error {
        s.push_str(" error");
    }
    if t.visibility == Visibility::Internal {
        s.push_str(" internal");
    }
    s.push_str(";\n");
}

fn action(a: &Action) -> String {
    match a {
        Action::Assign { var, value } => format!("{var} := {}", expr_to_string(value)),
        Action::Invoke { op, args } => {
            let parts: Vec<String> = args.iter().map(expr_to_string).collect();
            format!("{op}({})", parts.join(", "))
        }
        Action::Emit { label, payload: None } => format!("emit {label}"),
        Action::Emit { label, payload: Some(p) } => format!("emit {label}({})", expr_to_string(p)),
        Action::Broadcast { label, payload } => {
            format!("bcast {label}({})", expr_to_string(payload))
        }
    }
}

fn composition_block(c: &SoSComposition) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "sos {} {{", c.name);
    for d in &c.instances {
        let parts: Vec<String> = d.actuals.iter().map(expr_to_string).collect();
        let _ = write!(s, "  instance {}: {}({})", d.name, d.contract, parts.join(", "));
        if d.multiplicity > 1 {
            let _ = write!(s, " * {}", d.multiplicity);
        }
        s.push_str(";\n");
    }
    for conn in &c.connections {
        let _ = writeln!(
            s,
            "  connect {}.{} -> {}.{} : {{ {} }};",
            conn.from.instance,
            conn.from.port,
            conn.to.instance,
            conn.to.port,
            conn.labels.join(", ")
        );
    }
    s.push_str("}\n");
    s
}

fn dependability_block(d: &DependabilityModel) -> String {
    let mut s = String::new();
    s.push_str("dependability {\n");
    for (dy, kind) in d.all() {
        dysfunction(&mut s, dy, kind);
    }
    for e in &d.edges {
        match e {
            DepEdge::Causes { from, to } => {
                let _ = writeln!(s, "  causes {from} -> {to};");
            }
            DepEdge::LocatedIn { dysfunction, model } => {
                let _ = writeln!(s, "  located_in {dysfunction} in {model};");
            }
            DepEdge::Affects { dysfunction, model } => {
                let _ = writeln!(s, "  affects {dysfunction} -> {model};");
            }
            DepEdge::ExhibitedBy { dysfunction, model } => {
                let _ = writeln!(s, "  exhibited_by {dysfunction} -> {model};");
            }
            DepEdge::MitigatedBy { dysfunction, model } => {
                let _ = writeln!(s, "  mitigated_by {dysfunction} -> {model};");
            }
        }
    }
    for w in &d.waived {
        let _ = writeln!(s, "  waived {} \"{}\";", w.dysfunction, escape(&w.reason));
    }
    s.push_str("}\n");
    s
}

fn dysfunction(s: &mut String, d: &Dysfunction, kind: DysfunctionKind) {
    let kw = match kind {
        DysfunctionKind::Fault => "fault",
        DysfunctionKind::Error => "error",
        DysfunctionKind::Failure => "failure",
    };
    let _ = write!(s, "  {kw} {} level={}", d.id, d.level);
    if d.persistence != Persistence::Unspecified {
        let _ = write!(s, " persistence={}", d.persistence);
    }
    if !d.name.is_empty() {
        let _ = write!(s, " name=\"{}\"", escape(&d.name));
    }
    if !d.description.is_empty() {
        let _ = write!(s, " desc=\"{}\"", escape(&d.description));
    }
    s.push_str(";\n");
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

fn prec_of(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
        BinOp::Add | BinOp::Sub => 4,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_expr(s: &mut String, e: &Expr, required: u8) {
    let prec = match e {
        Expr::Lit(Value::Int(n)) if *n < 0 => 6,
        Expr::Lit(_) | Expr::Var(_) | Expr::Call(..) => 8,
        Expr::Field(..) => 7,
        Expr::Un(..) => 6,
        Expr::Bin(op, ..) => prec_of(*op),
    };
    let parens = prec < required;
    if parens {
        s.push('(');
    }
    match e {
        Expr::Lit(Value::Unit) => s.push_str("none"),
        Expr::Lit(Value::Bool(b)) => s.push_str(if *b { "true" } else { "false" }),
        Expr::Lit(Value::Int(n)) => {
            let _ = write!(s, "{n}");
        }
        Expr::Lit(Value::Sym(sym)) => {
            debug_assert!(sym == "DATA" || sym == "ACK");
            s.push_str(sym);
        }
        Expr::Lit(Value::Msg(_)) => {
            unreachable!("message values have no source form")
        }
        Expr::Var(n) => s.push_str(n),
        Expr::Field(b, f) => {
            write_expr(s, b, 7);
            s.push('.');
            s.push_str(f.name());
        }
        Expr::Un(op, c) => {
            s.push_str(match op {
                UnOp::Not => "!",
                UnOp::Neg => "-",
            });
            write_expr(s, c, 6);
        }
        Expr::Bin(op, l, r) => {
            let p = prec_of(*op);
            // Comparisons do not chain; both sides are parenthesized
            // at the next level. Other operators associate left.
            let (lp, rp) = if p == 3 { (4, 4) } else { (p, p + 1) };
            write_expr(s, l, lp);
            let _ = write!(s, " {} ", op.symbol());
            write_expr(s, r, rp);
        }
        Expr::Call(b, args) => {
            s.push_str(b.name());
            s.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_expr(s, a, 0);
            }
            s.push(')');
        }
    }
    if parens {
        s.push(')');
    }
}
