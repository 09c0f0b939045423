//! Guard and action expressions.
//!
//! The language is deliberately small: booleans, machine integers,
//! symbolic constants, message values, equality/ordering, checked
//! arithmetic, and a fixed set of builtins. Every expression either
//! evaluates to a value or fails with a typed error; there is no
//! implicit coercion.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Direction-agnostic message framing. `Data` carries a payload end to
/// end, `Ack` confirms receipt of a sequence number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MsgKind {
    Data,
    Ack,
}

impl fmt::Display for MsgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MsgKind::Data => write!(f, "DATA"),
            MsgKind::Ack => write!(f, "ACK"),
        }
    }
}

/// A message in transit. `src` and `dst` are device identities, `seq`
/// numbers the (src, dst, kind) stream.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Envelope {
    pub src: i64,
    pub dst: i64,
    pub seq: i64,
    pub kind: MsgKind,
    pub payload: Box<Value>,
}

/// Runtime values. `Sym` covers enumeration-like constants, `Unit` is
/// the payload of pure signals and the initial content of message vars.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Sym(String),
    Msg(Envelope),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Unit => "unit",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Sym(_) => "sym",
            Value::Msg(_) => "msg",
        }
    }

    pub fn as_bool(&self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(EvalError::Type { expected: "bool", got: other.type_name() }),
        }
    }

    pub fn as_int(&self) -> Result<i64, EvalError> {
        match self {
            Value::Int(i) => Ok(*i),
            other => Err(EvalError::Type { expected: "int", got: other.type_name() }),
        }
    }

    pub fn as_msg(&self) -> Result<&Envelope, EvalError> {
        match self {
            Value::Msg(e) => Ok(e),
            other => Err(EvalError::Type { expected: "msg", got: other.type_name() }),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "none"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Msg(e) => write!(
                f,
                "msg(src={}, dst={}, seq={}, kind={}, payload={})",
                e.src, e.dst, e.seq, e.kind, e.payload
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }
}

/// Message field projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Src,
    Dst,
    Seq,
    Kind,
    Payload,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Src => "src",
            Field::Dst => "dst",
            Field::Seq => "seq",
            Field::Kind => "kind",
            Field::Payload => "payload",
        }
    }

    pub fn parse(name: &str) -> Option<Field> {
        Some(match name {
            "src" => Field::Src,
            "dst" => Field::Dst,
            "seq" => Field::Seq,
            "kind" => Field::Kind,
            "payload" => Field::Payload,
            _ => return None,
        })
    }
}

/// Builtin functions with fixed arity.
///
/// `data` and `ack` construct envelopes; the sending identity is taken
/// from the `myId` binding of the evaluating scope, so only contracts
/// parameterised by `myId` can construct messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Max,
    Min,
    /// data(dst, seq, payload) -> msg
    Data,
    /// ack(dst, seq) -> msg
    Ack,
    /// hasbit(mask, i) -> bool
    HasBit,
    /// setbit(mask, i) -> int
    SetBit,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Max => "max",
            Builtin::Min => "min",
            Builtin::Data => "data",
            Builtin::Ack => "ack",
            Builtin::HasBit => "hasbit",
            Builtin::SetBit => "setbit",
        }
    }

    pub fn parse(name: &str) -> Option<Builtin> {
        Some(match name {
            "max" => Builtin::Max,
            "min" => Builtin::Min,
            "data" => Builtin::Data,
            "ack" => Builtin::Ack,
            "hasbit" => Builtin::HasBit,
            "setbit" => Builtin::SetBit,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Max | Builtin::Min => 2,
            Builtin::Data => 3,
            Builtin::Ack => 2,
            Builtin::HasBit | Builtin::SetBit => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Value),
    Var(String),
    Field(Box<Expr>, Field),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Lit(Value::Int(v))
    }

    pub fn bool(v: bool) -> Expr {
        Expr::Lit(Value::Bool(v))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn field(e: Expr, f: Field) -> Expr {
        Expr::Field(Box::new(e), f)
    }

    pub fn call(b: Builtin, args: Vec<Expr>) -> Expr {
        Expr::Call(b, args)
    }

    /// Free identifiers, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(n) => {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
            Expr::Field(e, _) | Expr::Un(_, e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Call(b, args) => {
                // Envelope constructors implicitly read the sender identity.
                if matches!(b, Builtin::Data | Builtin::Ack) && !out.contains(&"myId") {
                    out.push("myId");
                }
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown identifier `{0}`")]
    UnknownVar(String),
    #[error("expected {expected}, got {got}")]
    Type { expected: &'static str, got: &'static str },
    #[error("arithmetic overflow or division by zero")]
    Arith,
    #[error("`{0}` expects {1} arguments, got {2}")]
    Arity(&'static str, usize, usize),
    #[error("bit index {0} out of range 0..63")]
    BitRange(i64),
    #[error("message constructor used without a `myId` binding in scope")]
    MissingSelfId,
}

/// Read-only view of the identifiers visible to an expression:
/// instance parameters, machine variables, and an optional trigger
/// payload binding. Later layers shadow earlier ones.
#[derive(Debug, Clone, Copy)]
pub struct Scope<'a> {
    pub params: &'a BTreeMap<String, Value>,
    pub vars: &'a BTreeMap<String, Value>,
    pub bound: Option<(&'a str, &'a Value)>,
}

impl<'a> Scope<'a> {
    pub fn new(params: &'a BTreeMap<String, Value>, vars: &'a BTreeMap<String, Value>) -> Scope<'a> {
        Scope { params, vars, bound: None }
    }

    pub fn with_binding(self, name: &'a str, value: &'a Value) -> Scope<'a> {
        Scope { bound: Some((name, value)), ..self }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        if let Some((n, v)) = self.bound {
            if n == name {
                return Some(v);
            }
        }
        self.vars.get(name).or_else(|| self.params.get(name))
    }
}

pub fn eval(expr: &Expr, scope: &Scope<'_>) -> Result<Value, EvalError> {
    match expr {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(name) => scope
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::UnknownVar(name.clone())),
        Expr::Field(e, field) => {
            let v = eval(e, scope)?;
            let m = v.as_msg()?;
            Ok(match field {
                Field::Src => Value::Int(m.src),
                Field::Dst => Value::Int(m.dst),
                Field::Seq => Value::Int(m.seq),
                Field::Kind => Value::Sym(m.kind.to_string()),
                Field::Payload => (*m.payload).clone(),
            })
        }
        Expr::Un(op, e) => {
            let v = eval(e, scope)?;
            match op {
                UnOp::Not => Ok(Value::Bool(!v.as_bool()?)),
                UnOp::Neg => Ok(Value::Int(v.as_int()?.checked_neg().ok_or(EvalError::Arith)?)),
            }
        }
        Expr::Bin(op, l, r) => eval_bin(*op, l, r, scope),
        Expr::Call(b, args) => {
            if args.len() != b.arity() {
                return Err(EvalError::Arity(b.name(), b.arity(), args.len()));
            }
            let vals: Vec<Value> = args
                .iter()
                .map(|a| eval(a, scope))
                .collect::<Result<_, _>>()?;
            eval_builtin(*b, &vals, scope)
        }
    }
}

fn eval_bin(op: BinOp, l: &Expr, r: &Expr, scope: &Scope<'_>) -> Result<Value, EvalError> {
    // Short-circuit the boolean connectives so guards can protect
    // their right operand.
    match op {
        BinOp::And => {
            return Ok(Value::Bool(
                eval(l, scope)?.as_bool()? && eval(r, scope)?.as_bool()?,
            ));
        }
        BinOp::Or => {
            return Ok(Value::Bool(
                eval(l, scope)?.as_bool()? || eval(r, scope)?.as_bool()?,
            ));
        }
        _ => {}
    }
    let lv = eval(l, scope)?;
    let rv = eval(r, scope)?;
    match op {
        BinOp::Eq => Ok(Value::Bool(lv == rv)),
        BinOp::Ne => Ok(Value::Bool(lv != rv)),
        BinOp::Lt => Ok(Value::Bool(lv.as_int()? < rv.as_int()?)),
        BinOp::Le => Ok(Value::Bool(lv.as_int()? <= rv.as_int()?)),
        BinOp::Gt => Ok(Value::Bool(lv.as_int()? > rv.as_int()?)),
        BinOp::Ge => Ok(Value::Bool(lv.as_int()? >= rv.as_int()?)),
        BinOp::Add => Ok(Value::Int(lv.as_int()?.checked_add(rv.as_int()?).ok_or(EvalError::Arith)?)),
        BinOp::Sub => Ok(Value::Int(lv.as_int()?.checked_sub(rv.as_int()?).ok_or(EvalError::Arith)?)),
        BinOp::Mul => Ok(Value::Int(lv.as_int()?.checked_mul(rv.as_int()?).ok_or(EvalError::Arith)?)),
        BinOp::Div => Ok(Value::Int(lv.as_int()?.checked_div(rv.as_int()?).ok_or(EvalError::Arith)?)),
        BinOp::Mod => Ok(Value::Int(lv.as_int()?.checked_rem(rv.as_int()?).ok_or(EvalError::Arith)?)),
        BinOp::And | BinOp::Or => unreachable!("handled above"),
    }
}

fn eval_builtin(b: Builtin, vals: &[Value], scope: &Scope<'_>) -> Result<Value, EvalError> {
    match b {
        Builtin::Max => Ok(Value::Int(vals[0].as_int()?.max(vals[1].as_int()?))),
        Builtin::Min => Ok(Value::Int(vals[0].as_int()?.min(vals[1].as_int()?))),
        Builtin::Data => {
            let src = self_id(scope)?;
            Ok(Value::Msg(Envelope {
                src,
                dst: vals[0].as_int()?,
                seq: vals[1].as_int()?,
                kind: MsgKind::Data,
                payload: Box::new(vals[2].clone()),
            }))
        }
        Builtin::Ack => {
            let src = self_id(scope)?;
            Ok(Value::Msg(Envelope {
                src,
                dst: vals[0].as_int()?,
                seq: vals[1].as_int()?,
                kind: MsgKind::Ack,
                payload: Box::new(Value::Unit),
            }))
        }
        Builtin::HasBit => {
            let (mask, i) = (vals[0].as_int()?, vals[1].as_int()?);
            if !(0..64).contains(&i) {
                return Err(EvalError::BitRange(i));
            }
            Ok(Value::Bool(mask & (1 << i) != 0))
        }
        Builtin::SetBit => {
            let (mask, i) = (vals[0].as_int()?, vals[1].as_int()?);
            if !(0..64).contains(&i) {
                return Err(EvalError::BitRange(i));
            }
            Ok(Value::Int(mask | (1 << i)))
        }
    }
}

fn self_id(scope: &Scope<'_>) -> Result<i64, EvalError> {
    match scope.get("myId") {
        Some(v) => v.as_int(),
        None => Err(EvalError::MissingSelfId),
    }
}
