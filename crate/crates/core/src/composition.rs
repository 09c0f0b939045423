//! Compositions: named instances of contracts wired by connections.
//!
//! Instance declarations carry actual-parameter expressions and an
//! optional multiplicity. A multiplicity of `k` expands the base name
//! into `name_1 .. name_k`; actuals may reference the expansion index
//! as `$i`, which is how many near-identical constituents receive
//! distinct identities.
//!
//! Connections are directed: `a.p -> b.q : {labels}` carries the
//! listed labels from `a` to `b` only. Port names document intent and
//! distinguish parallel links; routing resolves on instance identity.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{eval, EvalError, Expr, Scope, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceDecl {
    pub name: String,
    pub contract: String,
    pub actuals: Vec<Expr>,
    /// 1 means a single instance named exactly `name`.
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub instance: String,
    pub port: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub from: Endpoint,
    pub to: Endpoint,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoSComposition {
    pub name: String,
    pub instances: Vec<InstanceDecl>,
    pub connections: Vec<Connection>,
}

impl SoSComposition {
    pub fn new(name: &str) -> SoSComposition {
        SoSComposition { name: name.to_string(), instances: Vec::new(), connections: Vec::new() }
    }
}

/// A fully expanded instance: concrete id and evaluated actuals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedInstance {
    pub id: String,
    pub contract: String,
    pub actuals: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("instance `{0}`: actual parameter {1} failed to evaluate: {2}")]
    Actual(String, usize, EvalError),
}

/// Expands multiplicities and evaluates actual parameters. Actuals
/// must be closed except for the expansion index `$i` (1-based).
pub fn expand_instances(comp: &SoSComposition) -> Result<Vec<ResolvedInstance>, ExpandError> {
    let mut out = Vec::new();
    let empty = BTreeMap::new();
    for decl in &comp.instances {
        if decl.multiplicity <= 1 {
            let actuals = eval_actuals(decl, None, &empty)?;
            out.push(ResolvedInstance {
                id: decl.name.clone(),
                contract: decl.contract.clone(),
                actuals,
            });
        } else {
            for i in 1..=decl.multiplicity {
                let actuals = eval_actuals(decl, Some(i as i64), &empty)?;
                out.push(ResolvedInstance {
                    id: format!("{}_{}", decl.name, i),
                    contract: decl.contract.clone(),
                    actuals,
                });
            }
        }
    }
    Ok(out)
}

fn eval_actuals(
    decl: &InstanceDecl,
    index: Option<i64>,
    empty: &BTreeMap<String, Value>,
) -> Result<Vec<Value>, ExpandError> {
    let mut idx_scope = BTreeMap::new();
    if let Some(i) = index {
        idx_scope.insert("$i".to_string(), Value::Int(i));
    }
    decl.actuals
        .iter()
        .enumerate()
        .map(|(k, e)| {
            eval(e, &Scope::new(&idx_scope, empty))
                .map_err(|err| ExpandError::Actual(decl.name.clone(), k, err))
        })
        .collect()
}
