//! Constituent-system contracts.
//!
//! A contract packages the externally relevant description of one
//! constituent: typed parameters, state variables, operation
//! signatures with pre/postconditions, invariants, the failure modes
//! it can exhibit, the faults it claims to mitigate, and a protocol
//! state machine giving its behaviour.

use crate::expr::Expr;
use crate::protocol::{ProtocolStateMachine, SemType, VarDecl};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: SemType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationSig {
    pub name: String,
    pub args: Vec<Param>,
    /// Over state variables, parameters, and arguments.
    pub pre: Option<Expr>,
    /// Additionally may reference primed state variables (`x'`) for
    /// the post-state. Postconditions document intent; they are
    /// resolved, not executed.
    pub post: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub name: String,
    pub params: Vec<Param>,
    pub state_vars: Vec<VarDecl>,
    pub operations: Vec<OperationSig>,
    /// Predicates over state variables and parameters, checked after
    /// every firing during execution.
    pub invariants: Vec<Expr>,
    /// Failure identifiers declared in the linked dependability model.
    pub failure_modes: Vec<String>,
    /// Fault identifiers this contract claims to mitigate.
    pub mitigates: Vec<String>,
    pub protocol: ProtocolStateMachine,
}

impl Contract {
    pub fn new(name: &str) -> Contract {
        Contract {
            name: name.to_string(),
            params: Vec::new(),
            state_vars: Vec::new(),
            operations: Vec::new(),
            invariants: Vec::new(),
            failure_modes: Vec::new(),
            mitigates: Vec::new(),
            protocol: ProtocolStateMachine::inert(),
        }
    }

    pub fn operation(&self, name: &str) -> Option<&OperationSig> {
        self.operations.iter().find(|o| o.name == name)
    }
}
