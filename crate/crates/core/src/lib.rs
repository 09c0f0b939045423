//! Core model types for contract-based system-of-systems design:
//! an expression language, guarded hierarchical protocol state
//! machines, constituent contracts, compositions, a dependability
//! model, traces, and structural validation.

pub mod composition;
pub mod contract;
pub mod dependability;
pub mod expr;
pub mod protocol;
pub mod trace;
pub mod validate;

pub use composition::{
    expand_instances, Connection, Endpoint, ExpandError, InstanceDecl, ResolvedInstance,
    SoSComposition,
};
pub use contract::{Contract, OperationSig, Param};
pub use dependability::{
    DepEdge, DependabilityModel, Dysfunction, DysfunctionKind, Level, Persistence, Waiver,
};
pub use expr::{eval, Builtin, BinOp, Envelope, EvalError, Expr, Field, MsgKind, Scope, UnOp, Value};
pub use protocol::{
    active_paths, armed_timers, armed_timers_by, has_enabled_completion, initial_config, step,
    visit_regions, Action, ActiveState,
    Emission, Firing, ProtocolConfig, ProtocolStateMachine, Region, SemType, State, StateKind,
    StepError, Stereotype, Stimulus, Transition, Trigger, VarDecl, Visibility,
};
pub use trace::{Event, Terminal, Trace};
pub use validate::{
    validate_composition, validate_contract, validate_dependability, validate_document, Diagnostic,
    Severity,
};
