//! Deterministic execution for composed systems: seeded single runs,
//! bounded exhaustive exploration over every schedule, and fault
//! injection driven by pluggable policies.

pub mod explore;
pub mod jsonl;
pub mod moves;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod system;

pub use explore::{
    explore, ExploreConfig, ExploreError, ExploreOutcome, ExploreStats, Property,
};
pub use jsonl::{event_line, parse_trace, write_trace, JsonlError};
pub use moves::{
    initial_global, invariant_violation, quiescent, site_message, structural_choices,
    timer_choices, ChoiceKind, EngineError, GlobalConfig, StepChoice, TimerSite,
};
pub use policy::{FaultPolicy, InjectState, MsgKey, PolicyError};
pub use rng::Rng;
pub use sim::{simulate, ExecutionConfig, SimError, SimReport};
pub use system::{BuildError, Instance, Link, RouteError, System};
