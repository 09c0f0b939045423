//! A network of audio-visual devices that elect a coordinator by
//! flooding their identities and keeping the highest heard, built
//! over a shared transport that serializes all traffic. The transport
//! comes in a reliable and a lossy build; per-pair retry wrappers
//! restore enough reliability for the election to come out right
//! anyway. The modules here provide the contracts, the wired
//! compositions, the dependability account of the loss, and the
//! correctness properties the compositions are explored against.

pub mod build;
pub mod catalog;
pub mod depend;
pub mod properties;

pub use build::{
    composition, contracts, document, loss_composition, loss_system, system, AvOptions,
};
pub use catalog::{
    default_timeouts, device_contract, pump_contract, sink_contract, transport_contract,
    wrapper_contract, TransportKind, DELIVER, ELECTED, ELECTION_TIMEOUT, NET_TIMEOUT, PUMP_GAP,
    SEND, TL_DELIVERY_TIMEOUT, WRAPPER_TIMEOUT,
};
pub use depend::{
    dependability_model, ERROR_DROP_MESSAGE, FAILURE_MESSAGE_LOSS, FAULT_UNRELIABLE_TRANSMISSION,
};
pub use properties::{leaders, Agreement, GiveUpBound, SingleDecision};
