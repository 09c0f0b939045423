//! How the case study's unreliability is accounted for: the lossy
//! transport build exhibits message loss, the loss chains up to a
//! whole-network transmission fault, and the wrapper is the recorded
//! mitigation for that fault.

use sosc_core::{DepEdge, DependabilityModel, Dysfunction, Level, Persistence};

pub const FAULT_UNRELIABLE_TRANSMISSION: &str = "UnreliableMessageTransmission";
pub const ERROR_DROP_MESSAGE: &str = "DropMessage";
pub const FAILURE_MESSAGE_LOSS: &str = "MessageLoss";

pub fn dependability_model() -> DependabilityModel {
    let d = |id: &str, level, desc: &str| Dysfunction {
        id: id.to_string(),
        name: String::new(),
        description: desc.to_string(),
        level,
        persistence: Persistence::Transient,
    };
    DependabilityModel {
        faults: vec![d(
            FAULT_UNRELIABLE_TRANSMISSION,
            Level::Sos,
            "The shared transport may silently fail to convey a message between constituents",
        )],
        errors: vec![d(
            ERROR_DROP_MESSAGE,
            Level::Cs,
            "A staged message is discarded inside the transport instead of being delivered",
        )],
        failures: vec![d(
            FAILURE_MESSAGE_LOSS,
            Level::Cs,
            "The transport signals completion of a transfer it never delivered",
        )],
        edges: vec![
            DepEdge::Causes {
                from: ERROR_DROP_MESSAGE.to_string(),
                to: FAILURE_MESSAGE_LOSS.to_string(),
            },
            DepEdge::Causes {
                from: FAILURE_MESSAGE_LOSS.to_string(),
                to: FAULT_UNRELIABLE_TRANSMISSION.to_string(),
            },
            DepEdge::LocatedIn {
                dysfunction: ERROR_DROP_MESSAGE.to_string(),
                model: "TL_Faulty".to_string(),
            },
            DepEdge::LocatedIn {
                dysfunction: FAULT_UNRELIABLE_TRANSMISSION.to_string(),
                model: "AV_SoS_FT".to_string(),
            },
            DepEdge::Affects {
                dysfunction: FAULT_UNRELIABLE_TRANSMISSION.to_string(),
                model: "LE_Device".to_string(),
            },
            DepEdge::ExhibitedBy {
                dysfunction: ERROR_DROP_MESSAGE.to_string(),
                model: "TL_Faulty".to_string(),
            },
            DepEdge::ExhibitedBy {
                dysfunction: FAILURE_MESSAGE_LOSS.to_string(),
                model: "TL_Faulty".to_string(),
            },
            DepEdge::MitigatedBy {
                dysfunction: FAULT_UNRELIABLE_TRANSMISSION.to_string(),
                model: "LE_Wrapper".to_string(),
            },
        ],
        waived: Vec::new(),
    }
}
