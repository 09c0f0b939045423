//! Compositions over the catalog, and ready-to-run systems built
//! from them.
//!
//! Routing relies on instance identity. Devices address envelopes to
//! peer ids; in the direct topology the transport is each device's
//! only outbound link, and in the fault-tolerant topology the
//! destination id picks the right wrapper out of the device's fanout
//! (the wrapper owned by the sender whose `yrId` is the addressee).
//! Coming back out, the transport's fanout resolves by `myId` (plus
//! `yrId` for wrappers, so acknowledgements reach the sending half
//! that is waiting on them).

use sosc_core::{Connection, Endpoint, Expr, InstanceDecl, SoSComposition};
use sosc_dsl::ModelDocument;
use sosc_engine::{BuildError, System};

use crate::catalog::{
    default_timeouts, device_contract, pump_contract, sink_contract, transport_contract,
    wrapper_contract, TransportKind, DELIVER, SEND,
};
use crate::depend::dependability_model;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvOptions {
    /// Number of election devices; ids run 1 ..= devices.
    pub devices: u32,
    /// Route device traffic through per-pair retry wrappers instead
    /// of handing it to the transport directly.
    pub fault_tolerant: bool,
    pub transport: TransportKind,
    /// Retransmission budget given to every wrapper.
    pub max_retries: i64,
}

impl Default for AvOptions {
    fn default() -> AvOptions {
        AvOptions {
            devices: 2,
            fault_tolerant: false,
            transport: TransportKind::Faulty,
            max_retries: 1,
        }
    }
}

fn instance(name: &str, contract: &str, actuals: Vec<Expr>, multiplicity: u32) -> InstanceDecl {
    InstanceDecl { name: name.to_string(), contract: contract.to_string(), actuals, multiplicity }
}

fn connect(from: (&str, &str), to: (&str, &str), label: &str) -> Connection {
    Connection {
        from: Endpoint { instance: from.0.to_string(), port: from.1.to_string() },
        to: Endpoint { instance: to.0.to_string(), port: to.1.to_string() },
        labels: vec![label.to_string()],
    }
}

pub fn composition(opts: AvOptions) -> SoSComposition {
    let n = opts.devices;
    let mut comp =
        SoSComposition::new(if opts.fault_tolerant { "AV_SoS_FT" } else { "AV_SoS" });
    comp.instances.push(instance(
        "dev",
        "LE_Device",
        vec![Expr::var("$i"), Expr::int(n as i64)],
        n,
    ));
    if opts.fault_tolerant {
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    comp.instances.push(instance(
                        &format!("w_{i}_{j}"),
                        "LE_Wrapper",
                        vec![Expr::int(i as i64), Expr::int(j as i64), Expr::int(opts.max_retries)],
                        1,
                    ));
                }
            }
        }
    }
    comp.instances.push(instance("tl", opts.transport.contract_name(), Vec::new(), 1));

    if opts.fault_tolerant {
        for i in 1..=n {
            let dev = format!("dev_{i}");
            for j in 1..=n {
                if i == j {
                    continue;
                }
                let w = format!("w_{i}_{j}");
                comp.connections.push(connect((&dev, "out"), (&w, "inp"), SEND));
                comp.connections.push(connect((&w, "up"), (&dev, "inp"), DELIVER));
                comp.connections.push(connect((&w, "net"), ("tl", "inp"), SEND));
                comp.connections.push(connect(("tl", "out"), (&w, "net"), DELIVER));
            }
        }
    } else {
        for i in 1..=n {
            let dev = format!("dev_{i}");
            comp.connections.push(connect((&dev, "out"), ("tl", "inp"), SEND));
            comp.connections.push(connect(("tl", "out"), (&dev, "inp"), DELIVER));
        }
    }
    comp
}

/// Every catalog contract, in canonical document order.
pub fn contracts() -> Vec<sosc_core::Contract> {
    vec![
        device_contract(),
        wrapper_contract(),
        transport_contract(TransportKind::Nominal),
        transport_contract(TransportKind::Faulty),
    ]
}

pub fn system(opts: AvOptions) -> Result<System, BuildError> {
    System::build(&contracts(), &composition(opts), default_timeouts())
}

/// One-directional measurement rig: a paced pump behind its wrapper,
/// the lossy transport, and a counting sink behind the peer wrapper.
pub fn loss_composition(total: i64, max_retries: i64) -> SoSComposition {
    let mut comp = SoSComposition::new("LossRig");
    comp.instances.push(instance(
        "pump",
        "Pump",
        vec![Expr::int(1), Expr::int(2), Expr::int(total)],
        1,
    ));
    comp.instances.push(instance(
        "w_1_2",
        "LE_Wrapper",
        vec![Expr::int(1), Expr::int(2), Expr::int(max_retries)],
        1,
    ));
    comp.instances.push(instance(
        "w_2_1",
        "LE_Wrapper",
        vec![Expr::int(2), Expr::int(1), Expr::int(max_retries)],
        1,
    ));
    comp.instances.push(instance("sink", "Sink", vec![Expr::int(2)], 1));
    comp.instances.push(instance("tl", TransportKind::Faulty.contract_name(), Vec::new(), 1));
    comp.connections = vec![
        connect(("pump", "out"), ("w_1_2", "inp"), SEND),
        connect(("w_1_2", "net"), ("tl", "inp"), SEND),
        connect(("tl", "out"), ("w_1_2", "net"), DELIVER),
        connect(("w_2_1", "net"), ("tl", "inp"), SEND),
        connect(("tl", "out"), ("w_2_1", "net"), DELIVER),
        connect(("w_2_1", "up"), ("sink", "inp"), DELIVER),
    ];
    comp
}

pub fn loss_system(total: i64, max_retries: i64) -> Result<System, BuildError> {
    let mut all = contracts();
    all.push(pump_contract());
    all.push(sink_contract());
    System::build(&all, &loss_composition(total, max_retries), default_timeouts())
}

/// The case study as one document: the catalog contracts, the direct
/// and fault-tolerant two-device compositions, and the dependability
/// account of the lossy transport.
pub fn document() -> ModelDocument {
    ModelDocument {
        contracts: contracts(),
        compositions: vec![
            composition(AvOptions { fault_tolerant: false, ..AvOptions::default() }),
            composition(AvOptions { fault_tolerant: true, ..AvOptions::default() }),
        ],
        dependability: Some(dependability_model()),
    }
}
