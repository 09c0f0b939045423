//! The constituent catalog: contracts for election devices, retry
//! wrappers, the shared transport in reliable and lossy builds, and
//! the generator pair used for loss measurement.
//!
//! Message flow runs on three labels. `LE_SendMsgs` carries traffic
//! toward the transport (device to wrapper, wrapper to transport),
//! `TL_Deliver` carries it back out (transport to wrapper, wrapper to
//! device), and `TL_Timeout` marks a delivery window expiring inside
//! the transport. `leader_elected` is a routed-to-nobody observable
//! announcing a device's decision.

use std::collections::BTreeMap;

use sosc_core::{
    Action, BinOp, Builtin, Contract, Expr, Field, OperationSig, Param, ProtocolStateMachine,
    Region, SemType, State, StateKind, Stereotype, Transition, Trigger, UnOp, Value, VarDecl,
    Visibility,
};

pub const SEND: &str = "LE_SendMsgs";
pub const DELIVER: &str = "TL_Deliver";
pub const NET_TIMEOUT: &str = "TL_Timeout";
pub const ELECTED: &str = "leader_elected";

pub const ELECTION_TIMEOUT: &str = "election_timeout";
pub const WRAPPER_TIMEOUT: &str = "wrapper_timeout";
pub const TL_DELIVERY_TIMEOUT: &str = "tl_delivery_timeout";
pub const PUMP_GAP: &str = "pump_gap";

/// Tick budgets shared by every composition in the catalog. The
/// wrapper retry window exceeds the transport's delivery window, so a
/// lost message times out inside the transport before the sender
/// retransmits; the election window exceeds both, so a device only
/// gives up waiting after the retry protocol has had its chance.
pub fn default_timeouts() -> BTreeMap<String, u64> {
    BTreeMap::from([
        (ELECTION_TIMEOUT.to_string(), 10),
        (WRAPPER_TIMEOUT.to_string(), 3),
        (TL_DELIVERY_TIMEOUT.to_string(), 2),
        (PUMP_GAP.to_string(), 25),
    ])
}

/// Which transport build a composition instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    /// Delivers every accepted message.
    Nominal,
    /// May instead discard the accepted message; the loss surfaces
    /// as a `TL_Timeout` once the delivery window expires.
    Faulty,
}

impl TransportKind {
    pub fn contract_name(self) -> &'static str {
        match self {
            TransportKind::Nominal => "TL_Nominal",
            TransportKind::Faulty => "TL_Faulty",
        }
    }
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

fn int(k: i64) -> Expr {
    Expr::int(k)
}

fn b(op: BinOp, l: Expr, r: Expr) -> Expr {
    Expr::bin(op, l, r)
}

fn fld(name: &str, f: Field) -> Expr {
    Expr::field(v(name), f)
}

fn sym(s: &str) -> Expr {
    Expr::Lit(Value::Sym(s.to_string()))
}

fn not(e: Expr) -> Expr {
    Expr::Un(UnOp::Not, Box::new(e))
}

fn param(name: &str, ty: SemType) -> Param {
    Param { name: name.to_string(), ty }
}

fn var(name: &str, ty: SemType, init: Expr) -> VarDecl {
    VarDecl { name: name.to_string(), ty, init }
}

/// Transition under construction; finished by `done`.
struct Tr(Transition);

impl Tr {
    fn go(source: &str, target: &str) -> Tr {
        Tr(Transition {
            source: source.to_string(),
            target: target.to_string(),
            trigger: Trigger::Completion,
            guard: None,
            actions: Vec::new(),
            event: None,
            stereotype: Stereotype::Nominal,
            visibility: Visibility::Visible,
        })
    }

    fn on(mut self, label: &str, bind: Option<&str>) -> Tr {
        self.0.trigger =
            Trigger::On { label: label.to_string(), bind: bind.map(|s| s.to_string()) };
        self
    }

    fn after(mut self, timeout: &str) -> Tr {
        self.0.trigger = Trigger::After { timeout: timeout.to_string() };
        self
    }

    fn when(mut self, g: Expr) -> Tr {
        self.0.guard = Some(g);
        self
    }

    fn set(mut self, var: &str, value: Expr) -> Tr {
        self.0.actions.push(Action::Assign { var: var.to_string(), value });
        self
    }

    fn invoke(mut self, op: &str, args: Vec<Expr>) -> Tr {
        self.0.actions.push(Action::Invoke { op: op.to_string(), args });
        self
    }

    fn emit(mut self, label: &str, payload: Expr) -> Tr {
        self.0.actions.push(Action::Emit { label: label.to_string(), payload: Some(payload) });
        self
    }

    fn tagged(mut self, event: &str) -> Tr {
        self.0.event = Some(event.to_string());
        self
    }

    fn error(mut self) -> Tr {
        self.0.stereotype = Stereotype::Error;
        self
    }

    fn internal(mut self) -> Tr {
        self.0.visibility = Visibility::Internal;
        self
    }

    fn done(self) -> Transition {
        self.0
    }
}

fn region(name: Option<&str>, initial: &str, states: Vec<State>, transitions: Vec<Transition>) -> Region {
    Region {
        name: name.map(|s| s.to_string()),
        states,
        initial: Some(initial.to_string()),
        transitions,
    }
}

/// An election participant. It announces its own identity to every
/// peer, collects the identities it hears back, and decides on the
/// highest one; if peers stay silent past the election window it
/// decides on the best it has.
pub fn device_contract() -> Contract {
    let mut c = Contract::new("LE_Device");
    c.params = vec![param("myId", SemType::Int), param("n", SemType::Int)];
    c.state_vars = vec![
        var("best", SemType::Int, v("myId")),
        var("heard", SemType::Int, int(0)),
        var("heard_n", SemType::Int, int(0)),
        var("leader", SemType::Int, int(0)),
    ];
    c.operations = vec![OperationSig {
        name: "decide".to_string(),
        args: vec![param("winner", SemType::Int)],
        pre: Some(b(BinOp::Ge, v("winner"), v("best"))),
        post: Some(b(BinOp::Eq, v("leader'"), v("winner"))),
    }];
    c.invariants = vec![
        b(
            BinOp::Or,
            b(BinOp::Eq, v("leader"), int(0)),
            b(BinOp::Ge, v("leader"), v("myId")),
        ),
        b(BinOp::Le, v("heard_n"), b(BinOp::Sub, v("n"), int(1))),
    ];

    let is_new_peer = b(
        BinOp::And,
        b(BinOp::Eq, fld("m", Field::Kind), sym("DATA")),
        not(Expr::call(Builtin::HasBit, vec![v("heard"), fld("m", Field::Src)])),
    );
    let is_stale = b(
        BinOp::Or,
        b(BinOp::Ne, fld("m", Field::Kind), sym("DATA")),
        Expr::call(Builtin::HasBit, vec![v("heard"), fld("m", Field::Src)]),
    );
    let quorum = b(BinOp::Ge, v("heard_n"), b(BinOp::Sub, v("n"), int(1)));

    let root = region(
        None,
        "Init",
        vec![
            State::simple("Init"),
            State::simple("Bcast"),
            State::simple("Wait"),
            State::simple("Done"),
        ],
        vec![
            Tr::go("Init", "Bcast").set("k", int(1)).internal().done(),
            // Walk peer ids 1..n, skipping our own.
            Tr::go("Bcast", "Bcast")
                .when(b(BinOp::Eq, v("k"), v("myId")))
                .set("k", b(BinOp::Add, v("k"), int(1)))
                .internal()
                .done(),
            Tr::go("Bcast", "Bcast")
                .when(b(
                    BinOp::And,
                    b(BinOp::Ne, v("k"), v("myId")),
                    b(BinOp::Le, v("k"), v("n")),
                ))
                .emit(SEND, Expr::call(Builtin::Data, vec![v("k"), int(0), v("myId")]))
                .set("k", b(BinOp::Add, v("k"), int(1)))
                .done(),
            Tr::go("Bcast", "Wait").when(b(BinOp::Gt, v("k"), v("n"))).internal().done(),
            // Hearing a new peer restarts the election window.
            Tr::go("Wait", "Wait")
                .on(DELIVER, Some("m"))
                .when(is_new_peer)
                .set("best", Expr::call(Builtin::Max, vec![v("best"), fld("m", Field::Payload)]))
                .set("heard", Expr::call(Builtin::SetBit, vec![v("heard"), fld("m", Field::Src)]))
                .set("heard_n", b(BinOp::Add, v("heard_n"), int(1)))
                .internal()
                .done(),
            Tr::go("Wait", "Wait").on(DELIVER, Some("m")).when(is_stale).internal().done(),
            Tr::go("Wait", "Done")
                .when(quorum)
                .set("leader", v("best"))
                .emit(ELECTED, v("best"))
                .invoke("decide", vec![v("best")])
                .done(),
            Tr::go("Wait", "Done")
                .after(ELECTION_TIMEOUT)
                .set("leader", v("best"))
                .emit(ELECTED, v("best"))
                .invoke("decide", vec![v("best")])
                .done(),
            Tr::go("Done", "Done").on(DELIVER, None).internal().done(),
        ],
    );
    c.protocol = ProtocolStateMachine {
        root,
        local_vars: vec![var("k", SemType::Int, int(0))],
        deterministic: true,
    };
    c
}

/// Store-and-forward reliability shim between one device and one
/// peer. The send half holds each outbound message until the peer's
/// wrapper acknowledges the sequence number, retransmitting up to
/// `maxRetries` times on timeout; the receive half acknowledges every
/// arrival and forwards first deliveries up to its device.
pub fn wrapper_contract() -> Contract {
    let mut c = Contract::new("LE_Wrapper");
    c.params = vec![
        param("myId", SemType::Int),
        param("yrId", SemType::Int),
        param("maxRetries", SemType::Int),
    ];
    c.state_vars = vec![
        var("snd_seq", SemType::Int, int(0)),
        var("retries", SemType::Int, int(0)),
        var("rcv_last", SemType::Int, int(0)),
        var("rcv_dups", SemType::Int, int(0)),
    ];
    c.operations = vec![
        OperationSig {
            name: "store".to_string(),
            args: vec![param("m", SemType::Msg)],
            pre: Some(b(BinOp::Eq, fld("m", Field::Kind), sym("DATA"))),
            post: None,
        },
        OperationSig {
            name: "forward".to_string(),
            args: vec![param("m", SemType::Msg)],
            pre: None,
            post: Some(b(BinOp::Eq, v("rcv_last'"), fld("m", Field::Seq))),
        },
    ];
    c.invariants = vec![b(BinOp::Le, v("retries"), v("maxRetries"))];
    c.mitigates = vec!["UnreliableMessageTransmission".to_string()];

    let ack_matches = b(
        BinOp::And,
        b(BinOp::Eq, fld("a", Field::Kind), sym("ACK")),
        b(BinOp::Eq, fld("a", Field::Seq), v("snd_seq")),
    );
    let ack_stale = b(
        BinOp::And,
        b(BinOp::Eq, fld("a", Field::Kind), sym("ACK")),
        b(BinOp::Ne, fld("a", Field::Seq), v("snd_seq")),
    );
    let resend = Expr::call(
        Builtin::Data,
        vec![v("yrId"), v("snd_seq"), fld("snd_pl", Field::Payload)],
    );
    let data_new = b(
        BinOp::And,
        b(BinOp::Eq, fld("d", Field::Kind), sym("DATA")),
        b(BinOp::Gt, fld("d", Field::Seq), v("rcv_last")),
    );
    let data_seen = b(
        BinOp::And,
        b(BinOp::Eq, fld("d", Field::Kind), sym("DATA")),
        b(BinOp::Le, fld("d", Field::Seq), v("rcv_last")),
    );
    let peer_ack = Expr::call(Builtin::Ack, vec![fld("d", Field::Src), fld("d", Field::Seq)]);

    let send_half = region(
        Some("WrapperSend"),
        "WIdle",
        vec![State::simple("WIdle"), State::simple("Store"), State::simple("Sent")],
        vec![
            Tr::go("WIdle", "Store")
                .on(SEND, Some("m"))
                .set("snd_pl", v("m"))
                .set("snd_seq", b(BinOp::Add, v("snd_seq"), int(1)))
                .set("retries", int(0))
                .invoke("store", vec![v("m")])
                .internal()
                .done(),
            Tr::go("Store", "Sent").emit(SEND, resend.clone()).done(),
            Tr::go("Sent", "WIdle").on(DELIVER, Some("a")).when(ack_matches).internal().done(),
            Tr::go("Sent", "Sent").on(DELIVER, Some("a")).when(ack_stale).internal().done(),
            Tr::go("Sent", "Sent")
                .after(WRAPPER_TIMEOUT)
                .when(b(BinOp::Lt, v("retries"), v("maxRetries")))
                .set("retries", b(BinOp::Add, v("retries"), int(1)))
                .emit(SEND, resend)
                .done(),
            Tr::go("Sent", "WIdle")
                .after(WRAPPER_TIMEOUT)
                .when(b(BinOp::Ge, v("retries"), v("maxRetries")))
                .tagged("give_up")
                .internal()
                .done(),
            // Acknowledgements arriving after a give-up.
            Tr::go("WIdle", "WIdle")
                .on(DELIVER, Some("a"))
                .when(b(BinOp::Eq, fld("a", Field::Kind), sym("ACK")))
                .internal()
                .done(),
        ],
    );
    let recv_half = region(
        Some("WrapperRec"),
        "RIdle",
        vec![State::simple("RIdle")],
        vec![
            Tr::go("RIdle", "RIdle")
                .on(DELIVER, Some("d"))
                .when(data_new)
                .set("rcv_last", fld("d", Field::Seq))
                .emit(DELIVER, v("d"))
                .emit(SEND, peer_ack.clone())
                .invoke("forward", vec![v("d")])
                .done(),
            // Retransmission of something already forwarded: just
            // re-acknowledge so the sender stops.
            Tr::go("RIdle", "RIdle")
                .on(DELIVER, Some("d"))
                .when(data_seen)
                .set("rcv_dups", b(BinOp::Add, v("rcv_dups"), int(1)))
                .emit(SEND, peer_ack)
                .internal()
                .done(),
        ],
    );

    c.protocol = ProtocolStateMachine {
        root: Region {
            name: None,
            states: vec![State {
                name: "Relay".to_string(),
                kind: StateKind::Parallel(vec![send_half, recv_half]),
            }],
            initial: Some("Relay".to_string()),
            transitions: Vec::new(),
        },
        local_vars: vec![var("snd_pl", SemType::Msg, Expr::Lit(Value::Unit))],
        deterministic: true,
    };
    c
}

/// The shared transport. It accepts one message at a time and walks
/// it through an internal pipeline before handing it back out; the
/// faulty build may instead discard the staged message, in which case
/// the delivery window expires visibly as `TL_Timeout`.
pub fn transport_contract(kind: TransportKind) -> Contract {
    let mut c = Contract::new(kind.contract_name());
    c.operations = vec![
        OperationSig {
            name: "accept".to_string(),
            args: vec![param("m", SemType::Msg)],
            pre: Some(b(
                BinOp::Or,
                b(BinOp::Eq, fld("m", Field::Kind), sym("DATA")),
                b(BinOp::Eq, fld("m", Field::Kind), sym("ACK")),
            )),
            post: None,
        },
        OperationSig { name: "dequeue".to_string(), args: Vec::new(), pre: None, post: None },
    ];
    if kind == TransportKind::Faulty {
        c.failure_modes = vec!["MessageLoss".to_string()];
    }

    let mut pipeline_states = vec![
        State::simple("ReadyToRead"),
        State::simple("Delivering"),
        State::simple("Done"),
    ];
    let mut pipeline = vec![
        Tr::go("ReadyToRead", "Delivering").invoke("dequeue", Vec::new()).internal().done(),
        Tr::go("Delivering", "Done").emit(DELIVER, v("buf")).set("fin", Expr::bool(true)).done(),
        // The delivery window cannot expire while the pipeline is
        // able to act; this keeps the timeout in the reliable
        // build's alphabet without it ever firing there.
        Tr::go("Delivering", "Done")
            .after(TL_DELIVERY_TIMEOUT)
            .set("fin", Expr::bool(true))
            .tagged(NET_TIMEOUT)
            .done(),
    ];
    if kind == TransportKind::Faulty {
        pipeline_states.push(State::simple("Dropped"));
        pipeline.push(Tr::go("ReadyToRead", "Dropped").tagged("dropMessage").error().internal().done());
        pipeline.push(
            Tr::go("Dropped", "Done")
                .after(TL_DELIVERY_TIMEOUT)
                .set("fin", Expr::bool(true))
                .tagged(NET_TIMEOUT)
                .done(),
        );
    }

    let root = region(
        None,
        "Idle",
        vec![
            State::simple("Idle"),
            State {
                name: "Busy".to_string(),
                kind: StateKind::Composite(region(None, "ReadyToRead", pipeline_states, pipeline)),
            },
        ],
        vec![
            Tr::go("Idle", "Busy")
                .on(SEND, Some("m"))
                .set("buf", v("m"))
                .invoke("accept", vec![v("m")])
                .done(),
            Tr::go("Busy", "Idle")
                .when(v("fin"))
                .set("fin", Expr::bool(false))
                .tagged("release")
                .internal()
                .done(),
        ],
    );
    c.protocol = ProtocolStateMachine {
        root,
        local_vars: vec![
            var("buf", SemType::Msg, Expr::Lit(Value::Unit)),
            var("fin", SemType::Bool, Expr::bool(false)),
        ],
        deterministic: false,
    };
    c
}

/// Load generator: addresses `total` numbered messages to `peer`,
/// pacing on a timer so each message fully resolves before the next
/// is offered.
pub fn pump_contract() -> Contract {
    let mut c = Contract::new("Pump");
    c.params = vec![
        param("myId", SemType::Int),
        param("peer", SemType::Int),
        param("total", SemType::Int),
    ];
    c.state_vars = vec![var("next", SemType::Int, int(1))];
    c.invariants = vec![b(BinOp::Le, v("next"), b(BinOp::Add, v("total"), int(1)))];
    let root = region(
        None,
        "Send",
        vec![State::simple("Send"), State::simple("Gap"), State::simple("Done")],
        vec![
            Tr::go("Send", "Gap")
                .when(b(BinOp::Le, v("next"), v("total")))
                .emit(SEND, Expr::call(Builtin::Data, vec![v("peer"), v("next"), v("next")]))
                .set("next", b(BinOp::Add, v("next"), int(1)))
                .done(),
            Tr::go("Send", "Done").when(b(BinOp::Gt, v("next"), v("total"))).internal().done(),
            Tr::go("Gap", "Send").after(PUMP_GAP).internal().done(),
        ],
    );
    c.protocol = ProtocolStateMachine { root, local_vars: Vec::new(), deterministic: true };
    c
}

/// Counts what reaches it.
pub fn sink_contract() -> Contract {
    let mut c = Contract::new("Sink");
    c.params = vec![param("myId", SemType::Int)];
    c.state_vars = vec![var("got", SemType::Int, int(0))];
    let root = region(
        None,
        "Recv",
        vec![State::simple("Recv")],
        vec![Tr::go("Recv", "Recv")
            .on(DELIVER, None)
            .set("got", b(BinOp::Add, v("got"), int(1)))
            .internal()
            .done()],
    );
    c.protocol = ProtocolStateMachine { root, local_vars: Vec::new(), deterministic: true };
    c
}
