//! Shared proptest generators for the workspace test suites.
//!
//! The machines produced here have a finite reachable configuration
//! space: integer updates saturate through `min(x + 1, k)` and guards
//! compare against small constants, so bounded trace computation
//! always terminates without hitting exploration caps.

use proptest::prelude::*;
use sosc_core::{
    Action, BinOp, Builtin, Connection, Contract, DepEdge, DependabilityModel, Dysfunction,
    Endpoint, Expr, Field, InstanceDecl, Level, OperationSig, Param, Persistence,
    ProtocolStateMachine, Region, SemType, SoSComposition, State, StateKind, Stereotype,
    Transition, Trigger, UnOp, Value, VarDecl, Visibility, Waiver,
};

const STATE_POOL: &[&str] = &["idle", "busy", "wait", "done", "halt"];
const LABEL_POOL: &[&str] = &["ping", "pong", "tick", "tock"];

#[derive(Debug, Clone)]
pub struct MachineCfg {
    pub max_states: usize,
    pub max_transitions: usize,
    pub allow_error: bool,
    pub allow_timers: bool,
}

impl Default for MachineCfg {
    fn default() -> MachineCfg {
        MachineCfg { max_states: 4, max_transitions: 6, allow_error: true, allow_timers: true }
    }
}

fn pick(pool: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::sample::select(pool).prop_map(str::to_string)
}

pub fn label() -> impl Strategy<Value = String> {
    pick(LABEL_POOL)
}

fn trigger(allow_timers: bool) -> BoxedStrategy<Trigger> {
    let mut cases: Vec<(u32, BoxedStrategy<Trigger>)> = vec![
        (5, label().prop_map(|l| Trigger::On { label: l, bind: None }).boxed()),
        (2, label().prop_map(|l| Trigger::On { label: l, bind: Some("m".into()) }).boxed()),
        (3, Just(Trigger::Completion).boxed()),
    ];
    if allow_timers {
        cases.push((2, Just(Trigger::After { timeout: "t_poll".into() }).boxed()));
    }
    prop::strategy::Union::new_weighted(cases).boxed()
}

/// Saturating counter update: keeps the variable domain finite.
fn bump(var: &str, cap: i64) -> Action {
    Action::Assign {
        var: var.into(),
        value: Expr::call(
            Builtin::Min,
            vec![Expr::bin(BinOp::Add, Expr::var(var), Expr::int(1)), Expr::int(cap)],
        ),
    }
}

fn action(has_var: bool) -> BoxedStrategy<Action> {
    let mut cases: Vec<(u32, BoxedStrategy<Action>)> = vec![
        (3, label().prop_map(|l| Action::Emit { label: l, payload: None }).boxed()),
        (
            2,
            (label(), 0i64..4)
                .prop_map(|(l, v)| Action::Emit { label: l, payload: Some(Expr::int(v)) })
                .boxed(),
        ),
    ];
    if has_var {
        cases.push((3, Just(bump("x", 3)).boxed()));
    }
    prop::strategy::Union::new_weighted(cases).boxed()
}

fn guard(has_var: bool) -> BoxedStrategy<Option<Expr>> {
    if !has_var {
        return Just(None).boxed();
    }
    prop_oneof![
        3 => Just(None),
        2 => (1i64..4).prop_map(|k| Some(Expr::bin(BinOp::Lt, Expr::var("x"), Expr::int(k)))),
        1 => (0i64..3).prop_map(|k| Some(Expr::bin(BinOp::Ge, Expr::var("x"), Expr::int(k)))),
    ]
    .boxed()
}

fn transition(states: Vec<String>, has_var: bool, cfg: MachineCfg) -> impl Strategy<Value = Transition> {
    (
        prop::sample::select(states.clone()),
        prop::sample::select(states),
        trigger(cfg.allow_timers),
        guard(has_var),
        prop::collection::vec(action(has_var), 0..=2),
        prop::bool::weighted(0.3),
        if cfg.allow_error { prop::bool::weighted(0.2).boxed() } else { Just(false).boxed() },
    )
        .prop_map(|(source, target, trigger, guard, actions, internal, error)| Transition {
            source,
            target,
            trigger,
            guard,
            actions,
            event: None,
            stereotype: if error { Stereotype::Error } else { Stereotype::Nominal },
            visibility: if internal { Visibility::Internal } else { Visibility::Visible },
        })
}

/// A flat machine over a fixed four-label alphabet with at most one
/// saturating integer variable.
pub fn flat_machine(cfg: MachineCfg) -> impl Strategy<Value = ProtocolStateMachine> {
    (1..=cfg.max_states, any::<bool>()).prop_flat_map(move |(n, has_var)| {
        let states: Vec<String> = STATE_POOL[..n].iter().map(|s| s.to_string()).collect();
        prop::collection::vec(transition(states.clone(), has_var, cfg.clone()), 0..=cfg.max_transitions)
            .prop_map(move |transitions| ProtocolStateMachine {
                root: Region {
                    name: None,
                    initial: Some(states[0].clone()),
                    states: states.iter().map(|s| State::simple(s)).collect(),
                    transitions,
                },
                local_vars: if has_var {
                    vec![VarDecl { name: "x".into(), ty: SemType::Int, init: Expr::int(0) }]
                } else {
                    Vec::new()
                },
                deterministic: false,
            })
    })
}

/// A machine that contains at least one error-stereotyped transition.
pub fn machine_with_error(cfg: MachineCfg) -> impl Strategy<Value = ProtocolStateMachine> {
    flat_machine(cfg).prop_map(|mut m| {
        if !m.root.transitions.iter().any(|t| t.stereotype == Stereotype::Error) {
            let states: Vec<String> = m.root.states.iter().map(|s| s.name.clone()).collect();
            m.root.transitions.push(Transition {
                source: states[0].clone(),
                target: states[states.len() - 1].clone(),
                trigger: Trigger::Completion,
                guard: None,
                actions: vec![Action::Emit { label: "tock".into(), payload: None }],
                event: None,
                stereotype: Stereotype::Error,
                visibility: Visibility::Visible,
            });
        }
        m
    })
}

fn ident(prefix: &'static str) -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}".prop_map(move |s| format!("{prefix}_{s}"))
}

/// Expressions drawn from the full surface syntax. Not necessarily
/// well typed or closed; meant for serializer round-trips.
pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => (-9i64..100).prop_map(Expr::int),
        2 => any::<bool>().prop_map(Expr::bool),
        1 => Just(Expr::Lit(Value::Unit)),
        1 => prop::sample::select(&["DATA", "ACK"][..]).prop_map(|s| Expr::Lit(Value::Sym(s.to_string()))),
        3 => pick(&["x", "y", "m", "myId", "n"]).prop_map(|v| Expr::Var(v)),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            2 => (inner.clone(), inner.clone(), prop::sample::select(&[
                BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div,
                BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge,
                BinOp::And, BinOp::Or,
            ][..]))
                .prop_map(|(l, r, op)| Expr::bin(op, l, r)),
            1 => (inner.clone(), prop::sample::select(&[UnOp::Not, UnOp::Neg][..]))
                .prop_map(|(e, op)| Expr::Un(op, Box::new(e))),
            1 => (inner.clone(), prop::sample::select(&[
                Field::Src, Field::Dst, Field::Seq, Field::Kind, Field::Payload,
            ][..]))
                .prop_map(|(e, f)| Expr::field(e, f)),
            1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::call(Builtin::Max, vec![a, b])),
            1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::call(Builtin::HasBit, vec![a, b])),
            1 => (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(a, b, c)| Expr::call(Builtin::Data, vec![a, b, c])),
            1 => (inner.clone(), inner).prop_map(|(a, b)| Expr::call(Builtin::Ack, vec![a, b])),
        ]
    })
}

fn var_decl() -> impl Strategy<Value = VarDecl> {
    (pick(&["x", "y", "buf"]), any::<bool>()).prop_flat_map(|(name, msgish)| {
        if name == "buf" || msgish {
            Just(VarDecl { name: name.clone(), ty: SemType::Msg, init: Expr::Lit(Value::Unit) }).boxed()
        } else {
            (0i64..5)
                .prop_map(move |v| VarDecl { name: name.clone(), ty: SemType::Int, init: Expr::int(v) })
                .boxed()
        }
    })
}

fn operation() -> impl Strategy<Value = OperationSig> {
    (
        ident("op"),
        prop::collection::vec(pick(&["a", "b"]), 0..=2),
        prop::option::of(expr()),
        prop::option::of(expr()),
    )
        .prop_map(|(name, args, pre, post)| OperationSig {
            name,
            args: args
                .into_iter()
                .enumerate()
                .map(|(i, a)| Param { name: format!("{a}{i}"), ty: SemType::Int })
                .collect(),
            pre,
            post,
        })
}

/// A machine with one level of hierarchy: exercises composite and
/// parallel states for serializer round-trips.
pub fn nested_machine() -> impl Strategy<Value = ProtocolStateMachine> {
    (flat_machine(MachineCfg::default()), any::<bool>(), flat_machine(MachineCfg {
        max_states: 2,
        max_transitions: 2,
        allow_error: false,
        allow_timers: true,
    }))
        .prop_map(|(mut outer, parallel, inner)| {
            let kind = if parallel {
                StateKind::Parallel(vec![
                    Region { name: Some("left".into()), ..inner.root.clone() },
                    Region { name: Some("right".into()), ..inner.root },
                ])
            } else {
                StateKind::Composite(inner.root)
            };
            outer.root.states.push(State { name: "deep".into(), kind });
            outer
        })
}

pub fn contract() -> impl Strategy<Value = Contract> {
    (
        ident("c"),
        prop::collection::vec(pick(&["myId", "n", "k"]), 0..=2),
        prop::collection::vec(var_decl(), 0..=2),
        prop::collection::vec(operation(), 0..=2),
        prop::collection::vec(expr(), 0..=1),
        prop::collection::vec(ident("f"), 0..=1),
        prop::collection::vec(ident("f"), 0..=1),
        nested_machine(),
    )
        .prop_map(
            |(name, params, mut state_vars, operations, invariants, failure_modes, mitigates, protocol)| {
                state_vars.dedup_by(|a, b| a.name == b.name);
                let mut params: Vec<Param> =
                    params.into_iter().map(|p| Param { name: p, ty: SemType::Int }).collect();
                params.dedup_by(|a, b| a.name == b.name);
                Contract {
                    name,
                    params,
                    state_vars,
                    operations,
                    invariants,
                    failure_modes,
                    mitigates,
                    protocol,
                }
            },
        )
}

fn dysfunction(prefix: &'static str) -> impl Strategy<Value = Dysfunction> {
    (
        ident(prefix),
        "[a-z ]{0,12}",
        "[a-z ]{0,16}",
        prop::sample::select(&[Level::Cs, Level::Sos][..]),
        prop::sample::select(&[Persistence::Transient, Persistence::Permanent, Persistence::Unspecified][..]),
    )
        .prop_map(|(id, name, description, level, persistence)| Dysfunction {
            id,
            name,
            description,
            level,
            persistence,
        })
}

pub fn dependability() -> impl Strategy<Value = DependabilityModel> {
    (
        prop::collection::vec(dysfunction("flt"), 1..=2),
        prop::collection::vec(dysfunction("err"), 0..=2),
        prop::collection::vec(dysfunction("fail"), 0..=2),
    )
        .prop_flat_map(|(faults, errors, failures)| {
            let ids: Vec<String> = faults
                .iter()
                .chain(errors.iter())
                .chain(failures.iter())
                .map(|d| d.id.clone())
                .collect();
            let id = move || prop::sample::select(ids.clone());
            let model = || pick(&["c_sys", "s_net"]);
            let edge = prop_oneof![
                (id(), id()).prop_map(|(from, to)| DepEdge::Causes { from, to }),
                (id(), model()).prop_map(|(dysfunction, model)| DepEdge::LocatedIn { dysfunction, model }),
                (id(), model()).prop_map(|(dysfunction, model)| DepEdge::Affects { dysfunction, model }),
                (id(), model()).prop_map(|(dysfunction, model)| DepEdge::ExhibitedBy { dysfunction, model }),
                (id(), model()).prop_map(|(dysfunction, model)| DepEdge::MitigatedBy { dysfunction, model }),
            ];
            (
                Just(faults),
                Just(errors),
                Just(failures),
                prop::collection::vec(edge, 0..=3),
                prop::collection::vec(
                    (id(), "[a-z ]{1,10}").prop_map(|(dysfunction, reason)| Waiver { dysfunction, reason }),
                    0..=1,
                ),
            )
        })
        .prop_map(|(mut faults, mut errors, mut failures, edges, waived)| {
            faults.dedup_by(|a, b| a.id == b.id);
            errors.dedup_by(|a, b| a.id == b.id);
            failures.dedup_by(|a, b| a.id == b.id);
            DependabilityModel { faults, errors, failures, edges, waived }
        })
}

pub fn composition(contract_names: Vec<(String, usize)>) -> impl Strategy<Value = SoSComposition> {
    let decl = prop::sample::select(contract_names).prop_flat_map(|(contract, arity)| {
        (
            ident("i"),
            Just(contract),
            prop::collection::vec(
                prop_oneof![3 => (0i64..9).prop_map(Expr::int), 1 => Just(Expr::var("$i"))],
                arity..=arity,
            ),
            1u32..=3,
        )
            .prop_map(|(name, contract, actuals, multiplicity)| InstanceDecl {
                name,
                contract,
                actuals,
                multiplicity,
            })
    });
    (ident("s"), prop::collection::vec(decl, 1..=2))
        .prop_flat_map(|(name, mut instances)| {
            instances.dedup_by(|a, b| a.name == b.name);
            let ends: Vec<String> = instances
                .iter()
                .flat_map(|d| {
                    if d.multiplicity <= 1 {
                        vec![d.name.clone()]
                    } else {
                        (1..=d.multiplicity).map(|i| format!("{}_{i}", d.name)).collect()
                    }
                })
                .collect();
            let endpoint = move || {
                (prop::sample::select(ends.clone()), pick(&["p", "q"]))
                    .prop_map(|(instance, port)| Endpoint { instance, port })
            };
            let conn = (endpoint(), endpoint(), prop::collection::vec(label(), 1..=2)).prop_map(
                |(from, to, mut labels)| {
                    labels.dedup();
                    Connection { from, to, labels }
                },
            );
            (Just(name), Just(instances), prop::collection::vec(conn, 0..=2))
        })
        .prop_map(|(name, instances, connections)| SoSComposition { name, instances, connections })
}

/// A whole document: contracts, compositions over them, and an
/// optional dependability model. References are syntactically valid
/// but not guaranteed to resolve; meant for round-trip tests.
pub fn document(
) -> impl Strategy<Value = (Vec<Contract>, Vec<SoSComposition>, Option<DependabilityModel>)> {
    prop::collection::vec(contract(), 1..=2)
        .prop_flat_map(|mut contracts| {
            contracts.dedup_by(|a, b| a.name == b.name);
            let names: Vec<(String, usize)> =
                contracts.iter().map(|c| (c.name.clone(), c.params.len())).collect();
            (
                Just(contracts),
                prop::collection::vec(composition(names), 0..=1),
                prop::option::of(dependability()),
            )
        })
        .prop_map(|(contracts, mut comps, dep)| {
            comps.dedup_by(|a, b| a.name == b.name);
            (contracts, comps, dep)
        })
}
