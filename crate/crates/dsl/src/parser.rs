//! Recursive-descent parser. Fails on the first error with the
//! position of the offending token.

use thiserror::Error;

use sosc_core::{
    Action, Builtin, Connection, Contract, DepEdge, DependabilityModel, Dysfunction,
    DysfunctionKind, Endpoint, Expr, Field, InstanceDecl, Level, OperationSig, Param, Persistence,
    ProtocolStateMachine, Region, SemType, SoSComposition, State, StateKind, Stereotype,
    Transition, Trigger, UnOp, Value, VarDecl, Visibility, Waiver,
};

use crate::lexer::{lex, LexError, Pos, Token};
use crate::ModelDocument;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> ParseError {
        ParseError { pos: e.pos, message: e.message }
    }
}

pub fn parse_document(src: &str) -> Result<ModelDocument, ParseError> {
    let mut p = Parser { toks: lex(src)?, i: 0 };
    let mut doc = ModelDocument {
        contracts: Vec::new(),
        compositions: Vec::new(),
        dependability: None,
    };
    loop {
        match p.peek() {
            Token::Eof => break,
            Token::Ident(k) if k == "contract" => doc.contracts.push(p.contract()?),
            Token::Ident(k) if k == "sos" => doc.compositions.push(p.composition()?),
            Token::Ident(k) if k == "dependability" => {
                if doc.dependability.is_some() {
                    return Err(p.err("a document holds at most one dependability block"));
                }
                doc.dependability = Some(p.dependability()?);
            }
            other => {
                let msg = format!("expected `contract`, `sos`, or `dependability`, found {other}");
                return Err(p.err(msg));
            }
        }
    }
    Ok(doc)
}

/// Parses a single expression; the whole input must be consumed.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(src)?, i: 0 };
    let e = p.expr()?;
    p.expect(Token::Eof)?;
    Ok(e)
}

struct Parser {
    toks: Vec<(Token, Pos)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { pos: self.pos(), message: message.into() }
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Token::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.err(format!("expected an identifier, found {other}"))),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Token::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{kw}`, found {}", self.peek())))
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Token::Str(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.err(format!("expected a string literal, found {other}"))),
        }
    }

    fn sem_type(&mut self) -> Result<SemType, ParseError> {
        let pos = self.pos();
        let name = self.ident()?;
        match name.as_str() {
            "int" => Ok(SemType::Int),
            "bool" => Ok(SemType::Bool),
            "msg" => Ok(SemType::Msg),
            other => Err(ParseError {
                pos,
                message: format!("expected a type (`int`, `bool`, `msg`), found `{other}`"),
            }),
        }
    }

    fn contract(&mut self) -> Result<Contract, ParseError> {
        self.expect_kw("contract")?;
        let mut c = Contract::new(&self.ident()?);
        self.expect(Token::LBrace)?;
        while *self.peek() != Token::RBrace {
            if self.eat_kw("param") {
                let name = self.ident()?;
                self.expect(Token::Colon)?;
                let ty = self.sem_type()?;
                self.expect(Token::Semi)?;
                c.params.push(Param { name, ty });
            } else if self.eat_kw("var") {
                c.state_vars.push(self.var_decl()?);
            } else if self.eat_kw("op") {
                c.operations.push(self.operation()?);
            } else if self.eat_kw("invariant") {
                c.invariants.push(self.expr()?);
                self.expect(Token::Semi)?;
            } else if self.eat_kw("failure_modes") {
                c.failure_modes.extend(self.ident_list()?);
                self.expect(Token::Semi)?;
            } else if self.eat_kw("mitigates") {
                c.mitigates.extend(self.ident_list()?);
                self.expect(Token::Semi)?;
            } else if self.at_kw("protocol") {
                c.protocol = self.protocol()?;
            } else {
                return Err(self.err(format!(
                    "expected a contract item (`param`, `var`, `op`, `invariant`, `failure_modes`, `mitigates`, `protocol`), found {}",
                    self.peek()
                )));
            }
        }
        self.expect(Token::RBrace)?;
        Ok(c)
    }

    fn var_decl(&mut self) -> Result<VarDecl, ParseError> {
        let name = self.ident()?;
        self.expect(Token::Colon)?;
        let ty = self.sem_type()?;
        self.expect(Token::ColonEq)?;
        let init = self.expr()?;
        self.expect(Token::Semi)?;
        Ok(VarDecl { name, ty, init })
    }

    fn operation(&mut self) -> Result<OperationSig, ParseError> {
        let name = self.ident()?;
        self.expect(Token::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Token::RParen {
            loop {
                let arg = self.ident()?;
                self.expect(Token::Colon)?;
                let ty = self.sem_type()?;
                args.push(Param { name: arg, ty });
                if !self.eat(Token::Comma) {
                    break;
                }
            }
        }
        self.expect(Token::RParen)?;
        let pre = if self.eat_kw("pre") { Some(self.expr()?) } else { None };
        let post = if self.eat_kw("post") { Some(self.expr()?) } else { None };
        self.expect(Token::Semi)?;
        Ok(OperationSig { name, args, pre, post })
    }

    fn eat(&mut self, t: Token) -> bool {
        if *self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.ident()?];
        while self.eat(Token::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn protocol(&mut self) -> Result<ProtocolStateMachine, ParseError> {
        self.expect_kw("protocol")?;
        let deterministic = self.eat_kw("deterministic");
        self.expect(Token::LBrace)?;
        let mut local_vars = Vec::new();
        let root = self.region_body(None, Some(&mut local_vars))?;
        self.expect(Token::RBrace)?;
        Ok(ProtocolStateMachine { root, local_vars, deterministic })
    }

    /// Parses region items up to the closing brace, which is left for
    /// the caller. `vars` is present only at protocol top level.
    fn region_body(
        &mut self,
        name: Option<String>,
        mut vars: Option<&mut Vec<VarDecl>>,
    ) -> Result<Region, ParseError> {
        let mut region = Region { name, states: Vec::new(), initial: None, transitions: Vec::new() };
        while *self.peek() != Token::RBrace {
            if self.at_kw("var") && vars.is_some() {
                self.next();
                let d = self.var_decl()?;
                vars.as_mut().unwrap().push(d);
            } else if self.eat_kw("initial") {
                self.expect_kw("state")?;
                if region.initial.is_some() {
                    return Err(self.err("a region has one initial state"));
                }
                region.initial = Some(self.ident()?);
                self.expect(Token::Semi)?;
            } else if self.eat_kw("state") {
                region.states.push(self.state()?);
            } else if self.eat_kw("trans") {
                region.transitions.push(self.transition()?);
            } else {
                return Err(self.err(format!(
                    "expected a region item (`initial`, `state`, `trans`), found {}",
                    self.peek()
                )));
            }
        }
        Ok(region)
    }

    fn state(&mut self) -> Result<State, ParseError> {
        let name = self.ident()?;
        if self.eat(Token::Semi) {
            return Ok(State { name, kind: StateKind::Simple });
        }
        if self.eat_kw("parallel") {
            self.expect(Token::LBrace)?;
            let mut regions = Vec::new();
            while self.at_kw("region") {
                self.next();
                let rname = match self.peek().clone() {
                    Token::Ident(s) => {
                        self.next();
                        Some(s)
                    }
                    _ => None,
                };
                self.expect(Token::LBrace)?;
                regions.push(self.region_body(rname, None)?);
                self.expect(Token::RBrace)?;
            }
            self.expect(Token::RBrace)?;
            if regions.is_empty() {
                return Err(self.err("a parallel state needs `region` blocks"));
            }
            return Ok(State { name, kind: StateKind::Parallel(regions) });
        }
        self.expect(Token::LBrace)?;
        let inner = self.region_body(None, None)?;
        self.expect(Token::RBrace)?;
        Ok(State { name, kind: StateKind::Composite(inner) })
    }

    fn transition(&mut self) -> Result<Transition, ParseError> {
        let source = self.ident()?;
        self.expect(Token::Arrow)?;
        let target = self.ident()?;

        let trigger = if self.eat_kw("on") {
            let label = self.ident()?;
            let bind = if self.eat(Token::LParen) {
                let b = self.ident()?;
                self.expect(Token::RParen)?;
                Some(b)
            } else {
                None
            };
            Trigger::On { label, bind }
        } else if self.eat_kw("after") {
            Trigger::After { timeout: self.ident()? }
        } else {
            Trigger::Completion
        };

        let guard = if self.eat(Token::LBracket) {
            let g = self.expr()?;
            self.expect(Token::RBracket)?;
            Some(g)
        } else {
            None
        };

        let mut actions = Vec::new();
        if self.eat(Token::Slash) {
            actions.push(self.action()?);
            while self.eat(Token::Comma) {
                actions.push(self.action()?);
            }
        }

        let event = if self.eat_kw("as") { Some(self.ident()?) } else { None };
        let stereotype = if self.eat_kw("error") { Stereotype::Error } else { Stereotype::Nominal };
        let visibility =
            if self.eat_kw("internal") { Visibility::Internal } else { Visibility::Visible };
        self.expect(Token::Semi)?;

        Ok(Transition { source, target, trigger, guard, actions, event, stereotype, visibility })
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        if self.eat_kw("emit") {
            let label = self.ident()?;
            let payload = if self.eat(Token::LParen) {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Some(e)
            } else {
                None
            };
            return Ok(Action::Emit { label, payload });
        }
        if self.eat_kw("bcast") {
            let label = self.ident()?;
            self.expect(Token::LParen)?;
            let payload = self.expr()?;
            self.expect(Token::RParen)?;
            return Ok(Action::Broadcast { label, payload });
        }
        let name = self.ident()?;
        if self.eat(Token::ColonEq) {
            return Ok(Action::Assign { var: name, value: self.expr()? });
        }
        self.expect(Token::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Token::RParen {
            args.push(self.expr()?);
            while self.eat(Token::Comma) {
                args.push(self.expr()?);
            }
        }
        self.expect(Token::RParen)?;
        Ok(Action::Invoke { op: name, args })
    }

    fn composition(&mut self) -> Result<SoSComposition, ParseError> {
        self.expect_kw("sos")?;
        let name = self.ident()?;
        self.expect(Token::LBrace)?;
        let mut instances = Vec::new();
        let mut connections = Vec::new();
        while *self.peek() != Token::RBrace {
            if self.eat_kw("instance") {
                let iname = self.ident()?;
                self.expect(Token::Colon)?;
                let contract = self.ident()?;
                self.expect(Token::LParen)?;
                let mut actuals = Vec::new();
                if *self.peek() != Token::RParen {
                    actuals.push(self.expr()?);
                    while self.eat(Token::Comma) {
                        actuals.push(self.expr()?);
                    }
                }
                self.expect(Token::RParen)?;
                let multiplicity = if self.eat(Token::Star) {
                    let pos = self.pos();
                    match self.next() {
                        Token::Int(v) if v >= 1 && v <= u32::MAX as i64 => v as u32,
                        other => {
                            return Err(ParseError {
                                pos,
                                message: format!("expected a positive multiplicity, found {other}"),
                            })
                        }
                    }
                } else {
                    1
                };
                self.expect(Token::Semi)?;
                instances.push(InstanceDecl { name: iname, contract, actuals, multiplicity });
            } else if self.eat_kw("connect") {
                let from = self.endpoint()?;
                self.expect(Token::Arrow)?;
                let to = self.endpoint()?;
                self.expect(Token::Colon)?;
                self.expect(Token::LBrace)?;
                let labels = self.ident_list()?;
                self.expect(Token::RBrace)?;
                self.expect(Token::Semi)?;
                connections.push(Connection { from, to, labels });
            } else {
                return Err(self.err(format!(
                    "expected `instance` or `connect`, found {}",
                    self.peek()
                )));
            }
        }
        self.expect(Token::RBrace)?;
        Ok(SoSComposition { name, instances, connections })
    }

    fn endpoint(&mut self) -> Result<Endpoint, ParseError> {
        let instance = self.ident()?;
        self.expect(Token::Dot)?;
        let port = self.ident()?;
        Ok(Endpoint { instance, port })
    }

    fn dependability(&mut self) -> Result<DependabilityModel, ParseError> {
        self.expect_kw("dependability")?;
        self.expect(Token::LBrace)?;
        let mut d = DependabilityModel::default();
        while *self.peek() != Token::RBrace {
            if self.at_kw("fault") || self.at_kw("error") || self.at_kw("failure") {
                let kind = match self.ident()?.as_str() {
                    "fault" => DysfunctionKind::Fault,
                    "error" => DysfunctionKind::Error,
                    _ => DysfunctionKind::Failure,
                };
                let dy = self.dysfunction()?;
                match kind {
                    DysfunctionKind::Fault => d.faults.push(dy),
                    DysfunctionKind::Error => d.errors.push(dy),
                    DysfunctionKind::Failure => d.failures.push(dy),
                }
            } else if self.eat_kw("causes") {
                let from = self.ident()?;
                self.expect(Token::Arrow)?;
                let to = self.ident()?;
                self.expect(Token::Semi)?;
                d.edges.push(DepEdge::Causes { from, to });
            } else if self.eat_kw("located_in") {
                let dysfunction = self.ident()?;
                self.expect_kw("in")?;
                let model = self.ident()?;
                self.expect(Token::Semi)?;
                d.edges.push(DepEdge::LocatedIn { dysfunction, model });
            } else if self.eat_kw("affects") {
                let (dysfunction, model) = self.arrow_pair()?;
                d.edges.push(DepEdge::Affects { dysfunction, model });
            } else if self.eat_kw("exhibited_by") {
                let (dysfunction, model) = self.arrow_pair()?;
                d.edges.push(DepEdge::ExhibitedBy { dysfunction, model });
            } else if self.eat_kw("mitigated_by") {
                let (dysfunction, model) = self.arrow_pair()?;
                d.edges.push(DepEdge::MitigatedBy { dysfunction, model });
            } else if self.eat_kw("waived") {
                let dysfunction = self.ident()?;
                let reason = self.string()?;
                self.expect(Token::Semi)?;
                d.waived.push(Waiver { dysfunction, reason });
            } else {
                return Err(self.err(format!(
                    "expected a dependability item, found {}",
                    self.peek()
                )));
            }
        }
        self.expect(Token::RBrace)?;
        Ok(d)
    }

    fn arrow_pair(&mut self) -> Result<(String, String), ParseError> {
        let a = self.ident()?;
        self.expect(Token::Arrow)?;
        let b = self.ident()?;
        self.expect(Token::Semi)?;
        Ok((a, b))
    }

    fn dysfunction(&mut self) -> Result<Dysfunction, ParseError> {
        let id = self.ident()?;
        self.expect_kw("level")?;
        self.expect(Token::Eq)?;
        let pos = self.pos();
        let level = match self.ident()?.as_str() {
            "CS" => Level::Cs,
            "SOS" => Level::Sos,
            other => {
                return Err(ParseError {
                    pos,
                    message: format!("expected `CS` or `SOS`, found `{other}`"),
                })
            }
        };
        let mut persistence = Persistence::Unspecified;
        if self.eat_kw("persistence") {
            self.expect(Token::Eq)?;
            let pos = self.pos();
            persistence = match self.ident()?.as_str() {
                "TRANSIENT" => Persistence::Transient,
                "PERMANENT" => Persistence::Permanent,
                other => {
                    return Err(ParseError {
                        pos,
                        message: format!("expected `TRANSIENT` or `PERMANENT`, found `{other}`"),
                    })
                }
            };
        }
        let mut name = String::new();
        if self.eat_kw("name") {
            self.expect(Token::Eq)?;
            name = self.string()?;
        }
        let mut description = String::new();
        if self.eat_kw("desc") {
            self.expect(Token::Eq)?;
            description = self.string()?;
        }
        self.expect(Token::Semi)?;
        Ok(Dysfunction { id, name, description, level, persistence })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.eat(Token::OrOr) {
            e = Expr::bin(sosc_core::BinOp::Or, e, self.and_expr()?);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.cmp_expr()?;
        while self.eat(Token::AndAnd) {
            e = Expr::bin(sosc_core::BinOp::And, e, self.cmp_expr()?);
        }
        Ok(e)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        use sosc_core::BinOp::*;
        let e = self.add_expr()?;
        let op = match self.peek() {
            Token::EqEq => Eq,
            Token::BangEq => Ne,
            Token::Lt => Lt,
            Token::Le => Le,
            Token::Gt => Gt,
            Token::Ge => Ge,
            _ => return Ok(e),
        };
        self.next();
        let rhs = self.add_expr()?;
        Ok(Expr::bin(op, e, rhs))
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        use sosc_core::BinOp::*;
        let mut e = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Token::Plus => Add,
                Token::Minus => Sub,
                _ => return Ok(e),
            };
            self.next();
            e = Expr::bin(op, e, self.mul_expr()?);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        use sosc_core::BinOp::*;
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => Mul,
                Token::Slash => Div,
                Token::Percent => Mod,
                _ => return Ok(e),
            };
            self.next();
            e = Expr::bin(op, e, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(Token::Bang) {
            return Ok(Expr::Un(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.eat(Token::Minus) {
            // A negated literal is one literal, keeping the canonical
            // form stable under reparsing.
            return Ok(match self.unary()? {
                Expr::Lit(Value::Int(n)) => Expr::int(-n),
                other => Expr::Un(UnOp::Neg, Box::new(other)),
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.eat(Token::Dot) {
            let pos = self.pos();
            let name = self.ident()?;
            let Some(f) = Field::parse(&name) else {
                return Err(ParseError { pos, message: format!("unknown message field `{name}`") });
            };
            e = Expr::field(e, f);
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Token::Int(v) => {
                self.next();
                Ok(Expr::int(v))
            }
            Token::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) => {
                self.next();
                match name.as_str() {
                    "true" => return Ok(Expr::bool(true)),
                    "false" => return Ok(Expr::bool(false)),
                    "none" => return Ok(Expr::Lit(Value::Unit)),
                    "DATA" | "ACK" => return Ok(Expr::Lit(Value::Sym(name))),
                    _ => {}
                }
                if *self.peek() == Token::LParen {
                    let Some(b) = Builtin::parse(&name) else {
                        return Err(ParseError {
                            pos,
                            message: format!("unknown function `{name}` in an expression"),
                        });
                    };
                    self.next();
                    let mut args = Vec::new();
                    if *self.peek() != Token::RParen {
                        args.push(self.expr()?);
                        while self.eat(Token::Comma) {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect(Token::RParen)?;
                    if args.len() != b.arity() {
                        return Err(ParseError {
                            pos,
                            message: format!(
                                "`{name}` takes {} arguments, {} given",
                                b.arity(),
                                args.len()
                            ),
                        });
                    }
                    return Ok(Expr::call(b, args));
                }
                Ok(Expr::Var(name))
            }
            other => Err(self.err(format!("expected an expression, found {other}"))),
        }
    }
}
