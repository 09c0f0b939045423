//! Text format for contract, composition, and dependability models.
//!
//! One document holds any number of `contract` and `sos` blocks and
//! at most one `dependability` block. `parse_document` and
//! `serialize_document` are inverse on the canonical form the
//! serializer produces.

pub mod lexer;
pub mod parser;
pub mod serialize;

use sosc_core::{validate_document, Contract, DependabilityModel, Diagnostic, SoSComposition};

pub use lexer::{lex, LexError, Pos, Token};
pub use parser::{parse_document, parse_expr, ParseError};
pub use serialize::{expr_to_string, serialize_document};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelDocument {
    pub contracts: Vec<Contract>,
    pub compositions: Vec<SoSComposition>,
    pub dependability: Option<DependabilityModel>,
}

impl ModelDocument {
    pub fn validate(&self) -> Vec<Diagnostic> {
        validate_document(&self.contracts, &self.compositions, self.dependability.as_ref())
    }

    pub fn contract(&self, name: &str) -> Option<&Contract> {
        self.contracts.iter().find(|c| c.name == name)
    }

    pub fn composition(&self, name: &str) -> Option<&SoSComposition> {
        self.compositions.iter().find(|s| s.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sosc_core::{Action, StateKind, Stereotype, Trigger, Visibility};

    const SAMPLE: &str = r#"
# A sender with one nested receiver region.
contract Pump {
  param myId: int;
  var sent: int := 0;
  op push(v: int) pre v >= 0 post sent' == sent + 1;
  invariant sent >= 0;
  protocol {
    var k: int := 1;
    initial state Idle;
    state Idle;
    state Run {
      initial state Inner;
      state Inner;
      trans Inner -> Inner after t_poll / emit beat;
    }
    trans Idle -> Run on go(m) [m.kind == DATA] / k := k + 1, push(k);
    trans Run -> Idle [k > 3] as wrap error internal;
  }
}

sos Pair {
  instance p: Pump($i) * 2;
  connect p_1.out -> p_2.in : { beat };
}

dependability {
  fault Flaky level=SOS persistence=TRANSIENT name="flaky link";
  failure Lost level=CS;
  causes Lost -> Flaky;
  mitigated_by Flaky -> Pump;
  waived Flaky "accepted for the demo";
}
"#;

    #[test]
    fn parses_the_kitchen_sink_sample() {
        let doc = parse_document(SAMPLE).unwrap();
        assert_eq!(doc.contracts.len(), 1);
        assert_eq!(doc.compositions.len(), 1);
        let c = &doc.contracts[0];
        assert_eq!(c.protocol.local_vars.len(), 1);
        assert_eq!(c.protocol.root.states.len(), 2);
        let run = c.protocol.root.state("Run").unwrap();
        assert!(matches!(run.kind, StateKind::Composite(_)));
        let t = &c.protocol.root.transitions[1];
        assert_eq!(t.event.as_deref(), Some("wrap"));
        assert_eq!(t.stereotype, Stereotype::Error);
        assert_eq!(t.visibility, Visibility::Internal);
        assert!(matches!(c.protocol.root.transitions[0].trigger, Trigger::On { .. }));
        assert!(matches!(c.protocol.root.transitions[0].actions[1], Action::Invoke { .. }));
        let d = doc.dependability.as_ref().unwrap();
        assert_eq!(d.faults.len(), 1);
        assert_eq!(d.waived.len(), 1);
    }

    #[test]
    fn canonical_form_is_a_fixpoint() {
        let doc = parse_document(SAMPLE).unwrap();
        let first = serialize_document(&doc);
        let reparsed = parse_document(&first).unwrap();
        assert_eq!(reparsed, doc);
        assert_eq!(serialize_document(&reparsed), first);
    }

    #[test]
    fn expression_precedence_round_trips() {
        for src in [
            "a + b * c",
            "(a + b) * c",
            "!(a && b) || c < d + 1",
            "-m.seq + max(x, y) - 3",
            "hasbit(heard, m.src) == false",
            "(a == b) == (c == d)",
            "a - -5",
            "data(2, 0, best).payload",
        ] {
            let e = parse_expr(src).unwrap();
            let printed = expr_to_string(&e);
            assert_eq!(parse_expr(&printed).unwrap(), e, "through `{printed}`");
        }
    }

    #[test]
    fn error_positions_point_at_the_offending_token() {
        let src = "contract C {\n  param x int;\n}";
        let err = parse_document(src).unwrap_err();
        assert_eq!(err.pos.line, 2);
        assert_eq!(err.pos.col, 11);
    }

    #[test]
    fn rejects_second_dependability_block() {
        let err = parse_document("dependability { }\ndependability { }").unwrap_err();
        assert!(err.message.contains("at most one"));
        assert_eq!(err.pos.line, 2);
    }

    #[test]
    fn unknown_function_is_rejected_in_expressions() {
        let err = parse_expr("frobnicate(1)").unwrap_err();
        assert!(err.message.contains("frobnicate"));
    }
}
