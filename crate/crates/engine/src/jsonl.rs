//! Trace serialization: one JSON object per line, final line a
//! terminal marker. Key order is fixed so equal runs serialize to
//! identical bytes.

use std::fmt::Write as _;

use thiserror::Error;

use sosc_core::{Envelope, Event, MsgKind, Terminal, Trace, Value, Visibility};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonlError {
    #[error("line {0}: {1}")]
    Line(usize, String),
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Unit => out.push_str("null"),
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Value::Sym(s) => out.push_str(&serde_json::to_string(s).expect("string encodes")),
        Value::Msg(m) => {
            let _ = write!(out, "{{\"src\":{},\"dst\":{},\"seq\":{},\"kind\":\"{}\",\"payload\":", m.src, m.dst, m.seq, m.kind);
            write_value(out, &m.payload);
            out.push('}');
        }
    }
}

pub fn event_line(e: &Event) -> String {
    let kind = match e.kind {
        Visibility::Visible => "VISIBLE",
        Visibility::Internal => "INTERNAL",
    };
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"t\":{},\"inst\":{},\"label\":{},\"kind\":\"{}\",\"payload\":",
        e.t,
        serde_json::to_string(&e.inst).expect("string encodes"),
        serde_json::to_string(&e.label).expect("string encodes"),
        kind,
    );
    write_value(&mut out, &e.payload);
    out.push('}');
    out
}

/// Serializes a trace; ends with a `{"terminal": ...}` line when the
/// trace records why the run stopped.
pub fn write_trace(trace: &Trace) -> String {
    let mut out = String::new();
    for e in &trace.events {
        out.push_str(&event_line(e));
        out.push('\n');
    }
    if let Some(t) = trace.terminal {
        let _ = writeln!(out, "{{\"terminal\":\"{}\"}}", t.name());
    }
    out
}

fn value_from_json(v: &serde_json::Value) -> Result<Value, String> {
    match v {
        serde_json::Value::Null => Ok(Value::Unit),
        serde_json::Value::Bool(b) => Ok(Value::Bool(*b)),
        serde_json::Value::Number(n) => {
            n.as_i64().map(Value::Int).ok_or_else(|| format!("non-integer number {n}"))
        }
        serde_json::Value::String(s) => Ok(Value::Sym(s.clone())),
        serde_json::Value::Object(o) => {
            let int = |k: &str| -> Result<i64, String> {
                o.get(k)
                    .and_then(|x| x.as_i64())
                    .ok_or_else(|| format!("message field `{k}` missing or not an integer"))
            };
            let kind = match o.get("kind").and_then(|x| x.as_str()) {
                Some("DATA") => MsgKind::Data,
                Some("ACK") => MsgKind::Ack,
                other => return Err(format!("bad message kind {other:?}")),
            };
            let payload = o.get("payload").ok_or("message payload missing")?;
            Ok(Value::Msg(Envelope {
                src: int("src")?,
                dst: int("dst")?,
                seq: int("seq")?,
                kind,
                payload: Box::new(value_from_json(payload)?),
            }))
        }
        serde_json::Value::Array(_) => Err("arrays have no model value".into()),
    }
}

pub fn parse_trace(text: &str) -> Result<Trace, JsonlError> {
    let mut trace = Trace::default();
    for (k, line) in text.lines().enumerate() {
        let err = |m: String| JsonlError::Line(k + 1, m);
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let o = v.as_object().ok_or_else(|| err("not an object".into()))?;
        if let Some(t) = o.get("terminal") {
            let name = t.as_str().ok_or_else(|| err("terminal is not a string".into()))?;
            trace.terminal = Some(
                Terminal::parse(name).ok_or_else(|| err(format!("unknown terminal `{name}`")))?,
            );
            continue;
        }
        let s = |k: &str| -> Result<String, JsonlError> {
            o.get(k)
                .and_then(|x| x.as_str())
                .map(str::to_string)
                .ok_or_else(|| err(format!("field `{k}` missing or not a string")))
        };
        let kind = match s("kind")?.as_str() {
            "VISIBLE" => Visibility::Visible,
            "INTERNAL" => Visibility::Internal,
            other => return Err(err(format!("unknown visibility `{other}`"))),
        };
        trace.events.push(Event {
            t: o.get("t")
                .and_then(|x| x.as_u64())
                .ok_or_else(|| err("field `t` missing or not an integer".into()))?,
            inst: s("inst")?,
            label: s("label")?,
            kind,
            payload: value_from_json(
                o.get("payload").ok_or_else(|| err("field `payload` missing".into()))?,
            )
            .map_err(err)?,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trace {
        Trace {
            events: vec![
                Event {
                    t: 0,
                    inst: "dev_1".into(),
                    label: "send".into(),
                    kind: Visibility::Visible,
                    payload: Value::Msg(Envelope {
                        src: 1,
                        dst: 2,
                        seq: 0,
                        kind: MsgKind::Data,
                        payload: Box::new(Value::Int(7)),
                    }),
                },
                Event {
                    t: 1,
                    inst: "tl".into(),
                    label: "tau".into(),
                    kind: Visibility::Internal,
                    payload: Value::Unit,
                },
            ],
            terminal: Some(Terminal::DeadlockBeforeBound),
        }
    }

    #[test]
    fn round_trips() {
        let text = write_trace(&sample());
        let back = parse_trace(&text).unwrap();
        assert_eq!(back, sample());
        assert_eq!(write_trace(&back), text);
    }

    #[test]
    fn key_order_is_fixed() {
        let text = write_trace(&sample());
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("{\"t\":0,\"inst\":\"dev_1\",\"label\":\"send\",\"kind\":\"VISIBLE\",\"payload\":{\"src\":1,"));
        assert!(text.ends_with("{\"terminal\":\"DEADLOCK_BEFORE_BOUND\"}\n"));
    }

    #[test]
    fn bad_lines_report_position() {
        let err = parse_trace("{\"t\":0}\n").unwrap_err();
        assert!(matches!(err, JsonlError::Line(1, _)));
    }
}
