//! Reading and writing XES event logs.
//!
//! The reader accepts XES 1.0-style documents: `log`, `trace` and `event` elements carrying
//! typed attribute children (`string`, `int`, `float`, `date`, `boolean`) with `key`/`value`
//! attributes. Extensions, classifiers and globals are parsed past and ignored. A bare
//! `<trace>` root (as found in log excerpts) is accepted as well.

use std::collections::HashSet;
use std::io::{self, Write};

use chrono::{DateTime, FixedOffset, NaiveDateTime};
use indexmap::IndexMap;
use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use super::model::{format_timestamp, AttrValue, Event, EventLog, Trace};
use crate::error::{Error, Result};

pub const CONCEPT_NAME: &str = "concept:name";
pub const TIMESTAMP: &str = "time:timestamp";

const TYPED_TAGS: [&str; 5] = ["string", "int", "float", "date", "boolean"];

#[derive(Debug)]
enum Scope {
    Trace(TraceBuilder),
    Event(EventBuilder),
    Other,
}

#[derive(Debug, Default)]
struct TraceBuilder {
    attributes: IndexMap<String, AttrValue>,
    events: Vec<Event>,
}

#[derive(Debug, Default)]
struct EventBuilder {
    name: Option<String>,
    timestamp: Option<DateTime<FixedOffset>>,
    attributes: IndexMap<String, AttrValue>,
}

/// Parses an XES document. `id_key` names the trace-level attribute used as case id.
pub fn parse_xes(input: &[u8], id_key: &str) -> Result<EventLog> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().trim_text(true);

    let mut stack: Vec<Scope> = Vec::new();
    let mut log = EventLog::default();
    let mut seen = HashSet::new();

    loop {
        let pos = reader.buffer_position() as usize;
        let event = reader
            .read_event()
            .map_err(|e| xml_error(input, reader.error_position() as usize, e.to_string()))?;
        match event {
            XmlEvent::Start(start) => {
                let tag = local_name(&start);
                match (tag.as_str(), stack.last()) {
                    ("trace", None | Some(Scope::Other)) => {
                        stack.push(Scope::Trace(TraceBuilder::default()))
                    }
                    ("event", Some(Scope::Trace(_))) => {
                        stack.push(Scope::Event(EventBuilder::default()))
                    }
                    (t, Some(Scope::Trace(_) | Scope::Event(_))) if TYPED_TAGS.contains(&t) => {
                        let attr = read_typed(input, pos, &start, t)?;
                        push_attr(&mut stack, attr);
                        // Nested meta-attributes are not modelled.
                        reader.read_to_end(start.name()).map_err(|e| {
                            xml_error(input, reader.error_position() as usize, e.to_string())
                        })?;
                    }
                    (t, Some(Scope::Trace(_) | Scope::Event(_))) => {
                        log.warnings.push(format!("skipping unknown element <{t}>"));
                        reader.read_to_end(start.name()).map_err(|e| {
                            xml_error(input, reader.error_position() as usize, e.to_string())
                        })?;
                    }
                    _ => stack.push(Scope::Other),
                }
            }
            XmlEvent::Empty(start) => {
                let tag = local_name(&start);
                match (tag.as_str(), stack.last()) {
                    ("trace", None | Some(Scope::Other)) => {
                        finish_trace(TraceBuilder::default(), id_key, &mut log, &mut seen)?
                    }
                    ("event", Some(Scope::Trace(_))) => {
                        return Err(xml_error(input, pos, "event without concept:name".into()))
                    }
                    (t, Some(Scope::Trace(_) | Scope::Event(_))) if TYPED_TAGS.contains(&t) => {
                        let attr = read_typed(input, pos, &start, t)?;
                        push_attr(&mut stack, attr);
                    }
                    (t, Some(Scope::Trace(_) | Scope::Event(_))) => {
                        log.warnings.push(format!("skipping unknown element <{t}>"));
                    }
                    _ => {}
                }
            }
            XmlEvent::End(_) => match stack.pop() {
                Some(Scope::Trace(tb)) => finish_trace(tb, id_key, &mut log, &mut seen)?,
                Some(Scope::Event(eb)) => {
                    let name = eb.name.filter(|n| !n.is_empty()).ok_or_else(|| {
                        xml_error(input, pos, "event without concept:name".into())
                    })?;
                    let event = Event {
                        name,
                        attributes: eb.attributes,
                        timestamp: eb.timestamp,
                    };
                    match stack.last_mut() {
                        Some(Scope::Trace(tb)) => tb.events.push(event),
                        _ => unreachable!("events are only opened inside traces"),
                    }
                }
                Some(Scope::Other) | None => {}
            },
            XmlEvent::Eof => break,
            _ => {}
        }
    }

    if !stack.is_empty() {
        return Err(xml_error(
            input,
            input.len(),
            "unexpected end of document".into(),
        ));
    }
    Ok(log)
}

fn local_name(start: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(start.local_name().as_ref()).into_owned()
}

fn push_attr(stack: &mut [Scope], (key, value): (String, AttrValue)) {
    match stack.last_mut() {
        Some(Scope::Trace(tb)) => {
            tb.attributes.insert(key, value);
        }
        Some(Scope::Event(eb)) => match (key.as_str(), value) {
            (CONCEPT_NAME, v) => eb.name = Some(v.to_string()),
            (TIMESTAMP, AttrValue::Timestamp(t)) => eb.timestamp = Some(t),
            (_, v) => {
                eb.attributes.insert(key, v);
            }
        },
        _ => {}
    }
}

fn finish_trace(
    tb: TraceBuilder,
    id_key: &str,
    log: &mut EventLog,
    seen: &mut HashSet<String>,
) -> Result<()> {
    let index = log.traces.len();
    let case_id = match tb.attributes.get(id_key) {
        Some(v) if !v.to_string().is_empty() => v.to_string(),
        _ => {
            log.warnings.push(format!(
                "trace {index} has no `{id_key}` attribute; using trace-{index}"
            ));
            format!("trace-{index}")
        }
    };
    if !seen.insert(case_id.clone()) {
        return Err(Error::DuplicateCase(case_id));
    }
    log.traces.push(Trace {
        case_id,
        events: tb.events,
        trace_attributes: tb.attributes,
    });
    Ok(())
}

fn read_typed(
    input: &[u8],
    pos: usize,
    start: &BytesStart<'_>,
    tag: &str,
) -> Result<(String, AttrValue)> {
    let mut key = None;
    let mut raw = None;
    for attr in start.attributes() {
        let attr = attr.map_err(|e| xml_error(input, pos, e.to_string()))?;
        let value = attr
            .unescape_value()
            .map_err(|e| xml_error(input, pos, e.to_string()))?
            .into_owned();
        match attr.key.as_ref() {
            b"key" => key = Some(value),
            b"value" => raw = Some(value),
            _ => {}
        }
    }
    let key = key.ok_or_else(|| xml_error(input, pos, format!("<{tag}> without key")))?;
    let raw =
        raw.ok_or_else(|| xml_error(input, pos, format!("<{tag} key='{key}'> without value")))?;
    let bad = |what: &str| {
        xml_error(
            input,
            pos,
            format!("invalid {what} value `{raw}` for key `{key}`"),
        )
    };
    let value = match tag {
        "string" => AttrValue::Text(raw.clone()),
        "int" => AttrValue::Integer(raw.trim().parse().map_err(|_| bad("int"))?),
        "float" => {
            let v: f64 = raw.trim().parse().map_err(|_| bad("float"))?;
            if !v.is_finite() {
                return Err(bad("non-finite float"));
            }
            AttrValue::Number(v)
        }
        "boolean" => match raw.trim() {
            "true" => AttrValue::Flag(true),
            "false" => AttrValue::Flag(false),
            _ => return Err(bad("boolean")),
        },
        "date" => AttrValue::Timestamp(parse_date(raw.trim()).ok_or_else(|| bad("date"))?),
        _ => unreachable!("caller filters typed tags"),
    };
    Ok((key, value))
}

fn parse_date(raw: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Some(t);
    }
    // Zone-less timestamps are read as UTC.
    NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f")
        .ok()
        .map(|n| n.and_utc().fixed_offset())
}

fn xml_error(input: &[u8], offset: usize, message: String) -> Error {
    let offset = offset.min(input.len());
    let before = &input[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = before
        .iter()
        .rposition(|&b| b == b'\n')
        .map_or(0, |p| p + 1);
    Error::Xml {
        line,
        column: offset - line_start + 1,
        message,
    }
}

/// Writes `log` in the element/key style of the usual XES excerpts (single-quoted attributes,
/// one-space indentation). `write(parse(write(log)))` is byte-identical to `write(log)`.
pub fn write_xes<W: Write>(log: &EventLog, mut out: W) -> io::Result<()> {
    writeln!(out, "<?xml version='1.0' encoding='UTF-8'?>")?;
    writeln!(out, "<log xes.version='1.0'>")?;
    for trace in &log.traces {
        writeln!(out, " <trace>")?;
        for (key, value) in &trace.trace_attributes {
            write_attr(&mut out, 2, key, value)?;
        }
        for event in &trace.events {
            writeln!(out, "  <event>")?;
            write_attr(
                &mut out,
                3,
                CONCEPT_NAME,
                &AttrValue::Text(event.name.clone()),
            )?;
            for (key, value) in &event.attributes {
                write_attr(&mut out, 3, key, value)?;
            }
            if let Some(ts) = &event.timestamp {
                write_attr(&mut out, 3, TIMESTAMP, &AttrValue::Timestamp(*ts))?;
            }
            writeln!(out, "  </event>")?;
        }
        writeln!(out, " </trace>")?;
    }
    writeln!(out, "</log>")
}

fn write_attr<W: Write>(
    out: &mut W,
    indent: usize,
    key: &str,
    value: &AttrValue,
) -> io::Result<()> {
    let rendered = match value {
        AttrValue::Timestamp(t) => format_timestamp(t),
        other => other.to_string(),
    };
    writeln!(
        out,
        "{:indent$}<{} key='{}' value='{}'/>",
        "",
        value.xes_tag(),
        escape(key),
        escape(rendered.as_str()),
    )
}

pub fn to_xes_string(log: &EventLog) -> String {
    let mut buf = Vec::new();
    write_xes(log, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("XES writer emits UTF-8")
}
