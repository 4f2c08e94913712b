use std::fmt;

use chrono::{DateTime, FixedOffset, SecondsFormat};
use indexmap::IndexMap;

/// A typed attribute payload. Each variant corresponds to exactly one XES element kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Text(String),
    Number(f64),
    Timestamp(DateTime<FixedOffset>),
    Flag(bool),
    Integer(i64),
}

impl AttrValue {
    /// Name of the XES element that carries this variant.
    pub fn xes_tag(&self) -> &'static str {
        match self {
            AttrValue::Text(_) => "string",
            AttrValue::Number(_) => "float",
            AttrValue::Timestamp(_) => "date",
            AttrValue::Flag(_) => "boolean",
            AttrValue::Integer(_) => "int",
        }
    }

    /// Numeric view used when tabulating. Integers widen to `f64`, flags map to 0/1.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttrValue::Number(v) => Some(*v),
            AttrValue::Integer(v) => Some(*v as f64),
            AttrValue::Flag(b) => Some(if *b { 1.0 } else { 0.0 }),
            AttrValue::Text(_) | AttrValue::Timestamp(_) => None,
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Text(s) => f.write_str(s),
            AttrValue::Number(v) => write!(f, "{v}"),
            AttrValue::Timestamp(t) => f.write_str(&format_timestamp(t)),
            AttrValue::Flag(b) => write!(f, "{b}"),
            AttrValue::Integer(i) => write!(f, "{i}"),
        }
    }
}

pub(crate) fn format_timestamp(t: &DateTime<FixedOffset>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// Value of `concept:name`.
    pub name: String,
    /// Remaining attributes in document order (`concept:name` and `time:timestamp` excluded).
    pub attributes: IndexMap<String, AttrValue>,
    /// Value of `time:timestamp`.
    pub timestamp: Option<DateTime<FixedOffset>>,
}

impl Event {
    pub fn new(name: impl Into<String>) -> Self {
        Event {
            name: name.into(),
            attributes: IndexMap::new(),
            timestamp: None,
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: AttrValue) -> Self {
        self.attributes.insert(key.into(), value);
        self
    }

    pub fn with_timestamp(mut self, ts: DateTime<FixedOffset>) -> Self {
        self.timestamp = Some(ts);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
    /// Trace-level attributes in document order, including the id attribute when present.
    pub trace_attributes: IndexMap<String, AttrValue>,
}

impl Trace {
    /// Looks an attribute up on the events (last write wins), falling back to the trace level.
    pub fn find_attr(&self, key: &str) -> Option<&AttrValue> {
        self.events
            .iter()
            .rev()
            .find_map(|e| e.attributes.get(key))
            .or_else(|| self.trace_attributes.get(key))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub traces: Vec<Trace>,
    /// Where the log came from (file path, generator description, ...).
    pub source: String,
    /// Non-fatal issues recorded during ingestion.
    pub warnings: Vec<String>,
}

impl EventLog {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }
}
