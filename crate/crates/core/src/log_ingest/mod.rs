//! Event log ingestion: the in-memory log model, XES reading/writing and flat CSV tables.

mod csv;
mod model;
mod xes;

pub use self::csv::{parse_csv, CsvOptions};
pub use model::{AttrValue, Event, EventLog, Trace};
pub use xes::{parse_xes, to_xes_string, write_xes, CONCEPT_NAME, TIMESTAMP};
