//! Decision mining over process event logs.
//!
//! The pipeline reads an XES log (or a pre-flattened CSV), flattens each trace to one row,
//! optionally adds pairwise comparison features, grows a CART tree and reads conjunctive
//! rules off its paths. Rules can then be scored against a declared ground truth.

pub mod approach;
pub mod cart;
pub mod error;
pub mod latent;
pub mod log_ingest;
pub mod metrics;
pub mod pipeline;
pub mod registry;
pub mod rules;
pub mod synthgen;
pub mod tabulate;

pub use error::{Error, Result};
