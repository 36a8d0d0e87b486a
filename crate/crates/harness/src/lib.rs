//! File formats and export for the `pns-sim` experiment harness: TOML
//! scenario files, Mahi-mahi trace files, and CSV/JSON metric export.

pub mod config;
pub mod export;
pub mod trace;

pub use config::{load_config, parse_config, ConfigError};
pub use export::OutputFormat;
pub use trace::{load_trace, TraceError};
