//! Scenario documents: schema, runner, output writers and built-in demos.

pub mod config;
pub mod demos;
pub mod output;
pub mod run;

pub use config::{parse_scenario, to_json, Format, Measurement, MeasurementKind, Scenario, SourceSpec, SCHEMA_VERSION};
pub use demos::{demo, demo_catalog, demo_names};
pub use output::write_outputs;
pub use run::{compute, run_scenario, RunOptions, RunResults, RunSummary};
