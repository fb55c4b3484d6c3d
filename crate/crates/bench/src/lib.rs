//! Benchmark harness for `cep-core`: synthetic streams, the event CSV
//! format, timed runs and metrics reports.

pub mod csv_io;
pub mod error;
pub mod gen;
pub mod metrics;
pub mod runner;

pub use error::BenchError;
pub use gen::{generate_stream, StreamSpec};
pub use metrics::{write_long_csv, MetricsReport};
pub use runner::{execute, load_pattern, measure_rates, read_rates, write_matches, RunConfig, RunResult};
