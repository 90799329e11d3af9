//! Experiment runner: configuration, seeded runs, scaling sweeps, output files.

pub mod config;
pub mod emit;
pub mod run;
pub mod scale;

pub use config::{Algorithm, IndicatorKind, RunConfig};
pub use emit::{emit, parse_csv, read_csv, read_json, write_records, CsvRecord, CsvRow, EmitFormat, CSV_HEADER};
pub use run::{run, run_single, GenerationRow, RunMetadata, RunRecord, RunSummary};
pub use scale::{scaling_experiment, ScaleKind, ScaleRow, ScaleTable};
