//! Command-line front end: input formats, initialization-method
//! selection, the fit/scan-k/simulate subcommands, and the benchmark
//! matrix with its CSV outputs.

pub mod benchmark;
pub mod commands;
pub mod error;
pub mod io;
pub mod method;

pub use benchmark::{cmd_benchmark, run_benchmark, BenchmarkPlan, BenchmarkResults};
pub use commands::{cmd_fit, cmd_scan_k, cmd_simulate, FitArgs, ScanArgs, SimulateArgs};
pub use error::{AppError, AppResult};
pub use io::{read_model, read_points_csv, read_spectra, InputFormat, ModelFile};
pub use method::Method;
