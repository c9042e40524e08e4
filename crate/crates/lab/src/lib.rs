//! File formats, a rayon executor, the run configuration and the batch
//! pipeline around `ardl-core`.

pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{LabError, Result};
pub use exec::Rayon;
pub use pipeline::{run_pipeline, run_single};
pub use report::emit_report;
