//! Library side of the `copydesc` command: configuration, the end-to-end
//! pipeline, self-checks and subcommand dispatch.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod failure;
pub mod logging;
pub mod pipeline;
pub mod selfcheck;

pub use commands::{run, Cli};
pub use config::{Overrides, PipelineConfig};
pub use failure::{Failure, EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE};
pub use pipeline::{run_pipeline, PipelineReport};
pub use selfcheck::{run_selfcheck, Expected, Summary};
