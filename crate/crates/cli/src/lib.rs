//! Plumbing behind the `entropy-wb` binary: marginal and table files,
//! JSON reports and command dispatch.

pub mod error;
pub mod io;
pub mod report;
pub mod run;

pub use error::{CliError, CliResult};
pub use run::{parse_n_list, run_command, Command, Method, Mode, RunConfig};
