//! Library backing the `pdcov` binary. The command runners are exposed so
//! integration tests can drive them in-process and compare outputs byte for
//! byte.

pub mod args;
pub mod commands;
pub mod csvio;
pub mod report;
pub mod select;

use std::fmt;

pub use args::{Cli, Command};

/// CLI-level error with the exit code it maps to: 2 for usage/input
/// problems, 3 for numerical failures.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<pdcov::Error> for CliError {
    fn from(e: pdcov::Error) -> Self {
        match e {
            pdcov::Error::ConvergenceFailure { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Runs a command inside a rayon pool capped at `threads` workers
/// (0 = default). Results are schedule-independent, so the cap only affects
/// speed.
pub fn with_thread_pool<T>(
    threads: usize,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::input(format!("cannot build thread pool: {e}")))?;
    pool.install(f)
}

/// Dispatches a parsed command line. Output files land on disk; stdout
/// output is returned for the caller to print.
pub fn run(cli: Cli) -> Result<Option<String>, CliError> {
    match cli.command {
        Command::Test(args) => commands::test::run(&args),
        Command::Graph(args) => commands::graph::run(&args),
        Command::Simulate(args) => commands::simulate::run(&args),
        Command::Roc(args) => commands::roc::run(&args),
    }
}
