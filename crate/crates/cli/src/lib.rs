//! Workflow layer behind the `sfsdfc` binary: argument surface, the three
//! subcommands (select, eval, bench), and the benchmark report format.
//! Everything the binary can do is callable from here, which is also how
//! the integration tests drive it without spawning processes.

pub mod commands;
pub mod config;
pub mod report;

pub use config::{Cli, Command};

/// Dispatch a parsed invocation.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Select(args) => commands::cmd_select(args),
        Command::Eval(args) => commands::cmd_eval(args),
        Command::Bench(args) => commands::cmd_bench(args),
    }
}
