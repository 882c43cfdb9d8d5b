//! The `finsler` command-line program.
//!
//! Every command resolves a space (a built-in name or a TOML spec file),
//! applies command-line overrides to the run settings and renders one
//! deterministic JSON or CSV document. Exit codes: 0 success, 1 usage error,
//! 2 domain or numerical error, 3 when a homogeneous geodesic is guaranteed
//! but the search certified none.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command, Format};
pub use commands::Output;
pub use config::{RunConfig, Settings, Space};
pub use error::CliError;

fn resolve_space(cli: &Cli) -> Result<(Option<Space>, Option<RunConfig>), CliError> {
    let c = &cli.common;
    match (&c.space, &c.config) {
        (Some(name), None) => {
            let spec = finsler_core::homspace::HomogeneousSpaceSpec::builtin(name)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            Ok((Some(Space::Chart(spec)), None))
        }
        (None, Some(path)) => {
            let config = RunConfig::load(path)?;
            Ok((Some(config.build_space()?), Some(config)))
        }
        (None, None) if matches!(cli.command, Command::Spaces { .. }) => Ok((None, None)),
        (None, None) => Err(CliError::Usage(
            "one of --space or --config is required".into(),
        )),
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--space and --config are mutually exclusive".into(),
        )),
    }
}

/// Runs a parsed command without touching stdout or the filesystem.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let (space, config) = resolve_space(cli)?;
    let settings = Settings::resolve(config.as_ref(), &cli.common.overrides())?;
    let ctx = commands::Ctx {
        command: cli.command.name(),
        space: space.as_ref(),
        settings: &settings,
        format: cli.common.format.unwrap_or(cli.command.default_format()),
    };
    match &cli.command {
        Command::Spaces { dim, filter } => commands::spaces(&ctx, *dim, filter.as_deref()),
        Command::Tensors { x, y } => commands::tensors(&ctx, x.as_deref(), y),
        Command::Geodesic { x, y, t_end } => commands::geodesic(&ctx, x.as_deref(), y, *t_end),
        Command::Search => commands::search(&ctx),
        Command::Verify { vector } => commands::verify(&ctx, vector),
        Command::SphereField => commands::sphere_field(&ctx),
    }
}

/// Parses `args`, runs the command, writes its output and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let out = match execute(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.body) {
                eprintln!("error: {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{}", out.body),
    }
    out.exit_code
}
