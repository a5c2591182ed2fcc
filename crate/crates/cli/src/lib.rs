//! Library half of the `kmlqg` command-line tool: argument definitions,
//! configuration documents, CSV I/O and the subcommands themselves.

pub mod commands;
pub mod config;
pub mod csvio;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::execute;

#[derive(Debug, Parser)]
#[command(
    name = "kmlqg",
    version,
    about = "LQG policy optimization under the Krishnaprasad-Martin metric"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the plant assumptions and, if present, the controller's admissibility.
    Check(CommonArgs),
    /// Run RGD or GD from the configured (or a random) initial controller.
    Solve(CommonArgs),
    /// Run GD, RGD(1,1,1) and RGD(1,0,0) on every configured system.
    Compare(CommonArgs),
    /// Print the optimal LQG cost and write the optimal controller.
    Oracle(CommonArgs),
    /// Hessian signature at the LQG optimum.
    HessCheck(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for output files; relative output paths resolve against it.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Overrides the optimizer seed from the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress informational output.
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Check(a)
            | Command::Solve(a)
            | Command::Compare(a)
            | Command::Oracle(a)
            | Command::HessCheck(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent configuration.
    #[error("parse error: {0}")]
    Parse(String),
    /// The input is well formed but the problem cannot be solved as posed.
    #[error("{0}")]
    Domain(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn domain(e: kmlqg::Error) -> Self {
        CliError::Domain(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

/// `%.12g`-style rendering with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(
            format_significant(6.0 * 2f64.sqrt() - 8.0, 12),
            "0.485281374239"
        );
        assert_eq!(format_significant(2.0, 12), "2");
        assert_eq!(format_significant(706.6843872325101, 12), "706.684387233");
        assert_eq!(format_significant(1.5e-9, 12), "1.5e-9");
        assert_eq!(format_significant(-0.25, 3), "-0.25");
    }

    #[test]
    fn exit_codes_are_disjoint() {
        assert_eq!(CliError::Parse(String::new()).exit_code(), 2);
        assert_eq!(CliError::Domain(String::new()).exit_code(), 1);
        assert_eq!(CliError::Io(String::new()).exit_code(), 1);
    }

    #[test]
    fn arguments_parse() {
        let cli = Cli::try_parse_from([
            "kmlqg", "solve", "--config", "a.toml", "--seed", "3", "--quiet",
        ])
        .unwrap();
        let args = cli.command.args();
        assert_eq!(args.seed, Some(3));
        assert!(args.quiet);
        assert!(Cli::try_parse_from(["kmlqg", "solve"]).is_err());
        assert!(Cli::try_parse_from(["kmlqg", "hess-check", "--config", "a.toml"]).is_ok());
    }
}
