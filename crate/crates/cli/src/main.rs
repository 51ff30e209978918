//! `ghostlink` command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 not supercritical,
//! 3 undetermined numerics, 4 every replicate went extinct.

// `!(x > 0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod compare;
mod experiment;
mod figure;
mod output;
mod simulate;
mod theory;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NOT_SUPERCRITICAL: u8 = 2;
pub const EXIT_UNDETERMINED: u8 = 3;
pub const EXIT_EXTINCT: u8 = 4;

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::new(EXIT_USAGE, e)
    }
}

pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Theory(a) => a.resolve().map_err(Failure::from).and_then(theory::run),
        Command::Simulate(a) => a.resolve().map_err(Failure::from).and_then(simulate::run),
        Command::Compare(a) => a.resolve().map_err(Failure::from).and_then(compare::run),
        Command::Figure(a) => a.resolve().map_err(Failure::from).and_then(figure::run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
