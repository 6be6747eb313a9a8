mod args;
mod commands;
mod fetch;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use nids_core::Error;

use crate::args::{Cli, Command};

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) => 1,
        Error::Io { .. } | Error::Parse { .. } | Error::Data(_) | Error::UnknownLabel(_) => 2,
        Error::SchemaMismatch(_) | Error::Training(_) | Error::InconsistentEvidence | Error::Model(_) => 3,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("NIDS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("NIDS_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::FetchDataset(opts) => fetch::fetch_dataset(&opts),
        Command::Train(o) => o.merge_config().and_then(|o| commands::train(&o)),
        Command::Eval(o) => o.merge_config().and_then(|o| commands::eval(&o)),
        Command::Crossval(o) => o.merge_config().and_then(|o| commands::crossval(&o)),
        Command::Roc(o) => o.merge_config().and_then(|o| commands::roc(&o)),
        Command::Rank(o) => o.merge_config().and_then(|o| commands::rank(&o)),
        Command::Wrapper(o) => o.merge_config().and_then(|o| commands::wrapper(&o)),
        Command::Report(o) => o.merge_config().and_then(|o| commands::report(&o)),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::InvalidArgument(_)) {
                eprintln!("run `nids --help` for usage");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
