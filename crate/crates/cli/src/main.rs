use std::process::ExitCode;

use clap::Parser;
use copydesc_cli::{logging, run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    logging::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error!("module={} code={} msg={:?}", f.module, f.code, f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
