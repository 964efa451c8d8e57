use std::io;
use std::process::ExitCode;

use clap::Parser;
use witnesskit_cli::{run, Cli, EXIT_DOMAIN};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return if e.use_stderr() {
                ExitCode::from(EXIT_DOMAIN as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let code = run(cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
