use std::io::Write;

use clap::{CommandFactory, Parser};
use latent_ising_cli::{execute, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                std::process::exit(1);
            }
        }
        Err(CliError::Usage(msg)) => Cli::command().error(clap::error::ErrorKind::MissingRequiredArgument, msg).exit(),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
