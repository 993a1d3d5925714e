use clap::Parser;

use umr_cli::commands::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(&cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", err.record());
            err.exit_code()
        }
    };
    std::process::exit(code);
}
