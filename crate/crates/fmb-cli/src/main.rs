use clap::Parser;

use fmb_cli::cmd::{self, Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(args) => cmd::design::exec(args),
        Command::Run(args) => cmd::run::exec(args),
        Command::Fit(args) => cmd::fit::exec(args),
        Command::Predict(args) => cmd::predict::exec(args),
        Command::Report(args) => cmd::report::exec(args),
    };
    if let Err(err) = result {
        eprintln!("error: {:#}", err);
        std::process::exit(fmb_cli::exit_code(&err));
    }
}
