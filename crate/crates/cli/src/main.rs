use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match fracprice::Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", fracprice::CliError::Usage(e.to_string()).to_json());
            return ExitCode::from(2);
        }
    };
    match fracprice::execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
