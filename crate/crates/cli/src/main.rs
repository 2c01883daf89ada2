use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = gi_cli::parse_args(std::env::args_os()).and_then(|spec| gi_cli::run(&spec));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ gi_cli::CliError::Info(_)) => {
            print!("{e}");
            ExitCode::SUCCESS
        }
        Err(e @ gi_cli::CliError::Usage(_)) => {
            eprint!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("gi: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
