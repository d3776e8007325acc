use std::process::ExitCode;

use horizon_lab::cli::{self, CliError};

fn main() -> ExitCode {
    match cli::run(std::env::args_os()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(e)) if !e.use_stderr() => {
            let _ = e.print();
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let CliError::Usage(u) = &e {
                let _ = u.print();
            }
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
