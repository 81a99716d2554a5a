use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match forest_garrote::cli::parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version arrive here too and are not usage errors
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match forest_garrote::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
