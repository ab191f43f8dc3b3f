use std::process::ExitCode;

fn main() -> ExitCode {
    match std::panic::catch_unwind(memengine::cli::run) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        // An engine invariant broke; the panic hook has already printed it.
        Err(_) => ExitCode::from(3),
    }
}
