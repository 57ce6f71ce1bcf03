use std::process::ExitCode;

fn main() -> ExitCode {
    gmm_init::cli::main()
}
