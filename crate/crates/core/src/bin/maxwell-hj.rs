fn main() -> std::process::ExitCode {
    maxwell_hj::cli::main_with_args(std::env::args_os())
}
