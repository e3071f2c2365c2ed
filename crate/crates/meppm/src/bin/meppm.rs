fn main() -> std::process::ExitCode {
    meppm::cli::main_with(std::env::args_os())
}
