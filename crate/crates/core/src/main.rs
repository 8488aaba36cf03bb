fn main() -> std::process::ExitCode {
    qpolar::cli::run(std::env::args_os())
}
