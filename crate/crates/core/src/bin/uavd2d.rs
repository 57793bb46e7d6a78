fn main() -> std::process::ExitCode {
    uavd2d::cli::main_with_args(std::env::args_os())
}
