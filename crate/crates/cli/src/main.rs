fn main() {
    std::process::exit(kp_cli::main_with_args(std::env::args_os()));
}
