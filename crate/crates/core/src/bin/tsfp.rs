fn main() {
    std::process::exit(tsfp::cli::main_with_args(std::env::args_os()));
}
