fn main() {
    std::process::exit(chaoslab::cli::main_with_args(std::env::args_os()));
}
