fn main() {
    std::process::exit(fcix_cli::main_with_args(std::env::args_os()));
}
