fn main() {
    std::process::exit(csm::cli::main_with_args(std::env::args_os()));
}
