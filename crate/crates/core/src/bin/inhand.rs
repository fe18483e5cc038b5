fn main() {
    std::process::exit(inhand::harness::cli::main_with_args(std::env::args_os()));
}
