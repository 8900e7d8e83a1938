fn main() {
    std::process::exit(anneal_harness::cli::main_with_args(std::env::args_os()));
}
