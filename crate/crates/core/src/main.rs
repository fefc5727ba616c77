fn main() {
    std::process::exit(cuspkit::cli::main_with_args(std::env::args_os()));
}
