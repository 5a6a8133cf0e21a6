fn main() {
    std::process::exit(degdiff::cli::main_with_args(std::env::args_os()));
}
