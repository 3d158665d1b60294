fn main() {
    std::process::exit(tavis::cli::main_with_args(std::env::args_os()));
}
