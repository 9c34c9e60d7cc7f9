fn main() {
    std::process::exit(styloverify::cli::main_with_args(std::env::args_os()));
}
