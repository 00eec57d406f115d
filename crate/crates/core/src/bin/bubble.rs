fn main() {
    std::process::exit(bubble_core::cli::main_with_args(std::env::args_os()));
}
