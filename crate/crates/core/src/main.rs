fn main() {
    std::process::exit(fekete_core::cli::main_with_args(std::env::args_os()));
}
