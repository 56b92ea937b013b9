fn main() {
    std::process::exit(riccati_lie::cli::main_with_args(std::env::args_os()));
}
