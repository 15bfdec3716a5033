fn main() {
    std::process::exit(gwh::cli::main_with_args(std::env::args_os()));
}
