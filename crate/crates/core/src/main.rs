fn main() {
    std::process::exit(garchnet::cli::main_with_args(std::env::args_os()));
}
