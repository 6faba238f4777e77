fn main() {
    std::process::exit(nhrelax::cli::main_with_args(std::env::args_os()));
}
