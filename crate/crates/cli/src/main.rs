fn main() {
    std::process::exit(hyperlab_cli::main_with_args(std::env::args_os()));
}
