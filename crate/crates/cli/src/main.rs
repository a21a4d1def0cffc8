fn main() {
    std::process::exit(vdlab_cli::main_with_args(std::env::args_os()));
}
