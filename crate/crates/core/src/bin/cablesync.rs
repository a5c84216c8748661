fn main() {
    std::process::exit(cablesync::cli::main_with_args(std::env::args_os()));
}
