fn main() {
    std::process::exit(skysyn::cli::main_with_args(std::env::args_os()));
}
