fn main() {
    std::process::exit(bds::cli::main_with_args(std::env::args_os()));
}
