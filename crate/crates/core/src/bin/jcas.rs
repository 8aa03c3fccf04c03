fn main() {
    std::process::exit(jcas::cli::main_with_args(std::env::args_os()));
}
