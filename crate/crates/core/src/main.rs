fn main() {
    std::process::exit(qho::cli::main_with(std::env::args_os()));
}
