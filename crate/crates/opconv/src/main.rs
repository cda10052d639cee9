fn main() {
    std::process::exit(opconv::cli::run(std::env::args_os()));
}
