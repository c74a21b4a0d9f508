fn main() {
    std::process::exit(ultrainv::cli::run(std::env::args_os()));
}
