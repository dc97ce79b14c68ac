fn main() {
    std::process::exit(delegation::cli::run(std::env::args_os()));
}
