fn main() {
    std::process::exit(rovtrack::cli::run(std::env::args_os()));
}
