fn main() {
    std::process::exit(polling_cli::run(std::env::args_os()));
}
