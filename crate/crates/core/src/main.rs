fn main() {
    std::process::exit(locfuse::cli::run(std::env::args_os()));
}
