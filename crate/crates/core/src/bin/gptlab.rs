fn main() {
    std::process::exit(gptlab::cli::run(std::env::args_os()));
}
