fn main() {
    std::process::exit(stackroute::cli::run(std::env::args_os()));
}
