fn main() {
    std::process::exit(spinsyn::cli::run(std::env::args_os()));
}
