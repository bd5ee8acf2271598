fn main() {
    std::process::exit(bellpaths::cli::run(std::env::args_os()));
}
