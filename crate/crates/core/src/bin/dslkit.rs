fn main() {
    std::process::exit(dslkit::cli::run(std::env::args_os()));
}
