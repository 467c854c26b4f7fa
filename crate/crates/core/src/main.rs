fn main() {
    std::process::exit(evidential_ogm::cli::run(std::env::args_os()));
}
