fn main() {
    std::process::exit(rpflm::cli::run(std::env::args_os()));
}
