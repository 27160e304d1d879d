fn main() {
    std::process::exit(parity_mitigation::cli::run(std::env::args_os()));
}
