fn main() {
    std::process::exit(slp::cli::run());
}
