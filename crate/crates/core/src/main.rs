fn main() {
    std::process::exit(storl::cli::run());
}
