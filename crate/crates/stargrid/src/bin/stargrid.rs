fn main() {
    std::process::exit(stargrid::cli::run());
}
