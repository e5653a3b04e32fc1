fn main() {
    std::process::exit(roofforge::cli::run());
}
