fn main() {
    std::process::exit(microlocal::cli::run());
}
