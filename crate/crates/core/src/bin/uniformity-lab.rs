fn main() {
    std::process::exit(uniformity_lab::cli::run());
}
