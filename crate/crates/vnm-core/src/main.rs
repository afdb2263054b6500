fn main() {
    std::process::exit(vnm_core::cli::run());
}
