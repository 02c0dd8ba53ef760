fn main() {
    std::process::exit(dpn::cli::run());
}
