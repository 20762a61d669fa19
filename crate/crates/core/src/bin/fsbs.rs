fn main() {
    std::process::exit(fsbs::cli::run());
}
