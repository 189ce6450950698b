fn main() {
    std::process::exit(oscmax::cli::run());
}
