fn main() {
    std::process::exit(omega_tower::cli::main());
}
