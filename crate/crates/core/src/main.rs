fn main() {
    std::process::exit(cbnoma::cli::main());
}
