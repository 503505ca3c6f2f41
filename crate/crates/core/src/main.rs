fn main() {
    std::process::exit(walkrange::cli::main_with_args());
}
