fn main() {
    std::process::exit(bstkit::cli::main_from_env());
}
