fn main() {
    std::process::exit(hyperbound::cli::main_from_env());
}
