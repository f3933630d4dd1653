fn main() {
    std::process::exit(misinfo_game::cli::main_with_args(std::env::args_os()));
}
