fn main() {
    std::process::exit(qgame::cli::main_entry(std::env::args_os()));
}
