fn main() {
    std::process::exit(symknot::cli::run_command(std::env::args_os()));
}
