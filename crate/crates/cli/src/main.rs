fn main() {
    std::process::exit(potent_cli::run(std::env::args_os()));
}
