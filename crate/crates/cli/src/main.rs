fn main() {
    std::process::exit(aerobot_cli::run(std::env::args_os()));
}
