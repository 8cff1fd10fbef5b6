fn main() {
    std::process::exit(compwave_cli::run_cli(std::env::args_os()));
}
