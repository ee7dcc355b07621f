fn main() {
    std::process::exit(lfpp_cli::run_cli(std::env::args()));
}
