fn main() {
    std::process::exit(kappa_lab::cli::run_cli(std::env::args()));
}
