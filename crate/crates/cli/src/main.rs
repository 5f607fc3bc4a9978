fn main() {
    std::process::exit(nsa_cli::cli_main(std::env::args_os()));
}
