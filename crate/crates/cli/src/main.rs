fn main() {
    std::process::exit(ergokit_cli::run(std::env::args_os()));
}
