fn main() {
    std::process::exit(pardiff_cli::run(std::env::args_os()));
}
