fn main() {
    std::process::exit(pmuplace::cli::run(std::env::args_os()));
}
