fn main() {
    std::process::exit(qreading::cli::run(std::env::args_os()));
}
