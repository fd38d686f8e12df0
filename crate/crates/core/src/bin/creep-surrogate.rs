fn main() {
    std::process::exit(creep_surrogate::cli::run(std::env::args_os()));
}
