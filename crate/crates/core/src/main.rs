fn main() {
    std::process::exit(omegamb::cli::run(std::env::args_os()));
}
