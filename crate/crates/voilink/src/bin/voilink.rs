fn main() {
    std::process::exit(voilink::cli::run(std::env::args_os()));
}
