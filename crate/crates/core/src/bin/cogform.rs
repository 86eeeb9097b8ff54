fn main() {
    std::process::exit(cogform::cli::run(std::env::args_os()));
}
