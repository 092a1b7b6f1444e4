fn main() {
    std::process::exit(gradpath::cli::run(std::env::args_os()));
}
