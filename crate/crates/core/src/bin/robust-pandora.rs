fn main() {
    std::process::exit(robust_pandora::cli::run(std::env::args_os()));
}
