fn main() {
    std::process::exit(mtpgg::cli::run(std::env::args_os()));
}
