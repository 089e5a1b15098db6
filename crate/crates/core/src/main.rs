fn main() {
    std::process::exit(bboxaug::cli::run(std::env::args_os()));
}
