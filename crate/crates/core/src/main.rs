fn main() {
    std::process::exit(repcoach::cli::run(std::env::args_os()));
}
