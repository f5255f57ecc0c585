fn main() {
    std::process::exit(lrspp_cli::run(std::env::args_os()));
}
