fn main() {
    std::process::exit(franson::cli::dispatch(std::env::args_os()));
}
