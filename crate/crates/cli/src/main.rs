fn main() {
    std::process::exit(shelf_cli::run(std::env::args_os()));
}
