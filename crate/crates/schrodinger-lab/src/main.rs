fn main() {
    std::process::exit(schrodinger_lab::cli::run(std::env::args_os()));
}
