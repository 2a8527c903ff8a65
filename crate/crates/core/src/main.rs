fn main() {
    std::process::exit(leibniz_rota::cli::run(std::env::args_os()));
}
