fn main() {
    std::process::exit(anyon_qism_cli::run(std::env::args_os()));
}
