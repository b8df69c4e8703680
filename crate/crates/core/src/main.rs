fn main() {
    std::process::exit(multistable::cli::run_command(std::env::args_os()));
}
