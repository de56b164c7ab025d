fn main() {
    std::process::exit(plexsim_cli::run(std::env::args_os()));
}
