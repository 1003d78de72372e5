fn main() {
    std::process::exit(bmf::cli::run_from_env());
}
